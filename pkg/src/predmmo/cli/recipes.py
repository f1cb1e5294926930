"""Pre-baked configurations for the published experiments."""

from __future__ import annotations

from ..errors import UnknownRecipe
from .config import SCHEMA_VERSION, validate

BASE_SET = {}
BETA1_04 = {"beta1": 0.4}
EQUAL_BETA = {"beta1": 0.35}
BASIN_RECT = [[0.08, 0.115], [0.325, 0.36]]


def _cfg(kind, name, model=None, integration=None, **exp):
    cfg = {"schema_version": SCHEMA_VERSION, "experiment": {"kind": kind, **exp},
           "output": {"name": name}}
    if model:
        cfg["model"] = dict(model)
    if integration:
        cfg["integration"] = dict(integration)
    return cfg


def _nf(alpha, zeta=0.001):
    return {"type": "normal-form", "zeta": zeta, "alpha": alpha}


RECIPES = {
    "sec4-equilibria": [_cfg("equilibria", "equilibria", {"h": 0.785})],
    "sec4-folded": [_cfg("folded", "folded-h0.785", {"h": 0.785}),
                    _cfg("folded", "folded-h0.819", {"h": 0.819})],
    "sec4-fsn2": [_cfg("fsn2", "fsn2")],
    "sec6-coeffs": [
        _cfg("normalform", "normalform-base", {**BASE_SET, "zeta": 0.001}),
        _cfg("normalform", "normalform-beta1-0.4", {**BETA1_04, "zeta": 0.001}),
        _cfg("normalform", "normalform-equal-beta", {**EQUAL_BETA, "zeta": 0.001}),
    ],
    "sec6-hopf": [_cfg("hopf", "hopf-base", {"zeta": 0.001})],
    "fig2-pd-route": [_cfg("scan", "orbit-diagram-pd", h_range=[0.78, 0.8], n_h=81,
                           y0=[0.4641, 0.0978, 0.3272], warm_start=True)],
    "fig3-orbit-diagram": [_cfg("scan", "orbit-diagram", h_range=[0.78, 1.0], n_h=111)],
    "fig5-timeseries": [
        _cfg("simulate", "timeseries-h0.8", {"h": 0.8}, y0=[0.01, 0.01, 0.12],
             span=[0.0, 4000.0], transient=2000.0),
        _cfg("simulate", "timeseries-h0.819", {"h": 0.819}, y0=[0.01, 0.01, 0.12],
             span=[0.0, 12000.0], transient=2000.0),
    ],
    "fig7-poincare": [_cfg("poincare", "poincare-gamma-h", {"h": 0.785},
                           y0=[0.4641, 0.0978, 0.3272], n_returns=50, transient=20000.0)],
    "fig8a-basin": [_cfg("basin", "basin", {"h": 0.785}, x0=0.3428, rect=BASIN_RECT,
                         resolution=[40, 40])],
    "fig8b-navg": [_cfg("navg", "navg", h_range=[0.8, 0.95], n_h=61)],
    "fig9-twopar": [_cfg("twopar", "twopar", h_range=[0.4, 1.2], beta1_range=[0.15, 0.45],
                         resolution=[13, 41])],
    "fig14-poincare": [_cfg("poincare", "poincare-u15", {"zeta": 0.001}, {"max_steps": 400000000},
                            system=_nf(0.4613),
                            y0=[0.1, 0.0, 0.0], n_returns=5000,
                            plane={"normal": [1, 0, 0], "offset": 15.0, "direction": "rising"},
                            t_max=1e9)],
    "fig16-normal-form-mmo": [_cfg("simulate", "nf-mmo-1-14", BETA1_04, system=_nf(1.022),
                                   y0=[0.1, 0.0, 0.0], span=[0.0, 20000.0],
                                   transient=2000.0)],
}


def names():
    return sorted(RECIPES)


def recipe(name: str) -> list:
    """Validated configs of one recipe; raises UnknownRecipe."""
    if name not in RECIPES:
        raise UnknownRecipe(name, names())
    return [validate(c) for c in RECIPES[name]]
