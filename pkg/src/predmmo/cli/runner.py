"""Dispatch a validated config to the owning module and write its artifacts."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..analysis import (BasinCriteria, PoincarePlane, aperiodicity_check, basin_scan,
                        bifurcation_scan, branch_count, crossings_array, mmo_signature, n_avg,
                        poincare_map, two_param_scan, write_crossings, write_navg)
from ..errors import NoPeaks
from ..integrator import Direction, IntegrationSettings, integrate
from ..io import write_csv, write_json
from ..model import ModelParams, find_equilibria
from ..normalform import coeffs, hopf, report, solve_fsn
from ..slowfast import detect_fsn2, find_folded_singularities

MANIFEST_VERSION = 1


@dataclass
class Outcome:
    summary: str
    files: list = field(default_factory=list)
    data: dict = field(default_factory=dict)


class _Writer:
    """Collects artifacts in a directory created on first write."""

    def __init__(self, directory, fmt, name):
        self.dir = Path(directory)
        self.fmt = fmt
        self.name = name
        self.files = []

    def _path(self, suffix, ext):
        self.dir.mkdir(parents=True, exist_ok=True)
        stem = self.name if not suffix else f"{self.name}-{suffix}"
        return self.dir / f"{stem}.{ext}"

    def json(self, obj, suffix=""):
        self.files.append(write_json(self._path(suffix, "json"), obj))

    def table(self, header, rows, suffix=""):
        rows = list(rows)
        if self.fmt == "json":
            recs = [dict(zip(header, r)) for r in rows]
            self.json({"columns": list(header), "rows": recs}, suffix)
        else:
            self.files.append(write_csv(self._path(suffix, "csv"), header, rows))


def model_params(cfg) -> ModelParams:
    return ModelParams.from_dict(cfg.get("model", {}))


def settings_of(cfg) -> IntegrationSettings:
    return IntegrationSettings.from_dict(cfg.get("integration", {}))


def _system(p, spec):
    """Vector field plus a label for the ``system`` block."""
    spec = spec or {"type": "model"}
    if spec["type"] == "model":
        return p.slow_field(), None
    zeta = spec.get("zeta", p.zeta)
    fsn = solve_fsn(p)
    c = coeffs(fsn, p, zeta=zeta, h=spec.get("h"), printed=spec.get("printed", False))
    if "alpha" in spec:
        c = c.with_alpha(spec["alpha"])
    return c.field(), c


def _simulate(cfg, p, st, w, exp, threads):
    f, nf = _system(p, exp.get("system"))
    if exp.get("time_scale") == "fast" and nf is None:
        f = p.fast_field()
    traj = integrate(f, exp["y0"], exp["span"], st, store=exp.get("store", "nodes"),
                     extrema_component=0)
    cols = ("t", "u", "v", "w") if nf is not None else ("t", "x", "y", "z")
    w.table(cols, ([t, *y] for t, y in zip(traj.times, traj.states)))
    info = {"status": traj.status, "nsteps": traj.nsteps, "nrejected": traj.nrejected,
            "final_time": traj.final_time, "final_state": list(traj.final_state)}
    default_thr = 15.0 if nf is not None else 0.7
    after = exp.get("transient", exp["span"][0])
    try:
        sig = mmo_signature(traj, exp.get("lao_threshold", default_thr),
                            exp.get("sao_min_prominence", 1e-7), after)
        info["signature"] = sig.to_dict()
        label = f" signature {sig.label(4)}"
    except (NoPeaks, ValueError):
        label = ""
    t, v, k = traj.extrema
    w.table(("t", "value", "kind"), zip(t, v, k), "extrema")
    w.json(info, "summary")
    return f"simulate: {traj.nsteps} steps to t={traj.final_time:.6g}{label}"


def _equilibria(cfg, p, st, w, exp, threads):
    eqs = find_equilibria(p)
    w.json({"equilibria": [e.to_dict() for e in eqs]})
    inner = [e for e in eqs if e.is_interior]
    x, y, z = inner[0].state
    return (f"equilibria: {len(eqs)} found; interior ({x:.6g}, {y:.6g}, {z:.6g}) "
            f"{inner[0].stability.value}")


def _folded(cfg, p, st, w, exp, threads):
    fs = find_folded_singularities(p)
    w.json({"folded_singularities": [s.to_dict() for s in fs]})
    parts = [f"{s.kind.value} at ({', '.join(f'{v:.6g}' for v in s.location)})" for s in fs]
    return f"folded: {len(fs)} found" + ("; " + "; ".join(parts) if parts else "")


def _fsn2(cfg, p, st, w, exp, threads):
    h_star = detect_fsn2(p, tuple(exp.get("h_bracket", (0.745, 0.9))), exp.get("n_scan", 40))
    out = {"h_star": h_star, "h_bracket": list(exp.get("h_bracket", (0.745, 0.9)))}
    try:
        out["fsn_point"] = solve_fsn(p).to_dict()
    except Exception as exc:  # the closed form is optional here
        out["fsn_point_error"] = f"{type(exc).__name__}: {exc}"
    w.json(out)
    return f"fsn2: h* = {h_star:.7g}"


def _normalform(cfg, p, st, w, exp, threads):
    rep = report(p, exp.get("zeta", p.zeta), exp.get("h"), exp.get("printed", False))
    w.json(rep)
    c = rep["coefficients"]
    return (f"normalform: hbar = {rep['fsn']['hbar']:.6g} delta/sqrt(zeta) = "
            f"{c['delta_over_sqrt_zeta']:.6g} H_w = {c['h_w']:.6g}")


def _hopf(cfg, p, st, w, exp, threads):
    zeta = exp.get("zeta", p.zeta)
    res = hopf(solve_fsn(p), p, zeta, exp.get("printed", False))
    w.json(res.to_dict())
    return f"hopf: h = {res.h_hopf:.6g} l1 = {res.l1:.6g} {res.criticality.value}"


def _plane(spec, nf):
    if spec is None:
        if nf is not None:
            return PoincarePlane((1.0, 0.0, 0.0), 15.0, Direction.RISING)
        return PoincarePlane.sigma_h()
    d = {"rising": Direction.RISING, "falling": Direction.FALLING,
         "any": Direction.ANY}[spec.get("direction", "any")]
    return PoincarePlane(tuple(spec["normal"]), spec["offset"], d, spec.get("component"))


def _poincare(cfg, p, st, w, exp, threads):
    f, nf = _system(p, exp.get("system"))
    plane = _plane(exp.get("plane"), nf)
    ev = poincare_map(f, exp["y0"], plane, exp["n_returns"], st,
                      transient=exp.get("transient", 0.0), t_max=exp.get("t_max", 1e7))
    cols = ("t", "u", "v", "w") if nf is not None else ("t", "x", "y", "z")
    w.table(cols, ([e.time, *e.state] for e in ev))
    info = {"plane": plane.to_dict(), "n_returns": len(ev),
            "max_residual": max(abs(plane.residual(e.state)) for e in ev)}
    if len(ev) >= 3:
        info["aperiodicity"] = aperiodicity_check(crossings_array(ev),
                                                  exp.get("aperiodicity_tol", 1e-6)).to_dict()
    w.json(info, "summary")
    last = ev[-1].state
    return f"poincare: {len(ev)} returns; last ({', '.join(f'{v:.6g}' for v in last)})"


def _basin(cfg, p, st, w, exp, threads):
    crit = exp.get("criteria", {})
    if "gamma_band" in crit:
        crit = {**crit, "gamma_band": tuple(crit["gamma_band"])}
    grid = basin_scan(p, exp["x0"], tuple(tuple(r) for r in exp["rect"]),
                      tuple(exp["resolution"]), BasinCriteria(**crit), st, threads)
    w.table(("y", "z", "label", "reason"), grid.rows())
    w.json(grid.summary(), "summary")
    fr = grid.fractions()
    return "basin: " + " ".join(f"{k}={v:.3f}" for k, v in fr.items())


def _scan(cfg, p, st, w, exp, threads):
    d = bifurcation_scan(p, exp["h_range"], exp["n_h"], exp.get("transient", 2000.0),
                         exp.get("window", 2000.0), tuple(exp.get("y0", (0.01, 0.01, 0.12))),
                         st, exp.get("warm_start", False), threads)
    w.table(("h", "xmax"), d.rows())
    branches = [branch_count(c.maxima) for c in d.columns]
    w.json({"h": [c.h for c in d.columns], "branches": branches,
            "failures": d.failures()}, "summary")
    return f"scan: {len(d.columns)} values of h, {sum(len(c.maxima) for c in d.columns)} maxima"


def _navg(cfg, p, st, w, exp, threads):
    rows = n_avg(p, exp["h_range"], exp["n_h"], exp.get("window", 2000.0),
                 exp.get("transient", 2000.0), tuple(exp.get("y0", (0.01, 0.01, 0.12))), st,
                 exp.get("lao_threshold", 0.7), exp.get("sao_min_prominence", 1e-7), threads)
    if w.fmt == "json":
        w.table(("h", "navg"), rows)
    else:
        w.files.append(write_navg(w._path("", "csv"), rows))
    got = [v for _, v in rows if v is not None]
    return f"navg: {len(got)} of {len(rows)} values of h with two or more LAOs"


def _twopar(cfg, p, st, w, exp, threads):
    res = two_param_scan(p, exp["h_range"], exp["beta1_range"], tuple(exp["resolution"]),
                         threads)
    w.table(("beta1", "h", "curve"), res.rows())
    w.json({"zero_hopf": res.zero_hopf, "skipped": res.skipped()}, "summary")
    if res.zero_hopf is None:
        return "twopar: no zero-Hopf estimate"
    b, h = res.zero_hopf
    return f"twopar: zero-Hopf at beta1 = {b:.6g}, h = {h:.6g}"


DISPATCH = {"simulate": _simulate, "equilibria": _equilibria, "folded": _folded,
            "fsn2": _fsn2, "normalform": _normalform, "hopf": _hopf, "poincare": _poincare,
            "basin": _basin, "scan": _scan, "navg": _navg, "twopar": _twopar}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run(cfg: dict, threads=None, out=None, fmt=None, write_manifest=True) -> Outcome:
    """Execute a validated config; artifacts plus ``<name>-manifest.json``."""
    exp = cfg["experiment"]
    output = dict(cfg.get("output", {}))
    if out is not None:
        output["dir"] = str(out)
    if fmt is not None:
        output["format"] = fmt
    w = _Writer(output.get("dir", "."), output.get("format", "csv"),
                output.get("name", exp["kind"]))
    p = model_params(cfg)
    st = settings_of(cfg)
    summary = DISPATCH[exp["kind"]](cfg, p, st, w, exp, threads)
    if write_manifest:
        # the stored config omits the output directory so reruns may target any place
        stored = {k: v for k, v in cfg.items() if k != "output"}
        if "output" in cfg:
            stored["output"] = {k: v for k, v in cfg["output"].items() if k != "dir"}
        manifest = {
            "manifest_version": MANIFEST_VERSION,
            "tool": {"name": "predmmo", "version": __version__},
            "config": stored,
            "resolved": {"model": p.to_dict(), "integration": st.to_dict()},
            "outputs": {f.name: _sha256(f) for f in w.files},
        }
        w.json(manifest, "manifest")
    return Outcome(summary, list(w.files))


__all__ = ["run", "Outcome", "DISPATCH"]
