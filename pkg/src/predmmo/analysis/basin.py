"""Basins of the small cycle Γ_h and the MMO attractor on a plane ``x = x0``."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import IntegrationError
from ..integrator import IntegrationSettings, integrate
from ..io import write_csv
from ..model import ModelParams
from .pool import parallel_map
from .signature import LAO_THRESHOLD


class Label(str, enum.Enum):
    GAMMA_H = "GammaH"
    MMO = "MMO"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class BasinCriteria:
    """Peak-based attractor tests applied on ``(transient, horizon]``.

    The window is cut into ``n_windows`` equal pieces.  A start is MMO when
    every piece has an ``x`` peak above ``lao_threshold``, and Γ_h when the
    largest peak of every piece lies inside ``gamma_band``.
    """

    lao_threshold: float = LAO_THRESHOLD
    gamma_band: tuple = (0.35, 0.5)
    transient: float = 6000.0
    horizon: float = 8000.0
    n_windows: int = 4

    def __post_init__(self):
        lo, hi = self.gamma_band
        if not lo < hi:
            raise ValueError("gamma_band must be increasing")
        if not 0 <= self.transient < self.horizon:
            raise ValueError("need 0 <= transient < horizon")
        if self.n_windows < 1:
            raise ValueError("n_windows must be >= 1")
        object.__setattr__(self, "gamma_band", (float(lo), float(hi)))

    def to_dict(self):
        d = asdict(self)
        d["gamma_band"] = list(self.gamma_band)
        return d


@dataclass(frozen=True)
class Classification:
    label: Label
    reason: str = ""
    window_max: tuple = ()


def classify_peaks(times, values, criteria: BasinCriteria) -> Classification:
    """Apply the criteria to the maxima ``(times, values)`` of ``x``."""
    times = np.asarray(times, float)
    values = np.asarray(values, float)
    edges = np.linspace(criteria.transient, criteria.horizon, criteria.n_windows + 1)
    wmax = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (times > a) & (times <= b)
        wmax.append(float(values[m].max()) if m.any() else float("nan"))
    wmax = tuple(wmax)
    if any(np.isnan(v) for v in wmax):
        return Classification(Label.UNRESOLVED, "no-peaks", wmax)
    lo, hi = criteria.gamma_band
    if all(v > criteria.lao_threshold for v in wmax):
        return Classification(Label.MMO, "", wmax)
    if all(lo < v < hi for v in wmax):
        return Classification(Label.GAMMA_H, "", wmax)
    return Classification(Label.UNRESOLVED, "mixed", wmax)


def classify_start(p: ModelParams, y0, criteria: BasinCriteria = BasinCriteria(),
                   settings: IntegrationSettings | None = None) -> Classification:
    """Integrate from ``y0`` to the horizon and classify the late peaks."""
    try:
        traj = integrate(p.slow_field(), y0, (0.0, criteria.horizon), settings,
                         store="none", extrema_component=0,
                         extrema_after=criteria.transient)
    except IntegrationError as exc:
        return Classification(Label.UNRESOLVED, type(exc).__name__)
    t, v, k = traj.extrema
    m = k == 1
    return classify_peaks(t[m], v[m], criteria)


@dataclass(frozen=True)
class BasinGrid:
    """Labels on the ``ny x nz`` grid ``rect`` of the plane ``x = x0``.

    ``labels[i, j]`` belongs to ``(ys[i], zs[j])``.
    """

    x0: float
    rect: tuple
    resolution: tuple
    labels: np.ndarray
    reasons: np.ndarray
    criteria: BasinCriteria
    ys: np.ndarray = field(repr=False, default=None)
    zs: np.ndarray = field(repr=False, default=None)

    def fractions(self) -> dict:
        n = self.labels.size
        return {lab.value: float(np.sum(self.labels == lab.value)) / n for lab in Label}

    def rows(self):
        for i, y in enumerate(self.ys):
            for j, z in enumerate(self.zs):
                yield y, z, self.labels[i, j], self.reasons[i, j]

    def to_csv(self, path):
        return write_csv(path, ("y", "z", "label", "reason"), self.rows())

    def summary(self):
        return {"x0": self.x0, "rect": [list(r) for r in self.rect],
                "resolution": list(self.resolution), "fractions": self.fractions(),
                "criteria": self.criteria.to_dict()}


def grid_axes(rect, resolution):
    (ylo, yhi), (zlo, zhi) = rect
    ny, nz = resolution
    ys = np.linspace(ylo, yhi, ny) if ny > 1 else np.array([0.5 * (ylo + yhi)])
    zs = np.linspace(zlo, zhi, nz) if nz > 1 else np.array([0.5 * (zlo + zhi)])
    return ys, zs


def basin_scan(p: ModelParams, x0: float, rect, resolution, criteria: BasinCriteria = BasinCriteria(),
               settings: IntegrationSettings | None = None, threads: int | None = None,
               allow_degenerate: bool = False) -> BasinGrid:
    """Classify every grid start on ``x = x0``; cells run independently.

    ``rect`` is ``((y_lo, y_hi), (z_lo, z_hi))``.  A resolution below 2x2
    needs ``allow_degenerate`` (the single cell sits at the centre).
    """
    ny, nz = (int(v) for v in resolution)
    if not allow_degenerate and (ny < 2 or nz < 2):
        raise ValueError("resolution must be at least 2x2")
    if ny < 1 or nz < 1:
        raise ValueError("resolution must be positive")
    (ylo, yhi), (zlo, zhi) = rect
    if not (ylo < yhi and zlo < zhi):
        raise ValueError("rect ranges must be increasing")
    ys, zs = grid_axes(rect, (ny, nz))
    starts = [(float(x0), float(y), float(z)) for y in ys for z in zs]
    results = parallel_map(lambda s: classify_start(p, s, criteria, settings), starts, threads)
    labels = np.array([r.label.value for r in results], dtype=object).reshape(ny, nz)
    reasons = np.array([r.reason for r in results], dtype=object).reshape(ny, nz)
    return BasinGrid(float(x0), ((float(ylo), float(yhi)), (float(zlo), float(zhi))), (ny, nz),
                     labels, reasons, criteria, ys, zs)
