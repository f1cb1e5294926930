"""One- and two-parameter scans in ``h`` and ``(beta1, h)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..errors import IntegrationError, NoCrossing, NoPeaks, PredMMOError
from ..integrator import IntegrationSettings, integrate
from ..io import write_csv
from ..model import (ModelParams, _interior_candidates, _newton_rates, char_poly,
                     eigenvalues3, interior_equilibria, jacobian, uvw)
from ..slowfast import _fold_distance
from .pool import parallel_map
from .signature import LAO_THRESHOLD, SAO_MIN_PROMINENCE, signature_from_extrema

START = (0.01, 0.01, 0.12)
SCAN_TRANSIENT = 2000.0
SCAN_WINDOW = 2000.0
NAVG_WINDOW = 2000.0


# orbit diagram

@dataclass(frozen=True)
class ScanColumn:
    h: float
    maxima: np.ndarray
    extrema: tuple = field(repr=False, default=())
    end_state: tuple = ()
    error: str = ""


@dataclass(frozen=True)
class OrbitDiagram:
    columns: tuple
    transient: float
    window: float

    def rows(self):
        for c in self.columns:
            for v in c.maxima:
                yield c.h, v

    def failures(self):
        return [(c.h, c.error) for c in self.columns if c.error]

    def to_csv(self, path):
        return write_csv(path, ("h", "xmax"), self.rows())


def branch_count(values, tol: float = 1e-4) -> int:
    """Number of clusters of ``values`` separated by gaps wider than ``tol``."""
    v = np.sort(np.asarray(values, float))
    if v.size == 0:
        return 0
    return 1 + int(np.sum(np.diff(v) > tol))


def _column(p, h, y0, transient, window, settings):
    if window <= 0:
        return ScanColumn(h, np.empty(0), (np.empty(0),) * 3, tuple(y0))
    q = p.replace(h=h)
    try:
        traj = integrate(q.slow_field(), y0, (0.0, transient + window), settings, store="none",
                         extrema_component=0, extrema_after=transient)
    except IntegrationError as exc:
        return ScanColumn(h, np.empty(0), (np.empty(0),) * 3, tuple(y0), type(exc).__name__)
    t, v, k = traj.extrema
    return ScanColumn(h, v[k == 1], (t, v, k), tuple(traj.final_state))


def bifurcation_scan(p: ModelParams, h_range, n_h: int, transient=SCAN_TRANSIENT,
                     window=SCAN_WINDOW, y0=START, settings: IntegrationSettings | None = None,
                     warm_start: bool = False, threads: int | None = None) -> OrbitDiagram:
    """Maxima of ``x`` over ``(transient, transient + window]`` for each ``h``.

    With ``warm_start`` each ``h`` starts from the previous end state and
    the sweep runs serially in the order of ``h_range``.
    """
    if n_h < 2:
        raise ValueError("n_h must be >= 2")
    if transient < 0 or window < 0:
        raise ValueError("transient and window must be nonnegative")
    hs = np.linspace(h_range[0], h_range[1], n_h)
    if warm_start:
        cols, state = [], tuple(y0)
        for h in hs:
            c = _column(p, float(h), state, transient, window, settings)
            cols.append(c)
            if not c.error:
                state = c.end_state
    else:
        cols = parallel_map(lambda h: _column(p, float(h), y0, transient, window, settings),
                            hs, threads)
    return OrbitDiagram(tuple(cols), float(transient), float(window))


def n_avg(p: ModelParams, h_range, n_h: int, window=NAVG_WINDOW, transient=SCAN_TRANSIENT,
          y0=START, settings=None, lao_threshold=LAO_THRESHOLD,
          sao_min_prominence=SAO_MIN_PROMINENCE, threads=None) -> list:
    """``(h, N_avg)`` per ``h``; ``N_avg`` is None without two LAOs in the window."""
    diagram = bifurcation_scan(p, h_range, n_h, transient, window, y0, settings, threads=threads)
    out = []
    for c in diagram.columns:
        val = None
        if not c.error and c.extrema[0].size:
            try:
                sig = signature_from_extrema(*c.extrema, lao_threshold, sao_min_prominence,
                                             (transient, transient + window))
                val = sig.n_avg
            except NoPeaks:
                val = None
        out.append((c.h, val))
    return out


def write_navg(path, rows):
    return write_csv(path, ("h", "navg"), ((h, "" if v is None else v) for h, v in rows))


# two-parameter curves

def hurwitz(m) -> float:
    """``a2 a1 - a0`` of ``det(lambda - m)``; zero where a complex pair is imaginary."""
    _, a2, a1, a0 = char_poly(m)
    return a2 * a1 - a0


def _feasible(p):
    eqs = interior_equilibria(p)
    return max(eqs, key=lambda s: s[1]) if eqs else None


def _branch(p):
    # all real solutions with 0 < x < 1, continued past the positivity boundary
    out = []
    for cand in _interior_candidates(p):
        s = _newton_rates(cand, p)
        if np.all(np.isfinite(s)) and 0 < s[0] < 1 and np.max(np.abs(uvw(s, p))) < 1e-10:
            out.append(s)
    return max(out, key=lambda s: s[1]) if out else None


def _hopf_fn(p):
    s = _feasible(p)
    return math.nan if s is None else hurwitz(jacobian(s, p))


def _sn_fn(p):
    s = _branch(p)
    return math.nan if s is None else float(np.linalg.det(jacobian(s, p)))


def _first_root(fn, p, hs, check=None):
    values = [fn(p.replace(h=float(h))) for h in hs]
    for i in range(hs.size - 1):
        a, b = values[i], values[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            return float(hs[i])
        if a * b < 0:
            try:
                r = brentq(lambda h: fn(p.replace(h=h)), hs[i], hs[i + 1], xtol=1e-12)
            except ValueError:
                continue
            # a jump between branches is not a root
            if check is None or abs(fn(p.replace(h=r))) < check:
                return float(r)
    return None


def _is_hopf(p, h) -> bool:
    q = p.replace(h=h)
    s = _feasible(q)
    if s is None:
        return False
    eigs = eigenvalues3(jacobian(s, q))
    pair = [e for e in eigs if abs(e.imag) > 1e-9]
    return bool(pair) and max(abs(e.real) for e in pair) < 1e-6


@dataclass(frozen=True)
class Column:
    beta1: float
    hopf: float | None
    fsn2: float | None
    sn: float | None
    note: str = ""


@dataclass(frozen=True)
class TwoParamResult:
    columns: tuple
    zero_hopf: tuple | None
    h_range: tuple

    def rows(self):
        for c in self.columns:
            for cid, h in (("hopf", c.hopf), ("fsn2", c.fsn2), ("sn", c.sn)):
                if h is not None:
                    yield c.beta1, h, cid
        if self.zero_hopf is not None:
            yield self.zero_hopf[0], self.zero_hopf[1], "zero-hopf"

    def skipped(self):
        return [(c.beta1, c.note) for c in self.columns if c.note]

    def to_csv(self, path):
        return write_csv(path, ("beta1", "h", "curve"), self.rows())


def scan_column(p: ModelParams, beta1: float, h_range, n_h: int) -> Column:
    """Hopf, FSN II and SN values of ``h`` for one ``beta1``.

    Hopf is the first sign change of the Hurwitz determinant at the
    positive equilibrium, which is where its complex pair crosses the
    imaginary axis.  FSN II is the sign change of ``u_x`` there, as in
    :func:`detect_fsn2`.  SN is the sign change of ``det J`` along the real
    branch, continued past the positivity boundary.  Curves often start
    right where an equilibrium appears, so those edges are located by
    bisection and sampled as well.
    """
    q = p.replace(beta1=float(beta1))
    hs = np.linspace(h_range[0], h_range[1], n_h)
    feas_hs = _with_edges(q, hs, _feasible)
    hopf = _first_root(_hopf_fn, q, feas_hs)
    if hopf is not None and not _is_hopf(q, hopf):
        hopf = None
    fsn = _first_root(_fold_distance, q, feas_hs)
    sn = _first_root(_sn_fn, q, _with_edges(q, hs, _branch), check=1e-8)
    note = "" if any(_feasible(q.replace(h=float(h))) is not None for h in feas_hs) \
        else "no interior equilibrium"
    return Column(float(beta1), hopf, fsn, sn, note)


def _with_edges(q, hs, finder, tol=1e-10):
    """``hs`` plus the points where ``finder`` starts or stops returning a state."""
    have = [finder(q.replace(h=float(h))) is not None for h in hs]
    extra = []
    for i in range(hs.size - 1):
        if have[i] == have[i + 1]:
            continue
        a, b = float(hs[i]), float(hs[i + 1])
        while b - a > tol:
            m = 0.5 * (a + b)
            if (finder(q.replace(h=m)) is not None) == have[i]:
                a = m
            else:
                b = m
        extra.append(a if have[i] else b)
    return np.array(sorted({*hs.tolist(), *extra}))


def zero_hopf(p: ModelParams, columns, h_range, n_h: int, iters: int = 30):
    """Meeting point of the Hopf and FSN II curves.

    Takes the column with the smallest ``|h_hopf - h_fsn2|`` and bisects in
    ``beta1`` towards the neighbouring column where the two curves are no
    longer both present.  Returns ``(beta1, h)`` or None.
    """
    both = [c for c in columns if c.hopf is not None and c.fsn2 is not None]
    if not both:
        return None
    best = min(both, key=lambda c: abs(c.hopf - c.fsn2))
    k = next(i for i, c in enumerate(columns) if c is best)
    lost = [columns[j] for j in (k - 1, k + 1) if 0 <= j < len(columns)
            and (columns[j].hopf is None or columns[j].fsn2 is None)]
    if not lost:
        return best.beta1, 0.5 * (best.hopf + best.fsn2)
    good, bad = best, lost[0]
    for _ in range(iters):
        if abs(good.beta1 - bad.beta1) < 1e-7:
            break
        c = _safe_column(p, 0.5 * (good.beta1 + bad.beta1), h_range, n_h)
        if c.hopf is not None and c.fsn2 is not None:
            good = c
        else:
            bad = c
    return good.beta1, 0.5 * (good.hopf + good.fsn2)


def two_param_scan(p: ModelParams, h_range, beta1_range, resolution, threads=None,
                   refine: bool = True) -> TwoParamResult:
    """Hopf, FSN II and SN curves on a ``(n_beta1, n_h)`` grid plus a zero-Hopf estimate."""
    nb, nh = (int(v) for v in resolution)
    if nb < 8 or nh < 8:
        raise ValueError("resolution must be at least 8x8")
    betas = np.linspace(beta1_range[0], beta1_range[1], nb)
    cols = parallel_map(lambda b: _safe_column(p, float(b), h_range, nh), betas, threads)
    zh = zero_hopf(p, cols, h_range, nh) if refine else None
    return TwoParamResult(tuple(cols), zh, (float(h_range[0]), float(h_range[1])))


def mmo_flag(p: ModelParams, beta1: float, h_values, transient=SCAN_TRANSIENT,
             window=SCAN_WINDOW, y0=START, settings=None, min_blocks: int = 2,
             threads=None) -> bool:
    """True when some probed ``h`` settles on oscillations with both LAOs and SAOs.

    Each probe needs ``min_blocks`` closed blocks ``L^s`` with ``s >= 1``.
    """
    q = p.replace(beta1=float(beta1))
    cols = parallel_map(lambda h: _column(q, float(h), y0, transient, window, settings),
                        list(h_values), threads)
    for c in cols:
        if c.error or not np.any(c.extrema[2] == 1):
            continue
        sig = signature_from_extrema(*c.extrema, window=(transient, transient + window))
        if sum(1 for L, n in sig.complete_blocks if L >= 1 and n >= 1) >= min_blocks:
            return True
    return False


def _safe_column(p, b, h_range, nh):
    try:
        return scan_column(p, b, h_range, nh)
    except (PredMMOError, ValueError) as exc:
        return Column(b, None, None, None, f"{type(exc).__name__}: {exc}")


__all__ = ["OrbitDiagram", "ScanColumn", "bifurcation_scan", "branch_count", "n_avg",
           "write_navg", "Column", "TwoParamResult", "scan_column", "two_param_scan",
           "zero_hopf", "hurwitz", "mmo_flag"]
