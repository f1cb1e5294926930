"""Mixed-mode signatures from the peaks of one component.

A peak is an LAO when its value exceeds ``lao_threshold``.  Below the
threshold it is an SAO only if its prominence (height over the higher of
the two neighbouring minima) exceeds ``sao_min_prominence``; shallower
peaks are dropped as undetected.  Runs of LAOs followed by runs of SAOs
give blocks ``L^s``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import NoPeaks
from ..integrator import Trajectory, local_extrema

LAO_THRESHOLD = 0.7
SAO_MIN_PROMINENCE = 1e-7
TRANSIENT = 2000.0

LAO, SAO = "L", "s"


@dataclass(frozen=True)
class MmoSignature:
    """Run-length record of a classified peak sequence.

    ``leading`` counts SAOs seen before the first LAO.  The last block may
    be cut off by the end of the window and is flagged by ``last_complete``.
    """

    blocks: tuple
    leading: int
    lao_threshold: float
    sao_min_prominence: float
    window: tuple
    undetected: int = 0
    last_complete: bool = False

    @property
    def sequence(self) -> str:
        """Chronological classification as a string of ``L`` and ``s``."""
        return SAO * self.leading + "".join(LAO * L + SAO * s for L, s in self.blocks)

    @property
    def n_lao(self) -> int:
        return sum(L for L, _ in self.blocks)

    @property
    def complete_blocks(self) -> tuple:
        return self.blocks if self.last_complete else self.blocks[:-1]

    @property
    def n_avg(self) -> float | None:
        """Mean number of SAOs between consecutive LAOs (None without two LAOs)."""
        if self.n_lao < 2:
            return None
        # only gaps closed on both sides by an LAO count
        inner = self.blocks[:-1]
        gaps = sum(L for L, _ in self.blocks) - 1
        return sum(s for _, s in inner) / gaps

    def counts(self) -> Counter:
        return Counter(self.complete_blocks)

    def fraction(self, *kinds) -> float:
        """Share of complete blocks whose ``(L, s)`` is among ``kinds``."""
        blocks = self.complete_blocks
        if not blocks:
            return 0.0
        return sum(1 for b in blocks if b in kinds) / len(blocks)

    def label(self, limit: int = 12) -> str:
        """Compact text form such as ``1^10 1^11 1^10``."""
        parts = [f"{L}^{s}" for L, s in self.blocks[:limit]]
        if len(self.blocks) > limit:
            parts.append("...")
        return " ".join(parts)

    def to_dict(self):
        return {"blocks": [list(b) for b in self.blocks], "leading": self.leading,
                "lao_threshold": self.lao_threshold,
                "sao_min_prominence": self.sao_min_prominence,
                "window": list(self.window), "undetected": self.undetected,
                "last_complete": self.last_complete, "n_avg": self.n_avg}


def prominences(values, kinds) -> np.ndarray:
    """Height of each maximum over the higher adjacent minimum."""
    values = np.asarray(values, float)
    kinds = np.asarray(kinds)
    out = np.full(values.size, np.nan)
    for i in np.nonzero(kinds == 1)[0]:
        left = values[i - 1] if i > 0 and kinds[i - 1] == -1 else -math.inf
        right = values[i + 1] if i + 1 < values.size and kinds[i + 1] == -1 else -math.inf
        base = max(left, right)
        out[i] = math.inf if base == -math.inf else values[i] - base
    return out


def classify_peaks(values, kinds, lao_threshold=LAO_THRESHOLD,
                   sao_min_prominence=SAO_MIN_PROMINENCE):
    """Label each maximum ``L``, ``s`` or ``None`` (undetected)."""
    prom = prominences(values, kinds)
    labels = []
    for v, k, pr in zip(values, kinds, prom):
        if k != 1:
            continue
        if v > lao_threshold:
            labels.append(LAO)
        elif pr > sao_min_prominence:
            labels.append(SAO)
        else:
            labels.append(None)
    return labels


def blocks_from_labels(labels):
    """Run-length encode ``L``/``s`` labels into ``(leading, blocks)``."""
    seq = [c for c in labels if c is not None]
    leading = 0
    while leading < len(seq) and seq[leading] == SAO:
        leading += 1
    blocks = []
    i = leading
    while i < len(seq):
        L = 0
        while i < len(seq) and seq[i] == LAO:
            L += 1
            i += 1
        s = 0
        while i < len(seq) and seq[i] == SAO:
            s += 1
            i += 1
        blocks.append((L, s))
    return leading, tuple(blocks)


def signature_from_extrema(times, values, kinds, lao_threshold=LAO_THRESHOLD,
                           sao_min_prominence=SAO_MIN_PROMINENCE, window=None):
    """Build an :class:`MmoSignature` from alternating extrema records."""
    times = np.asarray(times, float)
    if not np.any(np.asarray(kinds) == 1):
        raise NoPeaks("no local maxima in the analysed window")
    labels = classify_peaks(values, kinds, lao_threshold, sao_min_prominence)
    leading, blocks = blocks_from_labels(labels)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    # a block is closed once the next LAO has been seen; the final one never is
    return MmoSignature(blocks, leading, float(lao_threshold), float(sao_min_prominence),
                        (float(window[0]), float(window[1])),
                        undetected=sum(1 for c in labels if c is None), last_complete=False)


def mmo_signature(traj: Trajectory, lao_threshold=LAO_THRESHOLD,
                  sao_min_prominence=SAO_MIN_PROMINENCE, after=TRANSIENT,
                  component: int = 0) -> MmoSignature:
    """Signature of the peaks of ``component`` after ``after``.

    Uses the continuous extension when the trajectory is dense, otherwise
    the extrema recorded during integration.
    """
    if traj.t_end <= after:
        raise ValueError(f"trajectory ends at {traj.t_end} before the transient {after}")
    if traj.has_dense:
        t, v, k = local_extrema(traj, component, after)
    else:
        t, v, k = traj.extrema
        m = t > after
        t, v, k = t[m], v[m], k[m]
    return signature_from_extrema(t, v, k, lao_threshold, sao_min_prominence,
                                  (float(after), traj.t_end))
