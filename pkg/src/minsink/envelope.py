"""Upper envelopes of one-kink evacuation lines.

Each input line is zero up to its threshold and an increasing ray
after it.  Within an evacuation family the lines are coupled: a line
with a larger threshold never has a smaller slope (bottleneck
capacities shrink as the subpath grows), so a single left-to-right
sweep with a takeover stack builds the envelope; once a line is
overtaken it never resurfaces.  General segment arrangements are out
of scope here.

The envelope stores breakpoints, per-piece owner rays, and prefix
integrals, which answer point queries and exact integral queries in
O(log N).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernels import ThetaLine


@dataclass
class Envelope:
    """Piecewise description of ``max(0, max_j line_j)`` on [0, z_max].

    Piece p covers ``(breaks[p], breaks[p+1]]`` and is owned by ray
    ``(piece_slope[p], piece_thr[p], piece_off[p])`` evaluating to
    ``slope*(z-thr)+off``; ``owners[p]`` is the owner's vertex index,
    -1 for the leading zero piece.  ``values[p]`` is the envelope value
    at ``breaks[p]`` (left-continuous), ``prefix_integrals[p]`` the
    exact integral from 0 to ``breaks[p]``.
    """

    breaks: np.ndarray
    values: np.ndarray
    owners: np.ndarray
    piece_slope: np.ndarray
    piece_thr: np.ndarray
    piece_off: np.ndarray
    prefix_integrals: np.ndarray
    uniform: bool = False

    @property
    def num_breaks(self) -> int:
        return len(self.breaks)

    def piece_index(self, z: float, side: str = "left") -> int:
        """Index of the piece containing z.

        ``side="left"`` places an exact breakpoint with the piece to
        its left (ownership of half-open intervals ``(b_p, b_{p+1}]``);
        ``side="right"`` treats z as z+epsilon structurally.
        """
        if self.uniform:
            if z <= self.breaks[1] and side == "left":
                return 0
            if z >= self.breaks[-2] and side == "right":
                return len(self.owners) - 1
        kind = "left" if side == "left" else "right"
        p = int(np.searchsorted(self.breaks, z, side=kind))
        if side == "left":
            p -= 1
        else:
            p = min(p, len(self.breaks) - 1) - 1
        return min(max(p, 0), len(self.owners) - 1)

    def ray_value(self, p: int, z: float) -> float:
        """Owner ray of piece p evaluated at z (no zero branch)."""
        if self.owners[p] < 0:
            return 0.0
        return self.piece_slope[p] * (z - self.piece_thr[p]) + self.piece_off[p]

    def value(self, z: float, side: str = "left") -> float:
        return self.ray_value(self.piece_index(z, side), z)

    def integral_to(self, z: float) -> float:
        """Exact integral of the envelope from 0 to z."""
        p = self.piece_index(z, "left")
        base = self.prefix_integrals[p]
        a = self.breaks[p]
        if self.owners[p] < 0 or z <= a:
            return float(base)
        return float(base + _ray_integral(
            self.piece_slope[p], self.piece_thr[p], self.piece_off[p], a, z))


def _ray_integral(slope: float, thr: float, off: float, a: float, b: float) -> float:
    da, db = a - thr, b - thr
    return slope * (db * db - da * da) / 2.0 + off * (b - a)


def build_upper_envelope(lines: Sequence[ThetaLine], z_max: float | None = None) -> Envelope:
    """Sweep the family left to right, maintaining the takeover stack.

    Lines are sorted by (threshold, slope); the family property
    (thresholds and slopes co-monotone) is required and checked.
    """
    if len(lines) == 0:
        raise ValueError("cannot build an envelope from zero lines")
    order = sorted(range(len(lines)), key=lambda q: (lines[q].threshold, lines[q].slope))
    seq = [lines[q] for q in order]
    for a, b in zip(seq, seq[1:]):
        if a.threshold < b.threshold and a.slope > b.slope:
            raise ValueError("line family is not slope/threshold coupled")
    if z_max is None:
        z_max = max(ln.threshold for ln in seq) + 1.0

    # stack entries: (start_z, line); the zero function is the floor.
    # Each new line has the largest slope so far, so it overtakes the
    # envelope at most once and is never overtaken by an older line.
    stack: list[tuple[float, ThetaLine | None]] = [(0.0, None)]
    for ln in seq:
        t = ln.threshold
        if t >= z_max:
            break
        while True:
            start, top = stack[-1]
            if top is None:
                stack.append((t, ln))
                break
            top_val_t = top.slope * (t - top.threshold) + top.offset
            if ln.slope == top.slope:
                if ln.offset <= top_val_t:
                    break  # parallel, never above: drop (keeps smaller owner)
                takeover = t
            else:
                cross = t + (top_val_t - ln.offset) / (ln.slope - top.slope)
                takeover = max(cross, t)
            if takeover >= z_max:
                break
            if takeover > start:
                stack.append((takeover, ln))
                break
            stack.pop()  # top's whole reign is at or after the takeover

    starts = [s for s, _ in stack]
    rays = [ln for _, ln in stack]
    breaks = np.array(starts + [z_max], dtype=np.float64)
    keep = breaks[1:] > breaks[:-1]  # drop zero-width pieces
    if not keep.all():
        rays = [r for r, k in zip(rays, keep) if k]
        starts = [s for s, k in zip(starts, keep) if k]
        breaks = np.array(starts + [z_max], dtype=np.float64)

    m = len(rays)
    owners = np.array([-1 if r is None else r.owner for r in rays], dtype=np.int64)
    slope = np.array([0.0 if r is None else r.slope for r in rays])
    thr = np.array([0.0 if r is None else r.threshold for r in rays])
    off = np.array([0.0 if r is None else r.offset for r in rays])

    values = np.zeros(m + 1)
    prefix = np.zeros(m + 1)
    for p in range(m):
        b = breaks[p + 1]
        if owners[p] >= 0:
            values[p + 1] = slope[p] * (b - thr[p]) + off[p]
            prefix[p + 1] = prefix[p] + _ray_integral(slope[p], thr[p], off[p], breaks[p], b)
        else:
            prefix[p + 1] = prefix[p]
    return Envelope(
        breaks=breaks, values=values, owners=owners,
        piece_slope=slope, piece_thr=thr, piece_off=off,
        prefix_integrals=prefix,
    )


def envelope_owner(env: Envelope, z: float, side: str = "left") -> int:
    """Vertex index owning the envelope at z (-1 on the zero piece)."""
    lo, hi = env.breaks[0], env.breaks[-1]
    if not lo <= z <= hi:
        raise ValueError(f"query {z} outside envelope domain [{lo}, {hi}]")
    return int(env.owners[env.piece_index(z, side)])


def envelope_value(env: Envelope, z: float, side: str = "left") -> float:
    return env.value(z, side)


def envelope_prefix_integral(env: Envelope, z: float) -> float:
    """Integral of the envelope over [0, z], exact for the piecewise form."""
    lo, hi = env.breaks[0], env.breaks[-1]
    if not lo <= z <= hi:
        raise ValueError(f"query {z} outside envelope domain [{lo}, {hi}]")
    return env.integral_to(z)
