"""Comparison-principle and zero-number diagnostics (pure functions)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Field
from .evolve import Trajectory


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of ``check_comparison``.

    ``first_violation`` is ``(t, x, lower - upper)`` at the first stored time
    where ``lower > upper + mesh_tol``, or ``None``.
    """

    holds: bool
    min_gap: float
    first_violation: tuple[float, float, float] | None
    times_checked: int

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "min_gap": self.min_gap,
            "first_violation": self.first_violation,
            "times_checked": self.times_checked,
        }


def check_comparison(lower: Trajectory, upper: Trajectory, mesh_tol: float = 1e-6) -> ComparisonReport:
    """Verify ``lower <= upper + mesh_tol`` at every common stored time."""
    if lower.grid.n != upper.grid.n or not np.allclose(lower.grid.nodes, upper.grid.nodes):
        raise ValueError("trajectories must share a grid")
    common, ia, ib = np.intersect1d(np.round(lower.times, 12), np.round(upper.times, 12), return_indices=True)
    x = lower.grid.nodes
    min_gap = np.inf
    first = None
    for t, i, j in zip(common, ia, ib):
        gap = upper.values[j] - lower.values[i]
        k = int(np.argmin(gap))
        min_gap = min(min_gap, float(gap[k]))
        if first is None and gap[k] < -mesh_tol:
            first = (float(t), float(x[k]), float(-gap[k]))
    return ComparisonReport(first is None, float(min_gap), first, len(common))


@dataclass(frozen=True)
class ZeroCount:
    """Sign changes of a sampled function.

    ``count`` is ``None`` for a degenerate (identically zero) input.
    ``simple`` is false when a near-zero stretch is touched without a sign change.
    """

    t: float
    count: int | None
    simple: bool
    degenerate: bool = False


def zero_count(v, tol: float = 1e-9, t: float = 0.0) -> ZeroCount:
    """Count sign changes of ``v``, ignoring samples with ``|v| < tol * max|v|``."""
    vals = v.values if isinstance(v, Field) else np.asarray(v, dtype=float)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    if scale == 0.0:
        return ZeroCount(t, None, False, True)
    thr = tol * scale
    big = np.abs(vals) >= thr
    s = np.sign(vals[big])
    count = int(np.count_nonzero(s[1:] != s[:-1]))
    simple = True
    # near-zero runs: a run flanked by equal signs is a touching (multiple) zero
    small = ~big
    if np.any(small):
        edges = np.flatnonzero(np.diff(np.concatenate([[0], small.astype(int), [0]])))
        for a, b in zip(edges[::2], edges[1::2]):
            left = vals[a - 1] if a > 0 else None
            right = vals[b] if b < len(vals) else None
            if left is not None and right is not None and np.sign(left) == np.sign(right):
                simple = False
    return ZeroCount(t, count, simple, False)


def zero_history(a: Trajectory, b: Trajectory, tol: float = 1e-9) -> list[ZeroCount]:
    """Zero counts of ``a - b`` at common stored times."""
    common, ia, ib = np.intersect1d(np.round(a.times, 12), np.round(b.times, 12), return_indices=True)
    return [zero_count(a.values[i] - b.values[j], tol, float(t)) for t, i, j in zip(common, ia, ib)]


def is_nonincreasing(history: list[ZeroCount]) -> bool:
    counts = [z.count for z in history if z.count is not None]
    return all(x >= y for x, y in zip(counts, counts[1:]))
