"""The swarm stack: a bounded, value-sorted set of best distinct points.

"Distinct" is governed by the equivalence radius: candidates closer than
``r_eq`` (D1 norm) to an existing entry count as the same solution, and only
the best instance of an equivalent group is kept.  When the stack is full the
worst entry makes room for a better candidate ("better in worst out").  The
radius shrinks with temperature so the swarm stays spread out early and may
concentrate around the surviving optima late.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def equivalence_radius(t: float, dim: int) -> float:
    """D1 equivalence radius at temperature t: dim * (0.01 + 0.09 * t)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"temperature must be in [0, 1], got {t}")
    return dim * (0.01 + 0.09 * t)


@dataclass(frozen=True, eq=False)
class RatedPoint:
    """A normalized-space position with its objective value.

    Equality stays identity-based: positions are numpy arrays and two
    distinct evaluations are distinct events even at equal coordinates.
    """

    position: np.ndarray
    value: float
    eval_index: int = 0

    def sort_key(self) -> tuple[float, int]:
        return (self.value, self.eval_index)


class InsertOutcome(enum.Enum):
    INSERTED = "inserted"
    REPLACED_EQUIVALENT = "replaced_equivalent"
    REJECTED_EQUIVALENT = "rejected_equivalent"
    REJECTED_FULL = "rejected_full"
    # Listed for interface completeness: the current policy folds the
    # "worse than everything, stack full" case into REJECTED_FULL.
    REJECTED_WORSE = "rejected_worse"
    REJECTED_NONFINITE = "rejected_nonfinite"


class Stack:
    """Ascending-sorted bounded stack of distinct rated points."""

    def __init__(self, capacity: int, r_eq: float):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        if r_eq < 0.0:
            raise ValueError(f"r_eq must be >= 0, got {r_eq}")
        self.capacity = capacity
        self.r_eq = r_eq
        self.entries: list[RatedPoint] = []
        self._positions = None  # lazily rebuilt (len(entries), dim) matrix

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def best(self) -> RatedPoint:
        return self.entries[0]

    @property
    def worst(self) -> RatedPoint:
        return self.entries[-1]

    def positions_matrix(self) -> np.ndarray:
        if self._positions is None:
            self._positions = np.array([e.position for e in self.entries])
        return self._positions

    def _equivalent_indices(self, position: np.ndarray) -> list[int]:
        if not self.entries:
            return []
        d1 = np.abs(self.positions_matrix() - position).sum(axis=1)
        return np.nonzero(d1 < self.r_eq)[0].tolist()

    def _insert_sorted(self, candidate: RatedPoint) -> None:
        key = candidate.sort_key()
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid].sort_key() <= key:
                lo = mid + 1
            else:
                hi = mid
        self.entries.insert(lo, candidate)
        self._positions = None

    def try_insert(self, candidate: RatedPoint) -> InsertOutcome:
        """Offer a candidate; the stack keeps its invariants either way.

        Within the equivalence radius the candidate must strictly beat the
        best of its equivalent group, in which case the whole group is
        replaced.  Otherwise it is placed by value; a full stack drops its
        worst entry, which is the candidate itself when nothing is worse.
        """
        if not math.isfinite(candidate.value):
            return InsertOutcome.REJECTED_NONFINITE
        eq = self._equivalent_indices(candidate.position)
        if eq:
            group_best = min(self.entries[i].value for i in eq)
            if candidate.value < group_best:
                for i in sorted(eq, reverse=True):
                    del self.entries[i]
                self._positions = None
                self._insert_sorted(candidate)
                return InsertOutcome.REPLACED_EQUIVALENT
            return InsertOutcome.REJECTED_EQUIVALENT
        if len(self.entries) >= self.capacity:
            if candidate.sort_key() >= self.worst.sort_key():
                return InsertOutcome.REJECTED_FULL
            self.entries.pop()
            self._insert_sorted(candidate)
            return InsertOutcome.INSERTED
        self._insert_sorted(candidate)
        return InsertOutcome.INSERTED

    def check_invariants(self) -> None:
        """Assert sortedness, capacity and pairwise distinctness (test aid)."""
        assert len(self.entries) <= self.capacity
        keys = [e.sort_key() for e in self.entries]
        assert keys == sorted(keys)
        for i in range(len(self.entries)):
            for j in range(i + 1, len(self.entries)):
                d = float(np.abs(self.entries[i].position
                                 - self.entries[j].position).sum())
                assert d >= self.r_eq


@dataclass(frozen=True)
class StackMetrics:
    """Dispersion and fitness diagnostics of one stack."""

    stat_dist: float
    stat_params: float
    disp_score: float
    fmt_score: float
    stack_score: float


def sqrt_mean_score(pair_distances: Sequence[float], n_points: int) -> float:
    """Square of the mean square root over all ordered point pairs.

    ``pair_distances`` holds each unordered pair once; doubling both the sum
    and the count leaves the mean unchanged, so the unordered form is used.
    A generalized mean with exponent 1/2 penalizes point sets that collapse
    into few loci, which the quadratic mean cannot see.
    """
    n_pairs = n_points * (n_points - 1) / 2
    if n_pairs < 1:
        return 0.0
    mean_root = sum(math.sqrt(d) for d in pair_distances) / n_pairs
    return mean_root * mean_root


def stat_dist(stack: Stack) -> float:
    """Dispersion of the stack under the D1 norm (0 for fewer than 2 points)."""
    n = len(stack.entries)
    if n < 2:
        return 0.0
    pos = stack.positions_matrix()
    dists = []
    for i in range(n - 1):
        dists.extend(np.abs(pos[i + 1:] - pos[i]).sum(axis=1).tolist())
    return sqrt_mean_score(dists, n)


def stat_params(stack: Stack) -> float:
    """Harmonic mean of per-coordinate standard deviations; 0 if any is 0."""
    n = len(stack.entries)
    if n < 2:
        return 0.0
    sds = stack.positions_matrix().std(axis=0)
    if np.any(sds == 0.0):
        return 0.0
    return sds.size / float((1.0 / sds).sum())


def disp_score(stack: Stack) -> float:
    return (math.sqrt(stat_dist(stack)) + math.sqrt(stat_params(stack))) / 2.0


def fmt_score(stack: Stack, alpha: float) -> float:
    """Exponential moving average of entry merits, worst to best.

    Merit is the negated objective value (the stack minimizes), so a healthy
    stack pushes this score upward.  The EMA walks from the worst entry to
    the best, leaving the best entries with the largest weight.
    """
    if not stack.entries:
        raise ValueError("fmt_score of an empty stack")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    ema = -stack.entries[-1].value
    for entry in reversed(stack.entries[:-1]):
        ema = alpha * (-entry.value) + (1.0 - alpha) * ema
    return ema


def stack_score(stack: Stack, alpha: float) -> StackMetrics:
    """All five stack metrics; the overall score couples fitness and spread."""
    sd = stat_dist(stack)
    sp = stat_params(stack)
    disp = (math.sqrt(sd) + math.sqrt(sp)) / 2.0
    fmt = fmt_score(stack, alpha)
    return StackMetrics(stat_dist=sd, stat_params=sp, disp_score=disp,
                        fmt_score=fmt, stack_score=fmt * (1.0 + disp))


def default_ema_alpha(capacity: int) -> float:
    """EMA coefficient with span equal to the stack length."""
    return 2.0 / (capacity + 1)


def merge_stacks(stacks: Iterable[Stack], capacity: int, r_eq: float) -> Stack:
    """Merge trial stacks into one, keeping the best distinct solutions.

    Every entry is offered to a fresh stack in ascending (value, eval_index)
    order, so the result is independent of trial completion order.
    """
    merged = Stack(capacity, r_eq)
    entries = sorted((e for s in stacks for e in s.entries),
                     key=RatedPoint.sort_key)
    for entry in entries:
        merged.try_insert(entry)
    return merged


def stack_to_rows(stack: Stack) -> list[tuple[int, float, list[float]]]:
    """Row-oriented view (rank, value, coordinates), best first."""
    return [(rank, e.value, e.position.tolist())
            for rank, e in enumerate(stack.entries)]


def rows_to_stack(rows, capacity: int, r_eq: float) -> Stack:
    """Rebuild a stack from serialized rows (positions taken verbatim)."""
    stack = Stack(capacity, r_eq)
    for rank, value, coords in rows:
        stack.entries.append(RatedPoint(np.asarray(coords, dtype=float),
                                        float(value), int(rank)))
    stack._positions = None
    return stack
