"""Two-way number partitioning: complete greedy search, greedy, brute force."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .interference import CoherentTerms, PhaseAssignment, PhasePartition

BRUTEFORCE_MAX_N = 24


@dataclass(frozen=True)
class PartitionInstance:
    values: tuple[float, ...]
    epsilon: float | None = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("partition instance needs at least one value")
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise ValueError("partition values must be finite and nonnegative")
        object.__setattr__(self, "values", values)
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", 1e-9 * sum(values))
        elif self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass(frozen=True)
class PartitionSolution:
    set1: tuple[int, ...]
    set2: tuple[int, ...]
    difference: float
    nodes_explored: int = 0
    terminated_by: str = "exhausted"

    def swapped(self) -> "PartitionSolution":
        return PartitionSolution(self.set2, self.set1, self.difference, self.nodes_explored, self.terminated_by)


def _solution(values, side, nodes, how) -> PartitionSolution:
    set1 = tuple(i for i, s in enumerate(side) if s == 0)
    set2 = tuple(i for i, s in enumerate(side) if s == 1)
    diff = abs(sum(values[i] for i in set1) - sum(values[i] for i in set2))
    return PartitionSolution(set1, set2, diff, nodes, how)


@dataclass
class _Search:
    values: list[float]
    order: list[int]
    remaining: list[float]
    epsilon: float
    prune: bool
    side: list[int] = field(default_factory=list)
    best: float = math.inf
    best_side: list[int] | None = None
    nodes: int = 0
    stop: str | None = None

    def record(self, diff: float, side: list[int], how: str) -> None:
        if diff < self.best:
            self.best, self.best_side = diff, list(side)
        if self.prune and diff < self.epsilon:
            self.stop = how

    def visit(self, m: int, s1: float, s2: float) -> None:
        self.nodes += 1
        n = len(self.order)
        if m == n:
            self.record(abs(s1 - s2), self.side, "perfect")
            return
        gap = abs(s1 - s2)
        lower = 0 if s1 <= s2 else 1
        if self.prune:
            # condition 2: what is left cannot close the gap, so the lower set takes all of it
            if gap >= self.remaining[m]:
                for level in range(m, n):
                    self.side[self.order[level]] = lower
                self.record(gap - self.remaining[m], self.side, "prune_condition_2")
                return
            if m == n - 1:
                self.side[self.order[m]] = lower
                self.record(abs(gap - self.values[self.order[m]]), self.side, "perfect")
                return
        branches = (lower, 1 - lower)
        if self.prune and gap == 0:
            # condition 3: both sides are equivalent
            branches = (lower,)
        v = self.values[self.order[m]]
        for b in branches:
            self.side[self.order[m]] = b
            if b == 0:
                self.visit(m + 1, s1 + v, s2)
            else:
                self.visit(m + 1, s1, s2 + v)
            if self.stop:
                return


def solve_cga(instance: PartitionInstance, prune: bool = True) -> PartitionSolution:
    """Complete greedy depth-first search over set assignments.

    Values are taken largest first and each level tries the currently
    lighter set before the heavier one, so the first leaf is the greedy
    answer. With ``prune=False`` every assignment is enumerated; the returned
    difference is the same, only ``nodes_explored`` changes.
    """
    values = list(instance.values)
    n = len(values)
    order = sorted(range(n), key=lambda i: -values[i])
    remaining = [0.0] * (n + 1)
    for level in range(n - 1, -1, -1):
        remaining[level] = remaining[level + 1] + values[order[level]]
    search = _Search(values, order, remaining, instance.epsilon, prune, side=[0] * n)
    search.visit(0, 0.0, 0.0)
    return _solution(values, search.best_side, search.nodes, search.stop or "exhausted")


def solve_greedy(instance: PartitionInstance) -> PartitionSolution:
    """Largest first, each value into the lighter set (ties go to set 1)."""
    values = instance.values
    side = [0] * len(values)
    s = [0.0, 0.0]
    for i in sorted(range(len(values)), key=lambda i: -values[i]):
        target = 0 if s[0] <= s[1] else 1
        side[i] = target
        s[target] += values[i]
    return _solution(values, side, len(values), "exhausted")


def solve_bruteforce(instance: PartitionInstance) -> PartitionSolution:
    """Exact minimum over every split, with value 0 pinned to set 1."""
    values = np.asarray(instance.values)
    n = len(values)
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force limited to {BRUTEFORCE_MAX_N} values, got {n}")
    total = values.sum()
    best, best_mask = math.inf, 0
    free = n - 1
    chunk = 1 << min(free, 16)
    bits = np.arange(free)
    for start in range(0, 1 << free, chunk):
        masks = np.arange(start, min(start + chunk, 1 << free))
        in_set2 = (masks[:, None] >> bits) & 1
        s2 = in_set2 @ values[1:]
        diff = np.abs(total - 2.0 * s2)
        i = int(np.argmin(diff))
        if diff[i] < best:
            best, best_mask = float(diff[i]), int(masks[i])
    side = [0] + [(best_mask >> b) & 1 for b in range(free)]
    return _solution(instance.values, side, 1 << free, "exhausted")


def instance_from_terms(terms: CoherentTerms, epsilon: float | None = None) -> PartitionInstance:
    """Magnitudes ``[|A|, |B_k| for k in subset]``; position 0 is the ``A`` term."""
    return PartitionInstance((terms.abs_a, *(terms.abs_b(k) for k in terms.subset)), epsilon)


def to_phase_partition(solution: PartitionSolution, terms: CoherentTerms) -> PhasePartition:
    """Map a solved instance back to relay groups; the set holding ``A`` is in-phase."""
    if 0 not in solution.set1:
        solution = solution.swapped()
    subset = terms.subset
    in_phase = [subset[i - 1] for i in solution.set1 if i != 0]
    anti_phase = [subset[i - 1] for i in solution.set2]
    return PhasePartition.from_sets(terms, in_phase, anti_phase)


def partition_to_phases(solution: PartitionSolution, terms: CoherentTerms) -> PhaseAssignment:
    """Relay rotations that align in-phase relays with ``A`` and point anti-phase relays opposite it."""
    if 0 not in solution.set1:
        raise ValueError("the A term (index 0) must be in set1")
    subset = terms.subset
    phase_a = terms.phase_a
    phi = {}
    for i in solution.set1:
        if i != 0:
            k = subset[i - 1]
            phi[k] = terms.phase_b(k) - phase_a
    for i in solution.set2:
        k = subset[i - 1]
        phi[k] = terms.phase_b(k) - phase_a + math.pi
    return PhaseAssignment(phi)


def phases_for(partition: PhasePartition, terms: CoherentTerms) -> PhaseAssignment:
    phase_a = terms.phase_a
    phi = {k: terms.phase_b(k) - phase_a for k in partition.in_phase}
    phi |= {k: terms.phase_b(k) - phase_a + math.pi for k in partition.anti_phase}
    return PhaseAssignment(phi)


def best_partition(values: Sequence[float], epsilon: float | None = None) -> PartitionSolution:
    return solve_cga(PartitionInstance(tuple(values), epsilon))
