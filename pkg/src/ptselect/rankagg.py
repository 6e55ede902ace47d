"""Weighted-footrule rank aggregation.

Rankings are vectors ``ranks`` with ``ranks[i]`` the rank of item i (rank 1 =
best = largest underlying value). Aggregation finds the permutation closest,
in weighted Spearman-footrule distance, to a set of input rankings. Exact
enumeration is used up to ``KMAX_EXACT`` items; beyond that a cross-entropy
Monte Carlo search over permutations is available.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, TooLarge

__all__ = [
    "RankedList",
    "AggregationProblem",
    "footrule",
    "aggregate_exact",
    "exact_minimizers",
    "aggregate_ce",
    "ranks_from_values",
    "psi",
    "KMAX_EXACT",
]

KMAX_EXACT = 8
# Absolute tolerance for value ties (rank assignment) and psi ties
# (minimizer selection); exact floating ties are rare but the tie rule is
# randomized by contract.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class RankedList:
    """A dense ranking of K items together with their underlying values."""

    ranks: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        k = len(self.ranks)
        if sorted(self.ranks) != list(range(1, k + 1)):
            raise ValueError("ranks must be a permutation of 1..K")
        if len(self.values) != k:
            raise ValueError("values must match ranks in length")

    @property
    def k(self) -> int:
        return len(self.ranks)

    def item_of_rank(self, q: int) -> int:
        return self.ranks.index(q)


@dataclass(frozen=True)
class AggregationProblem:
    lists: tuple[RankedList, ...]
    weights: tuple[float, ...]
    rho: float = 1.0

    def __post_init__(self):
        if not self.lists:
            raise ValueError("need at least one ranked list")
        k = self.lists[0].k
        if any(lst.k != k for lst in self.lists):
            raise LengthMismatch("all ranked lists must share the same length")
        if len(self.weights) != len(self.lists):
            raise LengthMismatch("one weight per ranked list required")
        if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
            raise ValueError("weights must be nonnegative with positive sum")
        if self.rho <= 0:
            raise ValueError("rho must be positive")

    @property
    def k(self) -> int:
        return self.lists[0].k


def footrule(candidate, ranked: RankedList, rho: float = 1.0) -> float:
    """Weighted Spearman footrule between a candidate ranking and a data one.

    Position by position, the rank gap |candidate_i - ranks_i| is weighted by
    the gap, raised to rho, between the data values of the items holding
    those two ranks in the data list.
    """
    k = ranked.k
    if len(candidate) != k:
        raise LengthMismatch(f"candidate has length {len(candidate)}, expected {k}")
    value_of_rank = [0.0] * (k + 1)
    for item, q in enumerate(ranked.ranks):
        value_of_rank[q] = ranked.values[item]
    total = 0.0
    for item in range(k):
        vc, vr = candidate[item], ranked.ranks[item]
        total += abs(vc - vr) * abs(value_of_rank[vc] - value_of_rank[vr]) ** rho
    return total


def psi(problem: AggregationProblem, candidate) -> float:
    """Weighted total footrule distance of a candidate to all input lists."""
    return sum(
        w * footrule(candidate, lst, problem.rho)
        for w, lst in zip(problem.weights, problem.lists)
    )


def exact_minimizers(problem: AggregationProblem) -> tuple[float, list[tuple[int, ...]]]:
    """Enumerate all K! candidates; return the minimal psi and its achievers."""
    k = problem.k
    if k > KMAX_EXACT:
        raise TooLarge(f"K={k} exceeds the exact-search budget of {KMAX_EXACT}")
    best = math.inf
    argmins: list[tuple[int, ...]] = []
    for perm in itertools.permutations(range(1, k + 1)):
        val = psi(problem, perm)
        if val < best - TIE_TOL:
            best = val
            argmins = [perm]
        elif val <= best + TIE_TOL:
            argmins.append(perm)
    return best, argmins


def aggregate_exact(problem: AggregationProblem, rng: np.random.Generator) -> tuple[int, ...]:
    """Globally minimal ranking; ties broken uniformly at random."""
    _, argmins = exact_minimizers(problem)
    if len(argmins) == 1:
        return argmins[0]
    return argmins[int(rng.integers(len(argmins)))]


def _sample_permutation(probs: np.ndarray, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw a ranking by filling rank slots 1..K from an item-by-rank matrix."""
    k = probs.shape[0]
    ranks = [0] * k
    unused = list(range(k))
    for slot in range(k):
        p = np.array([probs[i, slot] for i in unused])
        s = p.sum()
        if s <= 0:
            idx = int(rng.integers(len(unused)))
        else:
            idx = int(rng.choice(len(unused), p=p / s))
        item = unused.pop(idx)
        ranks[item] = slot + 1
    return tuple(ranks)


def aggregate_ce(
    problem: AggregationProblem,
    rng: np.random.Generator,
    iters: int = 50,
    sample_size: int | None = None,
    elite_frac: float = 0.1,
    smoothing: float = 0.7,
    stagnation_limit: int = 10,
) -> tuple[int, ...]:
    """Cross-entropy Monte Carlo minimization of psi over permutations.

    Maintains a K x K item-by-rank sampling matrix, draws ``sample_size``
    rankings per iteration, and pulls the matrix toward the empirical
    distribution of the elite fraction. Returns the best ranking ever seen;
    solution quality is bounded by the budget, not guaranteed.
    """
    k = problem.k
    if k < 2:
        raise ValueError("need at least two items")
    n = sample_size if sample_size is not None else 10 * k * k
    n_elite = max(1, int(math.ceil(elite_frac * n)))

    probs = np.full((k, k), 1.0 / k)
    best_perm: tuple[int, ...] | None = None
    best_val = math.inf
    stagnant = 0
    for _ in range(iters):
        samples = [_sample_permutation(probs, rng) for _ in range(n)]
        vals = np.array([psi(problem, s) for s in samples])
        order = np.argsort(vals, kind="stable")
        if vals[order[0]] < best_val:
            best_val = float(vals[order[0]])
            best_perm = samples[order[0]]
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= stagnation_limit:
                break
        freq = np.zeros((k, k))
        for idx in order[:n_elite]:
            for item, q in enumerate(samples[idx]):
                freq[item, q - 1] += 1.0
        freq /= n_elite
        probs = (1.0 - smoothing) * probs + smoothing * freq
    assert best_perm is not None
    return best_perm


def ranks_from_values(
    values, rng: np.random.Generator, direction: str = "larger", tie_tol: float = TIE_TOL
) -> RankedList:
    """Dense ranking of values; rank 1 goes to the best value.

    ``direction="larger"`` ranks the largest value first. Ties (within
    ``tie_tol``) receive their block of ranks in uniformly random order.
    """
    vals = np.asarray(values, dtype=float)
    if vals.size < 1 or not np.all(np.isfinite(vals)):
        raise ValueError("values must be nonempty and finite")
    if direction not in ("larger", "smaller"):
        raise ValueError(f"unknown direction {direction!r}")
    key = -vals if direction == "larger" else vals
    order = np.argsort(key, kind="stable")

    ranks = [0] * vals.size
    next_rank = 1
    i = 0
    while i < vals.size:
        j = i
        while j + 1 < vals.size and abs(key[order[j + 1]] - key[order[i]]) <= tie_tol:
            j += 1
        block = list(order[i : j + 1])
        if len(block) > 1:
            rng.shuffle(block)
        for item in block:
            ranks[int(item)] = next_rank
            next_rank += 1
        i = j + 1
    return RankedList(ranks=tuple(ranks), values=tuple(float(v) for v in vals))
