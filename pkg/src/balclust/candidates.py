"""Candidate-center generation behind a pluggable interface.

Two generators ship: the farthest-point seed set (k-center) and a
distance-proportional oversampling scheme producing O(k) centers for the
median/means pipelines. Any object with the same ``generate`` signature can
be plugged into the solvers, e.g. a stronger sampling-based candidate set.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import InputError, as_oracle
from .kcenter import gonzalez

TUPLE_CAP = 1 << 20


def bicriteria_centers(
    source,
    k: int,
    seed: int = 0,
    objective: str = "median",
    oversample: int = 8,
) -> tuple[np.ndarray, float]:
    """Sequential sampling of up to ``oversample * k`` centers, each drawn
    with probability proportional to its current distance (squared distance
    for the sum-of-squares objective) to the chosen set.

    Returns the chosen point indices and the unconstrained clustering cost of
    the final set (diagnostic). Sampling stops early once every point
    coincides with a chosen center; the result always has at least k entries.
    """
    oracle = as_oracle(source)
    n = oracle.n
    if k > n:
        raise InputError(f"need k <= n, got k={k}, n={n}")
    target = max(k, min(n, oversample * k))
    rng = np.random.default_rng(seed)
    power = 2 if objective == "means" else 1

    first = int(rng.integers(n))
    chosen = [first]
    mind = oracle.columns([first])[:, 0].copy()
    while len(chosen) < target:
        weights = mind**power
        total = float(weights.sum())
        if total <= 0.0:
            break
        nxt = int(rng.choice(n, p=weights / total))
        chosen.append(nxt)
        np.minimum(mind, oracle.columns([nxt])[:, 0], out=mind)
    while len(chosen) < k:  # fewer distinct locations than k: pad with repeats
        chosen.append(chosen[0])
    cost = float((mind**power).sum())
    return np.asarray(chosen, dtype=np.int64), cost


def enumerate_tuples(candidates, k: int, cap: int = TUPLE_CAP):
    """Lexicographic stream of all |C|^k k-tuples of candidate positions
    (Cartesian product, so repetition inside a tuple is allowed)."""
    m = candidates if isinstance(candidates, (int, np.integer)) else len(candidates)
    if m < 1:
        raise InputError("need at least one candidate center")
    if m**k > cap:
        raise InputError(
            f"candidate tuple space {m}^{k} exceeds the cap of {cap}; "
            f"reduce k or the candidate oversampling factor"
        )
    return itertools.product(range(int(m)), repeat=k)


class CandidateGenerator:
    """Deterministic producer of candidate center indices for a given seed."""

    name = "base"

    def generate(self, source, k: int, objective: str) -> np.ndarray:
        raise NotImplementedError


class GonzalezGenerator(CandidateGenerator):
    """Exactly the k farthest-point seeds; tuple space is their k-fold product."""

    name = "gonzalez"

    def __init__(self, first_index: int = 0):
        self.first_index = int(first_index)

    def generate(self, source, k: int, objective: str) -> np.ndarray:
        return gonzalez(source, k, self.first_index).indices


class BicriteriaGenerator(CandidateGenerator):
    name = "bicriteria"

    def __init__(self, seed: int = 0, oversample: int = 8):
        self.seed = int(seed)
        self.oversample = int(oversample)
        self.last_cost: float | None = None

    def generate(self, source, k: int, objective: str) -> np.ndarray:
        centers, cost = bicriteria_centers(source, k, self.seed, objective, self.oversample)
        self.last_cost = cost
        return centers
