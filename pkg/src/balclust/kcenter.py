"""Balanced k-center: farthest-point seeding, a candidate radius ladder, and
a binary-searched feasibility probe per center tuple.

The optimal radius of any tuple is one of the point-to-candidate distances,
and tuple feasibility is monotone in the radius, which licenses the binary
search over the sorted, deduplicated ladder.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    BalanceBounds,
    BalancedAssignment,
    ClusteringResult,
    EuclideanOracle,
    InputError,
    StructureError,
    as_oracle,
    evaluate_objective,
    round_robin_assignment,
)
from . import kernels
from .flow import FlowNetwork, FlowSolution, coverage_network, max_flow
from .regions import RegionTable, build_coverage_regions, coverage_region_counts
from .rounding import round_to_integral

TUPLE_CAP = 1 << 20


@dataclass(frozen=True)
class SeedSequence:
    """Ordered farthest-point seeds; each seed after the first maximizes the
    minimum distance to the ones before it (ties to the lowest index)."""

    indices: np.ndarray
    first_index: int
    #: max-min distance a (k+1)-th pick would have; 2-approximates the
    #: unconstrained optimal radius.
    next_min_distance: float


def gonzalez(source, k: int, first_index: int | None = 0, seed: int | None = None) -> SeedSequence:
    """Farthest-point traversal; O(nk) distance reads.

    The start is ``first_index``, or a seeded random point when it is None.
    """
    oracle = as_oracle(source)
    n = oracle.n
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if first_index is None:
        first_index = int(np.random.default_rng(seed).integers(n))
    if not 0 <= first_index < n:
        raise InputError(f"first_index {first_index} out of range for n={n}")
    if isinstance(oracle, EuclideanOracle):
        idx, mind = kernels.farthest_point_order(oracle.point_set.points, k, first_index)
    else:
        idx = np.empty(k, np.int64)
        mind = np.full(n, np.inf)
        selected = np.zeros(n, dtype=bool)
        cur = int(first_index)
        for step in range(k):
            idx[step] = cur
            selected[cur] = True
            np.minimum(mind, oracle.columns([cur])[:, 0], out=mind)
            if step + 1 < k:
                cur = int(np.argmax(np.where(selected, -1.0, mind)))
    idx.setflags(write=False)
    return SeedSequence(indices=idx, first_index=int(first_index), next_min_distance=float(mind.max()))


def radius_ladder(table: np.ndarray) -> np.ndarray:
    """Sorted, deduplicated candidate radii (all point-to-candidate distances)."""
    return np.unique(table)


def check_feasible(table: np.ndarray, r: float, bounds: BalanceBounds) -> FlowSolution | None:
    """Feasibility of radius r for the k centers behind ``table`` (their n x k
    distance columns): coverage regions, then a zero-cost max flow. Feasible
    iff the flow routes all n points."""
    counted = coverage_region_counts(table, r)
    if counted is None:
        return None
    keys, counts = counted
    net = coverage_network(keys, counts, table.shape[1], bounds.lower, bounds.upper)
    return max_flow(net)


def expand_assignment(
    solution: FlowSolution,
    net: FlowNetwork,
    regions: RegionTable,
    bounds: BalanceBounds,
) -> BalancedAssignment:
    """Turn integral region flows into per-point labels.

    Members of a region are consumed in ascending index order, filling the
    region's clusters in ascending cluster order (a deterministic version of
    "pick any x points from the region").
    """
    if regions.members is None:
        raise InputError("expansion needs a region table built with member lists")
    if not solution.is_integral():
        raise StructureError("expansion requires an integral flow")
    flows = np.rint(solution.flows).astype(np.int64)
    n = regions.total
    labels = np.full(n, -1, dtype=np.int64)
    cursor = np.zeros(regions.num_regions, dtype=np.int64)
    for e in range(net.num_edges):
        f = int(flows[e])
        if f == 0:
            continue
        r = int(net.edge_region[e])
        j = int(net.edge_cluster[e])
        members = regions.members[r]
        take = members[cursor[r] : cursor[r] + f]
        if take.size != f:
            raise StructureError("edge flow exceeds remaining region members")
        labels[take] = j
        cursor[r] += f
    if np.any(cursor != regions.counts) or np.any(labels < 0):
        raise StructureError("region flows do not cover all points exactly")
    return BalancedAssignment.from_labels(labels, net.k, bounds)


def _all_tuples(m: int, k: int):
    if m**k > TUPLE_CAP:
        raise InputError(
            f"tuple space {m}^{k} exceeds the cap of {TUPLE_CAP}; reduce k or the candidate count"
        )
    return list(itertools.product(range(m), repeat=k))


def _search_tuples(table, ladder, tuple_list, bounds, start_order):
    """Smallest feasible (ladder index, order, tuple) over a tuple chunk,
    pruning each binary search below the chunk's best so far."""
    best = None
    probes = 0
    for offset, tup in enumerate(tuple_list):
        cols = np.ascontiguousarray(table[:, tup])
        lo = 0
        hi = (best[0] - 1) if best is not None else len(ladder) - 1
        found = None
        while lo <= hi:
            mid = (lo + hi) // 2
            probes += 1
            if check_feasible(cols, float(ladder[mid]), bounds) is not None:
                found = mid
                hi = mid - 1
            else:
                lo = mid + 1
        if found is not None:
            best = (found, start_order + offset, tup)
    return best, probes


def solve_kbcenter(
    source,
    k: int,
    bounds: BalanceBounds,
    first_index: int | None = 0,
    seed: int | None = None,
    centers=None,
    tuples=None,
    threads: int = 1,
) -> ClusteringResult:
    """Balanced k-center solve.

    Candidate centers default to the k farthest-point seeds; every k-tuple
    over the candidates (with repetition) is binary-searched for its smallest
    feasible radius and the best tuple's flow is expanded to point labels.
    ``tuples`` restricts the searched tuple space (tuples of candidate
    positions); ``centers`` overrides the candidate set with explicit point
    indices.
    """
    oracle = as_oracle(source)
    n = oracle.n
    bounds.validate(n, k)
    if centers is None:
        seeds = gonzalez(oracle, k, first_index, seed=seed)
        candidate_idx = seeds.indices
    else:
        candidate_idx = np.asarray(centers, dtype=np.int64)
        if candidate_idx.ndim != 1 or candidate_idx.size == 0:
            raise InputError("centers must be a non-empty 1-d list of point indices")
    m = int(candidate_idx.size)
    table = oracle.columns(candidate_idx)
    ladder = radius_ladder(table)
    diagnostics: dict = {
        "candidates": candidate_idx.tolist(),
        "ladder_size": int(ladder.size),
    }

    if ladder[-1] <= 0.0:
        # All candidate distances are zero: any balanced split costs zero.
        assignment = round_robin_assignment(n, k, bounds)
        chosen = candidate_idx[np.zeros(k, dtype=np.int64)]
        diagnostics.update({"degenerate": True, "tuples_evaluated": 0, "probes": 0})
        return ClusteringResult(
            objective="center",
            k=k,
            bounds=bounds,
            centers=chosen,
            assignment=assignment,
            value=0.0,
            diagnostics=diagnostics,
        )

    if tuples is None:
        tuple_list = _all_tuples(m, k)
    else:
        tuple_list = [tuple(int(p) for p in tup) for tup in tuples]
        for tup in tuple_list:
            if len(tup) != k or any(not 0 <= p < m for p in tup):
                raise InputError(f"tuple {tup} is not a valid k-tuple of candidate positions")
        if not tuple_list:
            raise InputError("empty tuple list")

    if threads > 1 and len(tuple_list) > 1:
        workers = min(threads, len(tuple_list))
        chunks = np.array_split(np.arange(len(tuple_list)), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_search_tuples, table, ladder, [tuple_list[i] for i in chunk], bounds, int(chunk[0]))
                for chunk in chunks
                if chunk.size
            ]
            results = [f.result() for f in futures]
        probes = sum(p for _, p in results)
        candidates = [b for b, _ in results if b is not None]
        best = min(candidates, key=lambda b: (b[0], b[1])) if candidates else None
    else:
        best, probes = _search_tuples(table, ladder, tuple_list, bounds, 0)

    if best is None:
        raise StructureError("no feasible radius found despite validated bounds")
    ladder_idx, order, tup = best
    search_radius = float(ladder[ladder_idx])
    cols = np.ascontiguousarray(table[:, tup])
    regions = build_coverage_regions(cols, search_radius, with_members=True)
    if regions is None:
        raise StructureError("winning radius failed region construction")
    net = coverage_network(regions.keys, regions.counts, k, bounds.lower, bounds.upper)
    solution = max_flow(net)
    if solution is None:
        raise StructureError("winning radius failed the feasibility re-solve")
    solution = round_to_integral(solution, net, mode="feasibility")
    assignment = expand_assignment(solution, net, regions, bounds)
    chosen = candidate_idx[list(tup)]
    value = evaluate_objective(assignment, chosen, oracle, "center")
    diagnostics.update(
        {
            "tuples_evaluated": len(tuple_list),
            "probes": probes,
            "best_tuple_positions": list(tup),
            "best_tuple_order": order,
            "search_radius": search_radius,
            "radius": value,
        }
    )
    return ClusteringResult(
        objective="center",
        k=k,
        bounds=bounds,
        centers=chosen,
        assignment=assignment,
        value=value,
        diagnostics=diagnostics,
    )
