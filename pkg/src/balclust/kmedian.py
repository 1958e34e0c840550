"""Balanced k-median / k-means: for each candidate center tuple, solve the
ring-level assignment program as a min-cost max flow and keep the best tuple.

Ring coefficients over-charge every point by less than a (1 + epsilon)
factor, so the flow objective sandwiches the true assignment cost:
cost <= flow objective < (1 + epsilon) * cost for the sum objective and
(1 + epsilon)^2 for sum-of-squares. Points at exact distance zero sit in a
reserved free ring, which keeps zero-cost placements representable.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .candidates import BicriteriaGenerator, CandidateGenerator, enumerate_tuples
from .core import (
    BalanceBounds,
    BalancedAssignment,
    ClusteringResult,
    InputError,
    StructureError,
    as_oracle,
    check_objective,
    distance_table,
    evaluate_objective,
    extreme_distances,
    round_robin_assignment,
)
from .flow import FlowNetwork, FlowSolution, level_network, min_cost_max_flow
from .kcenter import expand_assignment
from .regions import build_level_regions, build_level_schedule
from .rounding import round_to_integral

#: Fall back to the exact per-point assignment when the ring-region space
#: (T + 2)^k exceeds this cap; the fallback is exact, just not n-independent.
REGION_CAP = 1 << 20


@dataclass
class AssignmentLPResult:
    """Solved assignment for one fixed center tuple."""

    lp_objective: float
    true_cost: float
    assignment: BalancedAssignment | None
    region_flows: FlowSolution | None = None
    degenerate: bool = False
    fallback: bool = False


def _exact_point_assignment(cols: np.ndarray, bounds: BalanceBounds, squared: bool) -> tuple[float, BalancedAssignment]:
    """Per-point min-cost flow with unit supplies: exact but O(n)-sized."""
    n, k = cols.shape
    costs = cols**2 if squared else cols
    net = FlowNetwork(
        supplies=np.ones(n, dtype=np.int64),
        k=k,
        lower=bounds.lower,
        upper=bounds.upper,
        edge_region=np.repeat(np.arange(n, dtype=np.int64), k),
        edge_cluster=np.tile(np.arange(k, dtype=np.int64), n),
        edge_cost=costs.ravel().astype(np.float64),
    )
    sol = min_cost_max_flow(net)
    if sol is None:
        raise StructureError("exact assignment infeasible despite validated bounds")
    flows = np.rint(sol.flows).astype(np.int64).reshape(n, k)
    labels = np.argmax(flows, axis=1)
    assignment = BalancedAssignment.from_labels(labels, k, bounds)
    return float(sol.cost), assignment


def _lp_from_columns(
    cols: np.ndarray,
    bounds: BalanceBounds,
    epsilon: float,
    objective: str,
    region_cap: int = REGION_CAP,
    with_assignment: bool = True,
) -> AssignmentLPResult:
    """``with_assignment=False`` skips member bookkeeping and expansion; the
    tuple sweep uses it to rank tuples by lp_objective alone and re-solves
    only the winner in full."""
    n, k = cols.shape
    squared = objective == "means"
    extremes = extreme_distances(cols)
    if extremes is None:
        assignment = round_robin_assignment(n, k, bounds) if with_assignment else None
        return AssignmentLPResult(
            lp_objective=0.0, true_cost=0.0, assignment=assignment, degenerate=True
        )
    r_min, r_max = extremes
    schedule = build_level_schedule(r_min, r_max, epsilon)
    if float(schedule.alphas.size + 1) ** k > region_cap:
        cost, assignment = _exact_point_assignment(cols, bounds, squared)
        return AssignmentLPResult(
            lp_objective=cost, true_cost=cost, assignment=assignment, fallback=True
        )
    regions = build_level_regions(cols, schedule, with_members=with_assignment)
    net = level_network(regions, schedule, bounds.lower, bounds.upper, squared=squared)
    sol = min_cost_max_flow(net)
    if sol is None:
        raise StructureError("level network infeasible despite validated bounds")
    if not with_assignment:
        return AssignmentLPResult(
            lp_objective=float(sol.cost), true_cost=float("nan"), assignment=None, region_flows=sol
        )
    sol = round_to_integral(sol, net, mode="min-cost")
    assignment = expand_assignment(sol, net, regions, bounds)
    per_point = cols[np.arange(n), assignment.labels]
    if squared:
        per_point = per_point**2
    true_cost = float(per_point.sum())
    return AssignmentLPResult(
        lp_objective=float(sol.cost),
        true_cost=true_cost,
        assignment=assignment,
        region_flows=sol,
    )


def assignment_lp(
    centers,
    source,
    bounds: BalanceBounds,
    epsilon: float,
    objective: str = "median",
    region_cap: int = REGION_CAP,
) -> AssignmentLPResult:
    """Best balanced assignment to ``centers`` under ring costs.

    Reports both the flow objective (ring coefficients) and the true cost of
    the expanded assignment; the two satisfy the (1 + epsilon) sandwich.
    """
    check_objective(objective)
    if objective == "center":
        raise InputError("assignment_lp handles the sum objectives; use check_feasible for center")
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    oracle = as_oracle(source)
    k = len(centers)
    bounds.validate(oracle.n, k)
    cols = distance_table(oracle, centers)
    return _lp_from_columns(cols, bounds, epsilon, objective, region_cap)


def _improves(key, incumbent):
    """Smaller flow objective wins; ties within float dust (1e-12 relative)
    fall back to generation order so near-equal tuples rank identically on
    every kernel backend."""
    lp, order = key
    best_lp, best_order = incumbent
    tol = 1e-12 * max(1.0, abs(lp), abs(best_lp))
    if lp < best_lp - tol:
        return True
    if lp > best_lp + tol:
        return False
    return order < best_order


def _evaluate_chunk(table, tuple_list, bounds, epsilon, objective, region_cap, start_order):
    best = None
    stats = {"fallbacks": 0, "degenerate": 0}
    for offset, tup in enumerate(tuple_list):
        cols = np.ascontiguousarray(table[:, tup])
        res = _lp_from_columns(cols, bounds, epsilon, objective, region_cap, with_assignment=False)
        stats["fallbacks"] += int(res.fallback)
        stats["degenerate"] += int(res.degenerate)
        key = (res.lp_objective, start_order + offset)
        if best is None or _improves(key, best[0]):
            best = (key, tup)
    return best, stats


def solve_balanced(
    source,
    k: int,
    bounds: BalanceBounds,
    epsilon: float = 1.0,
    objective: str = "median",
    generator: CandidateGenerator | None = None,
    seed: int = 0,
    threads: int = 1,
    region_cap: int = REGION_CAP,
) -> ClusteringResult:
    """Evaluate every candidate k-tuple and return the one with the smallest
    flow objective, expanded to a balanced assignment.

    epsilon trades ring resolution for work; 1.0 already preserves the
    constant-factor guarantee of the candidate set.
    """
    check_objective(objective)
    if objective == "center":
        raise InputError("use solve_kbcenter for the center objective")
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    oracle = as_oracle(source)
    n = oracle.n
    bounds.validate(n, k)
    if generator is None:
        generator = BicriteriaGenerator(seed=seed)
    candidate_idx = np.asarray(generator.generate(oracle, k, objective), dtype=np.int64)
    if candidate_idx.size < 1:
        raise InputError("candidate generator produced no centers")
    tuple_list = list(enumerate_tuples(int(candidate_idx.size), k))
    table = oracle.columns(candidate_idx)

    if threads > 1 and len(tuple_list) > 1:
        workers = min(threads, len(tuple_list))
        chunks = np.array_split(np.arange(len(tuple_list)), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _evaluate_chunk,
                    table,
                    [tuple_list[i] for i in chunk],
                    bounds,
                    epsilon,
                    objective,
                    region_cap,
                    int(chunk[0]),
                )
                for chunk in chunks
                if chunk.size
            ]
            outcomes = [f.result() for f in futures]
        best = None
        for candidate, _ in outcomes:
            if candidate is not None and (best is None or _improves(candidate[0], best[0])):
                best = candidate
        stats = {
            "fallbacks": sum(s["fallbacks"] for _, s in outcomes),
            "degenerate": sum(s["degenerate"] for _, s in outcomes),
        }
    else:
        best, stats = _evaluate_chunk(table, tuple_list, bounds, epsilon, objective, region_cap, 0)

    (lp_objective, order), tup = best
    cols = np.ascontiguousarray(table[:, tup])
    res = _lp_from_columns(cols, bounds, epsilon, objective, region_cap, with_assignment=True)
    if abs(res.lp_objective - lp_objective) > 1e-9 * max(1.0, abs(lp_objective)):
        raise StructureError("winning tuple re-solve disagrees with the sweep")
    chosen = candidate_idx[list(tup)]
    value = evaluate_objective(res.assignment, chosen, oracle, objective)
    if abs(value - res.true_cost) > 1e-9 * max(1.0, abs(value)):
        raise StructureError("reported cost disagrees with independent recomputation")
    diagnostics = {
        "generator": generator.name,
        "num_candidates": int(candidate_idx.size),
        "tuples_evaluated": len(tuple_list),
        "epsilon": float(epsilon),
        "lp_objective": float(lp_objective),
        "best_tuple_positions": list(tup),
        "best_tuple_order": order,
        "fallbacks": stats["fallbacks"],
        "degenerate_tuples": stats["degenerate"],
    }
    if isinstance(generator, BicriteriaGenerator) and generator.last_cost is not None:
        diagnostics["unconstrained_candidate_cost"] = generator.last_cost
    return ClusteringResult(
        objective=objective,
        k=k,
        bounds=bounds,
        centers=chosen,
        assignment=res.assignment,
        value=value,
        diagnostics=diagnostics,
    )
