import numpy as np
import pytest

import balclust as bc
from balclust.flow import (
    FlowNetwork,
    coverage_network,
    level_network,
    max_flow,
    min_cost_max_flow,
    reduce_demands_to_capacities,
    residual_has_negative_cycle,
    validate_solution,
)
from balclust.oracle import exists_balanced_assignment
from balclust.regions import build_level_regions, build_level_schedule

from conftest import enumerate_network_optimum


def make_net(supplies, k, lower, upper, edges, costs=None):
    er = np.array([e[0] for e in edges], dtype=np.int64)
    ec = np.array([e[1] for e in edges], dtype=np.int64)
    cost = np.zeros(len(edges)) if costs is None else np.asarray(costs, dtype=np.float64)
    return FlowNetwork(
        supplies=np.asarray(supplies, dtype=np.int64),
        k=k,
        lower=lower,
        upper=upper,
        edge_region=er,
        edge_cluster=ec,
        edge_cost=cost,
    )


def allowed_matrix(net):
    """Per-point allowed-cluster matrix for the independent per-point oracle."""
    rows = []
    for r in range(net.num_regions):
        row = np.zeros(net.k, dtype=bool)
        for e in range(net.num_edges):
            if net.edge_region[e] == r:
                row[net.edge_cluster[e]] = True
        for _ in range(int(net.supplies[r])):
            rows.append(row)
    return np.array(rows)


def test_reduction_single_path():
    net = make_net([4], 1, 4, 4, [(0, 0)])
    red = reduce_demands_to_capacities(net)
    assert red.required == 4 + 4
    sol = max_flow(net)
    assert sol is not None and sol.total == 4


def test_reduction_without_lower_bounds():
    net = make_net([2, 1], 2, 0, 3, [(0, 0), (0, 1), (1, 1)])
    red = reduce_demands_to_capacities(net)
    assert red.required == 3  # no demand arcs when L = 0
    assert all(a == -1 for a in red.cluster_demand_arcs)
    sol = max_flow(net)
    assert sol is not None and sol.total == 3


def test_feasibility_matches_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(40):
        k = int(rng.integers(1, 4))
        nr = int(rng.integers(1, 5))
        supplies = rng.integers(1, 4, size=nr)
        edges = []
        for r in range(nr):
            incident = rng.permutation(k)[: int(rng.integers(1, k + 1))]
            edges.extend((r, int(j)) for j in sorted(incident))
        n = int(supplies.sum())
        lower = int(rng.integers(0, max(1, n // k) + 1))
        upper = int(rng.integers(max(1, lower), n + 1))
        net = make_net(supplies, k, lower, upper, edges)
        feasible, _, _ = enumerate_network_optimum(net)
        sol = max_flow(net)
        assert (sol is not None) == feasible
        if sol is not None:
            assert sol.total == n
            assert sol.is_integral()
            validate_solution(net, sol)


def test_max_flow_forced_assignment():
    net = make_net([2, 2], 2, 2, 2, [(0, 0), (1, 1)])
    sol = max_flow(net)
    assert sol.flows.tolist() == [2.0, 2.0]


def test_max_flow_unreachable_demand():
    net = make_net([3], 2, 1, 2, [(0, 0)])
    assert max_flow(net) is None


def test_feasibility_agrees_with_point_oracle():
    rng = np.random.default_rng(14)
    for _ in range(60):
        k = int(rng.integers(2, 4))
        nr = int(rng.integers(1, 8))
        supplies = rng.integers(1, 3, size=nr)
        edges = []
        for r in range(nr):
            incident = rng.permutation(k)[: int(rng.integers(1, k + 1))]
            edges.extend((r, int(j)) for j in sorted(incident))
        n = int(supplies.sum())
        lower = int(rng.integers(0, max(1, n // k) + 1))
        upper = int(rng.integers(max(1, lower), n + 1))
        net = make_net(supplies, k, lower, upper, edges)
        verdict = max_flow(net) is not None
        oracle_verdict = exists_balanced_assignment(allowed_matrix(net), lower, upper)
        assert verdict == oracle_verdict


def test_min_cost_symmetric_split():
    schedule = build_level_schedule(1.0, 1.0, 1.0)
    regions = build_level_regions(np.array([[1.0, 1.0], [1.0, 1.0]]), schedule)
    net = level_network(regions, schedule, 1, 1)
    sol = min_cost_max_flow(net)
    assert sol is not None
    assert sol.cost == pytest.approx(2 * schedule.alphas[0])
    assert sorted(sol.flows.tolist()) == [1.0, 1.0]


def test_min_cost_prefers_cheap_edge():
    net = make_net([2], 2, 0, 2, [(0, 0), (0, 1)], costs=[1.0, 10.0])
    sol = min_cost_max_flow(net)
    assert sol.flows.tolist() == [2.0, 0.0]
    assert sol.cost == pytest.approx(2.0)


def test_min_cost_matches_exhaustive_enumeration():
    rng = np.random.default_rng(21)
    for _ in range(40):
        k = int(rng.integers(1, 4))
        nr = int(rng.integers(1, 5))
        supplies = rng.integers(1, 4, size=nr)
        edges = []
        costs = []
        for r in range(nr):
            incident = rng.permutation(k)[: int(rng.integers(1, k + 1))]
            for j in sorted(incident):
                edges.append((r, int(j)))
                costs.append(float(rng.uniform(0, 5)))
        n = int(supplies.sum())
        lower = int(rng.integers(0, max(1, n // k) + 1))
        upper = int(rng.integers(max(1, lower), n + 1))
        net = make_net(supplies, k, lower, upper, edges, costs)
        feasible, best_cost, _ = enumerate_network_optimum(net)
        sol = min_cost_max_flow(net)
        assert (sol is not None) == feasible
        if sol is not None:
            assert sol.is_integral()
            assert sol.cost == pytest.approx(best_cost, abs=1e-9)
            validate_solution(net, sol)
            assert not residual_has_negative_cycle(net, sol)


def test_coverage_network_structure():
    net = coverage_network(np.array([0b01, 0b11]), np.array([2, 3]), 2, 1, 4)
    assert net.num_edges == 3
    assert net.edge_region.tolist() == [0, 1, 1]
    assert net.edge_cluster.tolist() == [0, 0, 1]


def test_network_validation():
    with pytest.raises(bc.InputError):
        make_net([0], 1, 0, 1, [(0, 0)])  # empty region
    with pytest.raises(bc.InputError):
        make_net([1], 1, 2, 1, [(0, 0)])  # lower > upper
    with pytest.raises(bc.InputError):
        make_net([1], 1, 0, 1, [(0, 0)], costs=[-1.0])
