import heapq
from itertools import permutations

import numpy as np
import pytest

from twobell.circuit import Circuit, run_exact
from twobell.protocols import experiment_circuit
from twobell.transpile import (
    CostReport,
    CouplingGraph,
    Layout,
    casablanca_topology,
    cost,
    load_coupling_graph,
    route,
)


def two_qubit_interactions(c: Circuit):
    out = []
    for step in c.steps:
        gate = getattr(step, "gate", step)  # unwrap classical control
        kind = getattr(gate, "kind", None)
        if kind in ("CNOT", "SWAP") or (kind == "CUSTOM" and len(gate.targets) == 2):
            out.append(tuple(gate.targets))
    return out


def brute_force_min_cost(c: Circuit, g: CouplingGraph, max_swaps=3):
    """Dijkstra over (qubit mapping, next gate index) with SWAP cost 3."""
    gates = two_qubit_interactions(c)
    n = c.num_qubits
    edges = [tuple(sorted(e)) for e in g.edges]
    best = None
    for init in permutations(range(g.num_physical), n):
        heap = [(0, 0, init, 0)]  # cost, gate index, mapping, swaps used
        seen = {}
        while heap:
            cst, idx, mapping, swaps = heapq.heappop(heap)
            if best is not None and cst >= best:
                break
            if idx == len(gates):
                best = cst if best is None else min(best, cst)
                break
            if seen.get((idx, mapping), 1 << 30) <= cst:
                continue
            seen[(idx, mapping)] = cst
            a, b = gates[idx]
            if g.has_edge(mapping[a], mapping[b]):
                heapq.heappush(heap, (cst + 1, idx + 1, mapping, swaps))
            if swaps < max_swaps:
                for u, v in edges:
                    m = list(mapping)
                    for i, p in enumerate(m):
                        if p == u:
                            m[i] = v
                        elif p == v:
                            m[i] = u
                    heapq.heappush(heap, (cst + 3, idx, tuple(m), swaps + 1))
    return best


# -- topology -------------------------------------------------------------------


def test_casablanca_shape():
    g = casablanca_topology()
    assert g.num_physical == 7
    assert len(g.edges) == 6
    assert g.adjacency()[5] == {3, 4, 6}


def test_casablanca_connected():
    g = casablanca_topology()
    dist = g.distances()
    assert all(b in dist[a] for a in range(7) for b in range(7))


def test_graph_rejects_disconnected():
    with pytest.raises(ValueError):
        CouplingGraph(4, frozenset({frozenset({0, 1}), frozenset({2, 3})}))


def test_load_coupling_graph(tmp_path):
    p = tmp_path / "graph.txt"
    p.write_text("0 1\n1 2\n")
    g = load_coupling_graph(p)
    assert g.num_physical == 3
    assert g.has_edge(0, 1) and g.has_edge(2, 1) and not g.has_edge(0, 2)


def test_layout_injective():
    with pytest.raises(ValueError):
        Layout({0: 3, 1: 3})


# -- cost -----------------------------------------------------------------------


def test_cost_four_cnots():
    c = Circuit(2)
    for _ in range(4):
        c.cnot(0, 1)
    assert cost(c) == CostReport(cnot_count=4, swap_count=0, depth=4)


def test_cost_swap_counts_as_three():
    c = Circuit(3).cnot(0, 1).gate("SWAP", 1, 2).cnot(0, 1)
    report = cost(c)
    assert report.cnot_count == 5
    assert report.swap_count == 1


def test_cost_rejects_non_edge():
    c = Circuit(3).cnot(0, 2)
    with pytest.raises(ValueError):
        cost(c, load_coupling_graph_from_edges())


def load_coupling_graph_from_edges():
    return CouplingGraph(3, frozenset({frozenset({0, 1}), frozenset({1, 2})}))


# -- routing --------------------------------------------------------------------


def test_single_cnot_zero_swaps():
    c = Circuit(2).cnot(0, 1)
    _, routed, report = route(c, casablanca_topology())
    assert report.swap_count == 0
    assert report.cnot_count == 1


def test_disjoint_chains_zero_swaps():
    # Interactions a-b, b-c and d-e, e-f: fits paths 0-1-2 and 4-5-6.
    c = Circuit(6).cnot(0, 1).cnot(1, 2).cnot(3, 4).cnot(4, 5)
    _, routed, report = route(c, casablanca_topology())
    assert report.swap_count == 0
    assert report.cnot_count == 4


def test_experiment_circuit_routes_without_swaps():
    c = experiment_circuit(measure_outputs=False)
    layout, routed, report = route(c, casablanca_topology())
    assert report.swap_count == 0
    assert report.cnot_count == 4


def test_triangle_needs_a_swap():
    c = Circuit(3).cnot(0, 1).cnot(1, 2).cnot(0, 2)
    _, routed, report = route(c, casablanca_topology())
    assert report.swap_count >= 1


def test_route_rejects_too_many_logical_qubits():
    c = Circuit(8).cnot(0, 7)
    with pytest.raises(ValueError):
        route(c, casablanca_topology())


def test_routed_gates_lie_on_edges():
    g = casablanca_topology()
    rng = np.random.default_rng(41)
    for _ in range(5):
        c = _random_circuit(rng, 4, measured=0)
        _, routed, _ = route(c, g)
        for a, b in two_qubit_interactions(routed):
            assert g.has_edge(a, b)


def _random_circuit(rng, n, measured=2):
    c = Circuit(n)
    for _ in range(8):
        if rng.random() < 0.45:
            a, b = rng.choice(n, size=2, replace=False)
            c.cnot(int(a), int(b))
        else:
            c.gate(["H", "X", "Z", "S"][rng.integers(4)], int(rng.integers(n)))
    for i in range(measured):
        c.measure(int(rng.integers(n)), f"c{i}")
    return c


def test_routed_circuit_semantically_equivalent():
    g = casablanca_topology()
    rng = np.random.default_rng(43)
    for _ in range(8):
        c = _random_circuit(rng, int(rng.integers(2, 5)), measured=3)
        _, routed, _ = route(c, g)
        expected = run_exact(c).probabilities()
        got = run_exact(routed).probabilities()
        for outcome in set(expected) | set(got):
            assert got.get(outcome, 0.0) == pytest.approx(
                expected.get(outcome, 0.0), abs=1e-10
            )


def test_route_matches_brute_force_optimum():
    g = casablanca_topology()
    rng = np.random.default_rng(47)
    for _ in range(4):
        c = _random_circuit(rng, int(rng.integers(3, 6)), measured=0)
        _, _, report = route(c, g)
        oracle = brute_force_min_cost(c, g)
        assert oracle is not None
        assert report.cnot_count <= oracle


def test_route_deterministic_tie_breaking():
    c = Circuit(2).cnot(0, 1)
    g = casablanca_topology()
    first = route(c, g)
    second = route(c, g)
    assert first[0].mapping == second[0].mapping
    assert first[2] == second[2]
