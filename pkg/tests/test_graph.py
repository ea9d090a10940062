import pytest

from reserves.generator import random_instance
from reserves.graph import (ReservationGraph, max_matching, max_matching_size,
                            reduced_graph, reservation_graph)
from reserves.model import ValidationError
from reserves.oracle import enumerate_matchings


def test_reservation_graph_running(running):
    g = reservation_graph(running)
    assert g.edges == {(1, 0), (2, 0), (1, 1)}
    assert g.left == frozenset({0, 1, 2})
    assert dict(g.right) == {0: 1, 1: 1}


def test_reservation_graph_scan(scan):
    g = reservation_graph(scan)
    assert g.edges == {(0, 0), (1, 0), (3, 0), (0, 1), (2, 1)}


def test_reservation_graph_no_categories(running):
    g = reservation_graph(running, cats=())
    assert g.right == () and g.edges == frozenset()
    assert max_matching_size(g) == 0


def test_reduced_graph_prunes_outranked_edges(scan):
    # rejecting agent 4 removes agent 2's edge to c1 (4 outranks 2 there)
    g = reduced_graph(scan, rejected={3})
    assert g.edges == {(0, 0), (0, 1), (2, 1)}
    assert g.left == frozenset({0, 1, 2})


def test_reduced_graph_empty_rejection_is_identity(scan):
    assert reduced_graph(scan, rejected=set()).edges == reservation_graph(scan).edges


def test_reduced_graph_two_rejections(scan):
    g = reduced_graph(scan, rejected={1, 3})
    assert g.edges == {(0, 0), (0, 1), (2, 1)}


def test_reduced_graph_monotone_in_rejections():
    for seed in range(25):
        inst = random_instance(6, 3, seed=seed, eligibility_density=0.6, tie_prob=0.3)
        prev = reservation_graph(inst).edges
        rejected: set[int] = set()
        for a in range(inst.n):
            rejected.add(a)
            cur = reduced_graph(inst, rejected=rejected).edges
            assert cur <= prev
            assert max_matching_size(reduced_graph(inst, rejected=rejected)) <= \
                max_matching_size(reservation_graph(inst))
            prev = cur


def test_max_matching_size_golden(running, scan):
    assert max_matching_size(reservation_graph(running)) == 2
    # without agents 3 and 4 only agent 1 keeps edges: one agent, one unit
    assert max_matching_size(reduced_graph(scan, rejected={2, 3})) == 1


def test_max_matching_forced_and_unique(scan):
    g = ReservationGraph(frozenset({5}), ((0, 1),), frozenset({(5, 0)}), (5,))
    assert max_matching(g).assignment == {5: 0}
    # after rejecting 2 and 4 the only size-2 matching is 1->c1, 3->c2
    m = max_matching(reduced_graph(scan, rejected={1, 3}))
    assert m.assignment == {0: 0, 2: 1}


def test_max_matching_running(running):
    assert max_matching(reservation_graph(running)).assignment == {1: 1, 2: 0}


def test_max_matching_is_valid_and_deterministic():
    for seed in range(40):
        inst = random_instance(7, 3, seed=seed, eligibility_density=0.5, tie_prob=0.3)
        g = reservation_graph(inst)
        m1, m2 = max_matching(g), max_matching(g)
        assert m1 == m2
        assert set(m1.pairs()) <= set(g.edges)
        for c, q in g.right:
            assert m1.count_in(c) <= q
        assert m1.size() == max_matching_size(g)


def test_matching_size_agrees_with_enumeration_oracle():
    for seed in range(60):
        inst = random_instance(4 + seed % 4, 1 + seed % 3, max_quota=2, seed=seed,
                               eligibility_density=(0.3, 0.6, 0.9)[seed % 3],
                               tie_prob=(0.0, 0.3)[seed % 2])
        oracle_best = max((m.size() for m in enumerate_matchings(inst)), default=0)
        assert max_matching_size(reservation_graph(inst)) == oracle_best


def test_edges_mirror_eligibility():
    for seed in range(20):
        inst = random_instance(6, 3, seed=seed, eligibility_density=0.5, tie_prob=0.3)
        g = reservation_graph(inst)
        expected = {(a, c) for a in range(inst.n) for c in range(len(inst.categories))
                    if inst.eligible(a, c)}
        assert g.edges == expected


def test_dropping_an_edge_never_increases_matching_size():
    for seed in range(15):
        inst = random_instance(5, 2, seed=seed, eligibility_density=0.7)
        g = reservation_graph(inst)
        full = max_matching_size(g)
        for edge in sorted(g.edges):
            smaller = ReservationGraph(g.left, g.right, g.edges - {edge}, g.scan_order)
            assert max_matching_size(smaller) <= full


def test_invalid_graph_inputs(running):
    with pytest.raises(ValidationError):
        reservation_graph(running, cats=(9,))
    with pytest.raises(ValidationError):
        reduced_graph(running, rejected={11})
    with pytest.raises(ValidationError):
        ReservationGraph(frozenset({0}), ((0, 1),), frozenset({(1, 0)}), (0,))
