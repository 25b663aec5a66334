import networkx as nx
import pytest

from dynprot.hypergraph import support_hypergraph
from dynprot.welllinked import (SizeLimitExceeded, is_well_linked, is_well_linked_enum, partition_well_linked,
                                well_linked_number, well_linked_witness)

import oracles


def star():
    return support_hypergraph(nx.star_graph(3))  # center 0, leaves 1..3


def test_singleton_and_full_set_are_well_linked():
    h = star()
    assert is_well_linked(h, [h.pair_edge[(0, 1)]])
    assert is_well_linked(h, list(h.edges()))
    assert well_linked_witness(h, [h.vertex_edge[0]]).is_well_linked


def test_star_pair_is_not_well_linked():
    h = star()
    A = [h.pair_edge[(0, 1)], h.pair_edge[(0, 2)]]
    assert h.lam(A) == 3
    assert not is_well_linked(h, A)
    w = well_linked_witness(h, A)
    assert not w.is_well_linked
    assert {frozenset(w.b1), frozenset(w.b2)} == {frozenset([A[0]]), frozenset([A[1]])}
    assert h.lam(w.b1) == h.lam(w.b2) == 2


def test_two_disjoint_edges_witness():
    g = nx.Graph([(0, 1), (2, 3)])
    h = support_hypergraph(g)
    A = [h.pair_edge[(0, 1)], h.pair_edge[(2, 3)]]
    assert h.lam(A) == 4
    w = well_linked_witness(h, A)
    assert not w.is_well_linked
    assert h.lam(w.b1) == h.lam(w.b2) == 2


def test_partition_of_well_linked_input_is_itself():
    h = support_hypergraph(nx.cycle_graph(4))
    A = frozenset(h.edges())
    assert partition_well_linked(h, A) == [A]


def test_partition_of_star_pair():
    h = star()
    A = [h.pair_edge[(0, 1)], h.pair_edge[(0, 2)]]
    parts = partition_well_linked(h, A)
    assert sorted(parts, key=min) == [frozenset([A[0]]), frozenset([A[1]])]
    for p in parts:
        assert oracles.naive_is_well_linked(h, p)


def test_partition_of_zero_boundary_set():
    g = nx.Graph([(0, 1), (2, 3), (3, 4)])
    h = support_hypergraph(g)
    A = list(h.edges())
    assert h.lam(A) == 0
    parts = partition_well_linked(h, A)
    assert sum(len(p) for p in parts) == len(A)
    for p in parts:
        assert oracles.naive_is_well_linked(h, p)


def test_well_linked_number_values():
    h = support_hypergraph(nx.path_graph(3))
    assert well_linked_number(h, []) == 0
    e = h.pair_edge[(0, 1)]
    assert well_linked_number(h, [e]) == h.lam([e])
    # values frozen from the naive enumeration oracle
    assert well_linked_number(h, list(h.edges())) == 2
    assert well_linked_number(support_hypergraph(nx.cycle_graph(4)), range(8)) == 3
    assert well_linked_number(support_hypergraph(nx.complete_graph(4)), range(10)) == 4


def test_well_linked_number_matches_oracle():
    rng = oracles.rng(11)
    for _ in range(40):
        h = oracles.random_hypergraph(rng, 6, 7)
        E = list(h.edges())
        assert well_linked_number(h, E) == oracles.naive_wl_number(h, E)


def test_well_linked_number_size_limit():
    h = support_hypergraph(nx.path_graph(10))
    with pytest.raises(SizeLimitExceeded):
        well_linked_number(h, list(h.edges()), limit=12)


def test_flow_agrees_with_enumeration_on_random_sets():
    rng = oracles.rng(12)
    for _ in range(300):
        h = oracles.random_hypergraph(rng, 8, 10)
        E = sorted(h.edges())
        A = rng.sample(E, rng.randint(1, len(E)))
        want = oracles.naive_is_well_linked(h, A)
        assert is_well_linked(h, A) == want == is_well_linked_enum(h, A)
