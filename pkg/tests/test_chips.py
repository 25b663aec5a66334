import itertools

import networkx as nx

from dynprot.chips import (ChipIndex, ChipParams, brute_force_chips, brute_force_semi_mergeable, is_semi_mergeable,
                           static_local_search)
from dynprot.hypergraph import AddHyperedge, AddVertex, DeleteHyperedge, DeleteVertex, Hypergraph, support_hypergraph

import oracles


def always(Z, bd):
    return True


def never(Z, bd):
    return False


def forest_oracle(holder):
    """Chips whose primal graph on interior vertices is a forest."""
    def oracle(Z, bd):
        h = holder[0]
        g = nx.Graph()
        for e in Z:
            vs = [v for v in h.vertices_of(e) if v not in bd]
            g.add_nodes_from(vs)
            g.add_edges_from(itertools.combinations(vs, 2))
        return nx.is_forest(g) if g.number_of_nodes() else True
    return oracle


def naive_search(h, I, X, p, s, k):
    """Filter all supersets of I by the search postconditions."""
    I, X = set(I), set(X)
    E = sorted(set(h.edges()) - I)
    out = set()
    for r in range(0, p - len(I) + 1):
        for extra in itertools.combinations(E, r):
            A = I | set(extra)
            bd = oracles.naive_bd(h, A)
            if not X <= bd or len(bd) > k or len(h.vertex_union(A)) > s:
                continue
            if all(c & I for c in h.internal_components(A)):
                out.add(frozenset(A))
    return out


def test_search_isolated_edge():
    h = Hypergraph()
    h.add_vertex(0)
    e = h.add_hyperedge([0])
    assert static_local_search(h, [e], [], 4, 4, 0) == [frozenset([e])]


def test_search_boundary_too_large():
    h = support_hypergraph(nx.path_graph(3))
    e = h.pair_edge[(0, 1)]
    assert static_local_search(h, [e], [0, 1], 4, 4, 1) == []


def test_search_triangle_matches_filter():
    h = support_hypergraph(nx.cycle_graph(3))
    e = h.pair_edge[(0, 1)]
    got = set(static_local_search(h, [e], [], 6, 3, 2))
    assert frozenset([e]) in got
    assert got == naive_search(h, [e], [], 6, 3, 2)


def test_search_matches_filter_on_random_hypergraphs():
    rng = oracles.rng(21)
    for _ in range(60):
        h = oracles.random_hypergraph(rng, 6, 7)
        E = sorted(h.edges())
        e = rng.choice(E)
        k = rng.randint(0, 3)
        X = [v for v in h.vertices_of(e) if rng.random() < 0.3]
        got = static_local_search(h, [e], X, 5, 6, k)
        assert len(got) == len(set(got))
        assert set(got) == naive_search(h, [e], X, 5, 6, k)


def test_index_with_false_oracle_is_empty():
    h = support_hypergraph(nx.path_graph(4))
    idx = ChipIndex(ChipParams(4, 8, 2), never, h)
    assert idx.chip_set() == set() and idx.query() is None


def test_index_single_isolated_edge():
    h = Hypergraph()
    h.add_vertex(0)
    e = h.add_hyperedge([0])
    idx = ChipIndex(ChipParams(4, 8, 2), always, h)
    assert idx.chip_set() == {frozenset([e])}


def test_empty_index_query_is_none():
    assert ChipIndex(ChipParams(4, 8, 2), always).query() is None


def test_isolated_vertex_updates_leave_index_unchanged():
    h = support_hypergraph(nx.path_graph(4))
    idx = ChipIndex(ChipParams(4, 8, 2), always, h)
    before = idx.chip_set()
    idx.apply([AddVertex(99)])
    assert idx.chip_set() == before
    idx.apply([DeleteVertex(99)])
    assert idx.chip_set() == before


def test_index_matches_brute_force_on_random_hypergraphs():
    rng = oracles.rng(22)
    for _ in range(30):
        h = oracles.random_hypergraph(rng, 7, 9)
        holder = [h]
        params = ChipParams(3, 6, 2)
        idx = ChipIndex(params, forest_oracle(holder), h)
        holder[0] = idx.h
        assert idx.chip_set() == brute_force_chips(idx.h, params, forest_oracle(holder))
        idx.check()


def test_single_chip_of_size_s1_is_returned():
    h = support_hypergraph(nx.path_graph(4))  # 7 hyperedges
    h.add_vertex(9)
    h.add_hyperedge([3, 9])                   # 8 hyperedges, all connected
    params = ChipParams(8, 8, 2)
    idx = ChipIndex(params, lambda Z, bd: len(Z) == 8, h)
    assert idx.chip_set() == {frozenset(h.edges())}
    assert idx.query() == frozenset(h.edges())


def test_group_of_small_chips_is_combined():
    h = Hypergraph()
    h.add_vertex(0)
    petals = []
    for i in range(1, 6):
        h.add_vertex(i)
        a = h.add_hyperedge([0, i])
        b = h.add_hyperedge([i])
        petals.append(frozenset([a, b]))
    params = ChipParams(8, 8, 1)
    idx = ChipIndex(params, always, h)
    assert set(petals) <= idx.chip_set()
    assert idx.vol[(0,)] == 10
    C = idx.query()
    assert C is not None
    assert params.s1 / 2 <= len(C) < params.s1
    assert 2 <= sum(1 for p in petals if p <= C) <= 3
    assert h.bd(C) == {0}
    assert is_semi_mergeable(h, C, params, always)


def test_volume_bookkeeping_under_updates():
    rng = oracles.rng(23)
    h = oracles.random_hypergraph(rng, 6, 6)
    params = ChipParams(3, 6, 2)
    idx = ChipIndex(params, always, h)
    for _ in range(200):
        E = sorted(idx.h.edges())
        if E and rng.random() < 0.45:
            e = rng.choice(E)
            idx.apply([DeleteHyperedge(e, idx.h.vertices_of(e))])
        elif len(E) < 10:
            verts = rng.sample(sorted(idx.h.vertices()), rng.randint(1, 2))
            idx.apply([AddHyperedge(idx.h.fresh_label(), verts)])
        idx.check()
        for bd, group in idx.groups.items():
            assert idx.vol[bd] == sum(len(Z) for Z in group)
        assert idx.chip_set() == brute_force_chips(idx.h, params, always)


def test_query_none_means_no_semi_mergeable_set():
    rng = oracles.rng(24)
    nones = 0
    for _ in range(60):
        h = oracles.random_hypergraph(rng, 6, rng.randint(3, 9))
        params = ChipParams(4, 8, 1)
        idx = ChipIndex(params, always, h)
        if idx.query() is None:
            nones += 1
            assert brute_force_semi_mergeable(h, params, always) is None
    assert nones > 0
