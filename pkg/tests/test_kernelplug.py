import itertools

import networkx as nx
import numpy as np
import pytest

from dynprot.kernelplug import (INF, BoundariedGraph, RepresentativeStore, default_store, get_plugin, glue_b, glue_u,
                                synthesize_representatives, table_of)

import oracles


def table_dict(T):
    """Table entries keyed by state tuples, None for infinity."""
    out = {}
    for s in itertools.product(*(range(n) for n in T.arr.shape)):
        x = int(T.arr[s]) if T.arr.ndim else int(T.arr)
        out[s] = None if x >= INF // 2 else x
    return out


def test_vc_single_edge_table():
    T = table_of(get_plugin("vc"), BoundariedGraph.in_order(nx.path_graph(2), [0]))
    assert table_dict(T) == {(0,): 1, (1,): 1}


def test_vc_isolated_boundary_vertex():
    g = nx.Graph()
    g.add_node(0)
    T = table_of(get_plugin("vc"), BoundariedGraph.in_order(g, [0]))
    assert table_dict(T) == {(0,): 0, (1,): 1}


def test_ds_single_vertex():
    g = nx.Graph()
    g.add_node(0)
    T = table_of(get_plugin("ds"), BoundariedGraph.in_order(g, [0]))
    assert table_dict(T) == {(0,): 1, (1,): None, (2,): 0}


@pytest.mark.parametrize("name", ["vc", "ds"])
def test_reference_table_matches_naive(name):
    rng = oracles.rng(41 if name == "vc" else 42)
    for _ in range(40):
        n = rng.randint(1, 6)
        G = oracles.random_graph(rng, n, 0.45)
        bd = sorted(rng.sample(range(n), rng.randint(0, min(3, n))))
        T = table_of(get_plugin(name), BoundariedGraph.in_order(G, bd))
        assert table_dict(T) == oracles.naive_table(name, G, bd)


@pytest.mark.parametrize("name", ["vc", "ds"])
def test_algebra_table_matches_reference(name):
    p = get_plugin(name)
    rng = oracles.rng(43)
    for _ in range(60):
        n = rng.randint(1, 7)
        G = oracles.random_graph(rng, n, 0.4)
        bd = sorted(rng.sample(range(n), rng.randint(0, min(3, n))))
        got = p.graph_table(G, bd)
        want = table_of(p, BoundariedGraph.in_order(G, bd))
        assert np.array_equal(got.arr, want.arr)


def test_forget_isolated_vertex_is_identity():
    p = get_plugin("vc")
    T = p.graph_table(nx.path_graph(3), [0, 2])
    assert p.forget(p.introduce(T, 9), 9) == T


@pytest.mark.parametrize("name", ["vc", "ds"])
def test_join_with_empty_table_is_identity(name):
    p = get_plugin(name)
    T = p.graph_table(nx.path_graph(3), [0, 2])
    assert p.join(T, p.empty()) == T
    assert p.join(p.empty(), T) == T


def test_join_matches_glued_graph():
    rng = oracles.rng(44)
    for name in ("vc", "ds"):
        p = get_plugin(name)
        for _ in range(30):
            # two graphs sharing vertices 0 and 1, boundary {0, 1}
            g1 = oracles.random_graph(rng, 4, 0.5)
            g2 = nx.relabel_nodes(oracles.random_graph(rng, 4, 0.5), {0: 0, 1: 1, 2: 12, 3: 13})
            both = nx.compose(g1, g2)
            got = p.join(p.graph_table(g1, [0, 1]), p.graph_table(g2, [0, 1]))
            want = table_of(p, BoundariedGraph.in_order(both, [0, 1]))
            assert np.array_equal(got.arr, want.arr)


def test_glue_empty_boundaries_is_disjoint_union():
    X = BoundariedGraph(nx.path_graph(2), {})
    Y = BoundariedGraph(nx.path_graph(3), {})
    g = glue_u(X, Y)
    assert g.number_of_nodes() == 5 and g.number_of_edges() == 3
    assert nx.number_connected_components(g) == 2


def test_glue_single_edges_sharing_a_label():
    X = BoundariedGraph(nx.path_graph(2), {0: 1})
    Y = BoundariedGraph(nx.path_graph(2), {1: 1})
    g = glue_u(X, Y)
    assert nx.is_isomorphic(g, nx.path_graph(3))


def test_glue_b_is_associative():
    rng = oracles.rng(45)
    for _ in range(25):
        parts = []
        for _ in range(3):
            G = oracles.random_graph(rng, 4, 0.5)
            parts.append(BoundariedGraph(G, {0: 1, 1: 2}))
        X, Y, Z = parts
        left = glue_b(glue_b(X, Y), Z)
        right = glue_b(X, glue_b(Y, Z))
        assert sorted(left.labels.values()) == sorted(right.labels.values()) == [1, 2]
        for bg in (left, right):
            nx.set_node_attributes(bg.graph, {v: bg.labels.get(v, 0) for v in bg.graph}, "lab")
        assert nx.is_isomorphic(left.graph, right.graph, node_match=lambda a, b: a["lab"] == b["lab"])


def test_glue_b_needs_equal_labels():
    with pytest.raises(ValueError):
        glue_b(BoundariedGraph(nx.path_graph(2), {0: 1}), BoundariedGraph(nx.path_graph(2), {0: 2}))


def test_vc_t1_store_classes():
    store = synthesize_representatives("vc", t_max=1, n_max=3)
    rep = store.lookup((1, (0, 1)))
    assert rep is not None and rep.n == 1 and rep.edges == ()
    assert store.self_check() == []


def test_synthesis_is_deterministic():
    a = synthesize_representatives("ds", t_max=1, n_max=4).dumps()
    b = synthesize_representatives("ds", t_max=1, n_max=4).dumps()
    assert a == b


def test_store_round_trip(tmp_path):
    store = synthesize_representatives("vc", t_max=2, n_max=4)
    path = tmp_path / "vc.store"
    store.save(str(path))
    again = RepresentativeStore.load(str(path))
    assert again.dumps() == store.dumps()


def test_shipped_stores_cover_domain():
    for name in ("vc", "ds"):
        store = default_store(name)
        assert store.max_vertices() <= 6
        assert all(t <= 3 for t, _ in store.reps)


@pytest.mark.parametrize("name", ["vc", "ds"])
def test_replacement_is_sound(name):
    p = get_plugin(name)
    store = default_store(name)
    rng = oracles.rng(46)
    for _ in range(40):
        t = rng.randint(0, 3)
        n = rng.randint(max(t, 1), 6)
        G = oracles.random_graph(rng, n, 0.4)
        bg = BoundariedGraph(G, {i: i + 1 for i in range(t)})
        T = table_of(p, bg)
        rep = store.lookup(T.key())
        assert rep is not None
        shift = T.min() - rep.base
        F = oracles.random_graph(rng, t + rng.randint(0, 3), 0.4)
        bf = BoundariedGraph(F, {i: i + 1 for i in range(t)})
        naive = oracles.NAIVE_OPT[name]
        assert naive(glue_u(bf, bg)) == naive(glue_u(bf, rep.boundaried())) + shift
