import networkx as nx
import pytest

from dynprot.engine import Engine
from dynprot.generators import mixed_insert_delete
from dynprot.verify import lipschitz_check, opt, tw_mod_eta, validate_engine, wl_tw_bound_holds

import oracles


@pytest.mark.parametrize("G,vc,ds", [
    (nx.cycle_graph(4), 2, 2),
    (nx.empty_graph(5), 0, 5),
    (nx.complete_graph(4), 3, 1),
])
def test_opt_values(G, vc, ds):
    assert opt("vc", G) == vc
    assert opt("ds", G) == ds


def test_opt_matches_naive():
    rng = oracles.rng(51)
    for _ in range(60):
        G = oracles.random_graph(rng, rng.randint(0, 9), rng.choice([0.2, 0.4]))
        assert opt("vc", G) == oracles.naive_vc(G)
        assert opt("ds", G) == oracles.naive_ds(G)


def test_opt_matches_integer_program_on_larger_graphs():
    rng = oracles.rng(53)
    for _ in range(30):
        G = oracles.random_graph(rng, rng.randint(10, 16), 0.25)
        for name in ("vc", "ds"):
            assert opt(name, G) == oracles.milp_opt(name, G)


def test_opt_unknown_plugin():
    with pytest.raises(ValueError):
        opt("nope", nx.path_graph(2))


def test_tw_mod_small_treewidth_is_zero():
    assert tw_mod_eta(nx.path_graph(6), 1) == 0
    assert tw_mod_eta(nx.cycle_graph(5), 2) == 0


def test_tw_mod_k5():
    assert tw_mod_eta(nx.complete_graph(5), 3) == 1


def test_tw_mod_grid():
    # 2, frozen from the enumeration oracle
    assert tw_mod_eta(nx.grid_2d_graph(4, 4), 2) == 2


def test_tw_mod_matches_naive():
    rng = oracles.rng(52)
    for _ in range(30):
        G = oracles.random_graph(rng, rng.randint(1, 8), 0.5)
        for eta in (1, 2):
            assert tw_mod_eta(G, eta) == oracles.naive_tw_mod(G, eta)


def test_lipschitz_isolated_vertex():
    G = nx.cycle_graph(4)
    assert lipschitz_check(G, ("dv", 9), 1).ok
    assert tw_mod_eta(G, 1) == tw_mod_eta(nx.union(G, nx.empty_graph([9])), 1)


def test_lipschitz_edge_deletion_nonincreasing():
    G = nx.complete_graph(5)
    assert lipschitz_check(G, ("de", 0, 1), 2).ok
    H = G.copy()
    H.remove_edge(0, 1)
    assert tw_mod_eta(H, 2) <= tw_mod_eta(G, 2)


def test_lipschitz_unknown_op():
    with pytest.raises(ValueError):
        lipschitz_check(nx.path_graph(2), ("xx", 0), 1)


def test_engine_validates_and_fault_is_caught():
    E = Engine()
    for op in mixed_insert_delete(12, 7, length=40):
        E.apply(op)
    v = validate_engine(E)
    assert v.ok and "runs" in v.checked and "kernels" in v.checked
    # corrupt one stored adhesion
    sb = E.sb
    t = next(c for c in sb.root_children() if sb.adh[c])
    sb.adh[t] = frozenset(list(sb.adh[t])[1:])
    v = validate_engine(E)
    assert not v.ok and v.witness


def test_stale_run_state_is_caught():
    E = Engine()
    for op in mixed_insert_delete(12, 8, length=40):
        E.apply(op)
    runs = E.runs["vc"]
    t = next(c for c in E.sb.root_children() if c not in E.sb.leaf_edge)
    runs.state[t] = runs.state[E.sb.root_children()[0]] if runs.state[t] != runs.state[E.sb.root_children()[0]] \
        else runs.algebra.empty()
    v = validate_engine(E)
    assert not v.ok and "vc" in v.witness


def test_wl_tw_bound_small_graphs():
    for G in (nx.path_graph(5), nx.cycle_graph(5), nx.complete_graph(4), nx.star_graph(4)):
        assert wl_tw_bound_holds(G)
