"""Acceptance suite: one test per criterion, numbered 1 to 10."""

import itertools
import math
import random

import networkx as nx
import pytest

from dynprot.automata import exact_treewidth, internal_treewidth
from dynprot.chips import ChipIndex, ChipParams, brute_force_chips, brute_force_semi_mergeable
from dynprot.cli import bench_stream
from dynprot.engine import Engine, EngineConfig, EngineError
from dynprot.generators import generate, mixed_insert_delete
from dynprot.hypergraph import AddHyperedge, AddVertex, DeleteHyperedge, DeleteVertex, support_hypergraph
from dynprot.kernelplug import INF, BoundariedGraph, default_store, glue_u, table_of, get_plugin
from dynprot.verify import lipschitz_check, tw_mod_eta, validate_decomposition
from dynprot.welllinked import is_well_linked, partition_well_linked, well_linked_number

import oracles
from conftest import REPORT

FUZZ_STREAMS = 100
FUZZ_LENGTH = 100
KERNEL_STREAMS = 50
CHIP_UPDATES = 10_000
WL_HYPERGRAPHS = 1000
DEPTH_SIZES = (2 ** 8, 2 ** 10, 2 ** 12)
DEPTH_K_CEILING = 8.0
WORK_RATIO_CEILING = 4.0
GLUE_CHECKS = 200


# shared runs ------------------------------------------------------------------


@pytest.fixture(scope="module")
def fuzz_results():
    """Run the fuzz streams in paranoid mode once, recording structural
    failures and run-repair mismatches separately."""
    rnd = random.Random(1000)
    structural, repair = [], []
    steps = 0
    max_n = 0
    for s in range(FUZZ_STREAMS):
        n = rnd.randint(10, 200)
        E = Engine(EngineConfig(paranoid=True))
        for i, op in enumerate(mixed_insert_delete(n, seed=s, length=FUZZ_LENGTH)):
            try:
                E.apply(op)
            except EngineError as exc:
                structural.append((s, i, op, str(exc)))
                break
            steps += 1
            max_n = max(max_n, E.num_vertices())
            v = validate_decomposition(E.sb, E.cfg.alpha)
            if not v.ok:
                structural.append((s, i, op, v.witness))
                break
            if i % 10 == 0:
                bad = independent_structure_check(E)
                if bad:
                    structural.append((s, i, op, bad))
                    break
            for name, runs in E.runs.items():
                fresh = runs.recompute_all()
                if set(fresh) != set(runs.state) or any(not runs.algebra.equal(fresh[t], runs.state[t])
                                                         for t in fresh):
                    repair.append((s, i, op, name))
    REPORT["criterion 1 fuzz"] = f"{FUZZ_STREAMS} streams, {steps} checked steps, max live |V| {max_n}"
    return structural, repair, steps


def independent_structure_check(E):
    """Adhesion, degree and per-node well-linkedness recomputed with the
    naive boundary oracle."""
    sb = E.sb
    h = sb.g
    alpha = E.cfg.alpha
    for t in sb.parent:
        if t == sb.root:
            continue
        L = sb.leaves_below(t)
        bd = oracles.naive_bd(h, L)
        if bd != set(sb.adh[t]):
            return f"adhesion of {t}"
        if len(bd) > alpha:
            return f"adhesion {len(bd)} at {t}"
        if t not in sb.leaf_edge:
            if len(sb.children[t]) > 2 ** (2 * alpha) + 1:
                return f"degree at {t}"
            if len(L) <= 10 and not oracles.naive_is_well_linked(h, L):
                return f"L[{t}] not well-linked"
    return ""


@pytest.fixture(scope="module")
def trend_runs():
    rows = {}
    for n in DEPTH_SIZES:
        ops = generate("random-planar-incremental", n, seed=1)
        assert all(op[0] in ("av", "ae") for op in ops)
        rows[n] = bench_stream(ops, EngineConfig())
    return rows


# criteria ----------------------------------------------------------------------


def test_criterion_01_invariant_fuzz(fuzz_results):
    structural, _, steps = fuzz_results
    assert steps > 0
    assert structural == []


def test_criterion_02_kernel_exactness():
    checked = 0
    for s in range(KERNEL_STREAMS):
        E = Engine()
        for op in mixed_insert_delete(18, seed=500 + s, length=60):
            E.apply(op)
            assert E.num_vertices() <= 18
            G = nx.Graph()
            G.add_nodes_from(E.graph_vertices())
            G.add_edges_from(E.graph_edges())
            for name, K in E.kernels.items():
                want = oracles.milp_opt(name, G)
                assert oracles.milp_opt(name, K.graph()) + K.delta == want, (s, op, name)
                checked += 1
    REPORT["criterion 2 kernel checks"] = checked


def test_criterion_03_chip_index_equivalence():
    rng = oracles.rng(3000)
    params = ChipParams(3, 6, 2)
    holder = [None]

    def oracle(Z, bd):
        # interior primal graph is a forest
        h = holder[0]
        g = nx.Graph()
        for e in Z:
            vs = [v for v in h.vertices_of(e) if v not in bd]
            g.add_nodes_from(vs)
            g.add_edges_from(itertools.combinations(vs, 2))
        return nx.is_forest(g) if g.number_of_nodes() else True

    updates = 0
    naive_checks = 0
    while updates < CHIP_UPDATES:
        h = oracles.random_hypergraph(rng, 7, rng.randint(0, 8))
        holder[0] = h
        idx = ChipIndex(params, oracle, h)
        holder[0] = idx.h
        for _ in range(200):
            H = idx.h
            E = sorted(H.edges())
            V = sorted(H.vertices())
            r = rng.random()
            if r < 0.4 and E:
                e = rng.choice(E)
                op = DeleteHyperedge(e, H.vertices_of(e))
            elif r < 0.5:
                free = [v for v in V if not H.edges_of(v)]
                op = DeleteVertex(rng.choice(free)) if free else AddVertex(max(V, default=-1) + 1)
            elif r < 0.55 or not V:
                op = AddVertex(max(V, default=-1) + 1)
            elif len(E) < 12:
                op = AddHyperedge(H.fresh_label(), rng.sample(V, rng.randint(1, min(3, len(V)))))
            else:
                continue
            idx.apply([op])
            updates += 1
            assert idx.h.num_edges() <= 12
            assert idx.chip_set() == brute_force_chips(idx.h, params, oracle), updates
            if updates % 100 == 0:
                assert idx.chip_set() == oracles.naive_chips(idx.h, params.s2, params.k, oracle)
                naive_checks += 1
            if updates >= CHIP_UPDATES:
                break
    REPORT["criterion 3 chip updates"] = f"{updates} (naive cross-checks {naive_checks})"


def test_criterion_04_well_linkedness_suite():
    rng = oracles.rng(4000)
    sets = 0
    for _ in range(WL_HYPERGRAPHS):
        h = oracles.random_hypergraph(rng, rng.randint(3, 8), rng.randint(1, 12))
        E = sorted(h.edges())
        subsets = [E] + [rng.sample(E, rng.randint(1, len(E))) for _ in range(3)]
        for A in subsets:
            assert is_well_linked(h, A) == oracles.naive_is_well_linked(h, A)
            parts = partition_well_linked(h, A)
            assert len(parts) <= 2 ** oracles.naive_lam(h, A)
            assert sorted(e for p in parts for e in p) == sorted(A)
            assert all(oracles.naive_is_well_linked(h, p) for p in parts)
            sets += 1
    REPORT["criterion 4 sets"] = sets


def test_criterion_05_math_properties():
    rng = oracles.rng(5000)
    # uncrossing, union itw bound, containment, symmetry and submodularity
    for _ in range(300):
        h = oracles.random_hypergraph(rng, rng.randint(3, 7), rng.randint(2, 9))
        E = sorted(h.edges())
        lam = lambda X: oracles.naive_lam(h, X)
        for _ in range(6):
            A = set(rng.sample(E, rng.randint(1, len(E))))
            B = set(rng.sample(E, rng.randint(0, len(E))))
            if oracles.naive_is_well_linked(h, A):
                assert lam(B | A) <= lam(B) or lam(B - A) <= lam(B)
            assert lam(A) == lam(set(E) - A)
            assert lam(A | B) + lam(A & B) <= lam(A) + lam(B)
            if B:
                assert oracles.naive_itw(h, A | B) <= max(oracles.naive_itw(h, A), oracles.naive_itw(h, B)) + \
                    min(lam(A), lam(B))
            if oracles.naive_internally_connected(h, A) and A & B:
                if not oracles.naive_bd(h, B) & oracles.naive_interior(h, A):
                    assert A <= B
    # the package's itw agrees with the naive one on support hypergraphs
    for _ in range(60):
        G = oracles.random_graph(rng, rng.randint(2, 7), 0.5)
        h = support_hypergraph(G)
        E = sorted(h.edges())
        A = rng.sample(E, rng.randint(1, len(E)))
        assert internal_treewidth(h, A) == oracles.naive_itw(h, A)
    # wl <= 3 (tw + 1) on every graph with at most 7 vertices
    exact = 0
    for G in nx.graph_atlas_g():
        if G.number_of_nodes() == 0:
            continue
        tw = exact_treewidth(G)
        h = support_hypergraph(G)
        if 3 * (tw + 1) >= G.number_of_nodes():
            # every lambda is at most |V(G)|
            continue
        wl = well_linked_number(h, list(h.edges()), limit=14)
        assert wl <= 3 * (tw + 1)
        exact += 1
    # tw-mod changes by at most two per update
    lips = 0
    for _ in range(40):
        n = rng.randint(2, 14)
        G = oracles.random_graph(rng, n, rng.choice([0.2, 0.3, 0.4]))
        for eta in (1, 2):
            u, v = rng.sample(range(n), 2)
            op = ("de", u, v) if G.has_edge(u, v) else ("ae", u, v)
            assert lipschitz_check(G, op, eta).ok
            w = rng.randrange(n)
            assert lipschitz_check(G, ("dv", w), eta).ok
            base = tw_mod_eta(G, eta)
            H = G.copy()
            H.remove_node(w)
            assert abs(tw_mod_eta(H, eta) - base) <= 2
            lips += 1
    REPORT["criterion 5"] = f"wl bound computed exactly on {exact} atlas graphs, {lips} Lipschitz checks"


def test_criterion_06_run_repair_equivalence(fuzz_results):
    _, repair, steps = fuzz_results
    assert steps > 0
    assert repair == []


def test_criterion_07_depth_trend(trend_runs):
    ks = {n: r["max_depth"] / math.log2(n) for n, r in trend_runs.items()}
    K = max(ks.values())
    REPORT["criterion 7 depth"] = ", ".join(f"n={n}: depth {trend_runs[n]['max_depth']}, ratio {ks[n]:.3f}"
                                            for n in sorted(ks)) + f"; K = {K:.3f}"
    for n, r in trend_runs.items():
        assert r["max_depth"] <= K * math.log2(n)
    assert K < DEPTH_K_CEILING


def test_criterion_08_work_trend(trend_runs):
    small, big = trend_runs[DEPTH_SIZES[0]], trend_runs[DEPTH_SIZES[-1]]
    ratio = big["avg_work"] / small["avg_work"]
    REPORT["criterion 8 work"] = ", ".join(f"n={n}: {trend_runs[n]['avg_work']:.1f}/update"
                                           for n in sorted(trend_runs)) + f"; ratio {ratio:.3f}"
    assert ratio < WORK_RATIO_CEILING


def test_criterion_09_root_degree_control():
    # sixteen root children with boundary {0, 1}, one path 0-x-1 each
    E = Engine(EngineConfig(merge_budget=0))
    for v in range(18):
        E.add_vertex(v)
    for x in range(2, 18):
        E.add_edge(0, x)
        E.add_edge(x, 1)
    sb, g = E.sb, E.g
    for x in range(2, 18):
        leaves = [g.vertex_edge[x], g.pair_edge[(0, x)], g.pair_edge[(1, x)]]
        E.merge(sorted({sb.root_child_of(sb.edge_leaf[e]) for e in leaves}))
    dup = [c for c in sb.root_children() if sb.adh[c] == frozenset([0, 1])]
    assert len(dup) == 2 ** (E.cfg.omega + 2)
    E.cfg.merge_budget = 16
    before = E.root_degree()
    merges = E.reduce_root_degree()
    after = E.root_degree()
    assert len(merges) >= 1 and after < before
    assert E.check() is None
    # refusals on small instances are certified by brute force
    certified = 0
    for s in range(30):
        E = Engine(EngineConfig(s1=4, s2=16))
        for op in mixed_insert_delete(9, seed=900 + s, length=30):
            E.apply(op)
            rt = E.sb.root_torso
            if E.chips.query() is None and rt.num_edges() <= 16:
                assert brute_force_semi_mergeable(rt, E.chips.params, E.oracle) is None
                certified += 1
    assert certified > 0
    REPORT["criterion 9"] = f"root degree {before} -> {after} in {len(merges)} merges, {certified} refusals certified"


def _naive_key(name, rep):
    table = oracles.naive_table(name, rep.boundaried().graph, list(range(rep.t)))
    finite = [x for x in table.values() if x is not None]
    base = min(finite)
    return (rep.t, tuple(INF if table[s] is None else table[s] - base for s in sorted(table))), base


@pytest.mark.parametrize("name", ["vc", "ds"])
def test_criterion_10_representative_soundness(name):
    store = default_store(name)
    assert store.self_check() == []
    for key, rep in store.reps.items():
        assert _naive_key(name, rep) == (key, rep.base)
    p = get_plugin(name)
    rng = oracles.rng(10_000 + (name == "ds"))
    naive = oracles.NAIVE_OPT[name]
    for _ in range(GLUE_CHECKS):
        t = rng.randint(0, 3)
        n = rng.randint(max(t, 1), 6)
        G = oracles.random_graph(rng, n, rng.choice([0.3, 0.5]))
        bg = BoundariedGraph(G, {i: i + 1 for i in range(t)})
        T = table_of(p, bg)
        rep = store.lookup(T.key())
        assert rep is not None
        shift = T.min() - rep.base
        F = oracles.random_graph(rng, t + rng.randint(0, 4), 0.4)
        bf = BoundariedGraph(F, {i: i + 1 for i in range(t)})
        assert naive(glue_u(bf, bg)) == naive(glue_u(bf, rep.boundaried())) + shift
    REPORT[f"criterion 10 {name}"] = f"{len(store.reps)} stored classes verified, {GLUE_CHECKS} glue checks"
