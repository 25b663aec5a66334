"""Brute-force oracles and structural validators."""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx

from .automata import exact_treewidth, internal_treewidth, treewidth_at_most
from .balancing import node_well_linked
from .chips import brute_force_chips
from .superbranch import ProtrusionDecomposition, SuperbranchDecomposition
from .welllinked import SizeLimitExceeded, is_well_linked, well_linked_number


class Verdict:
    """Pass/fail with a human-readable witness for failures."""

    __slots__ = ("ok", "witness", "checked")

    def __init__(self, ok: bool = True, witness: str = "", checked: Iterable[str] = ()):
        self.ok = ok
        self.witness = witness
        self.checked = list(checked)

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return "Verdict(pass)" if self.ok else f"Verdict(fail: {self.witness})"


class _Fail(Exception):
    pass


def _need(cond: bool, witness: str) -> None:
    if not cond:
        raise _Fail(witness)


def _as_graph(G) -> nx.Graph:
    if isinstance(G, nx.Graph):
        return G
    vertices, edges = G
    g = nx.Graph()
    g.add_nodes_from(vertices)
    g.add_edges_from(edges)
    return g


# Exact optima ---------------------------------------------------------------


def opt_vc(G, limit: int = 40) -> int:
    """Minimum vertex cover by branching on a maximum-degree vertex."""
    g = _as_graph(G)
    if g.number_of_nodes() > limit:
        raise SizeLimitExceeded(g.number_of_nodes())
    adj = {v: set(g.neighbors(v)) - {v} for v in g.nodes()}
    best = [len(adj)]

    def rec(adj, size):
        if size >= best[0]:
            return
        adj = {v: set(ns) for v, ns in adj.items() if ns}
        # degree-one rule: take the neighbour
        changed = True
        while changed:
            changed = False
            for v in list(adj):
                if v in adj and len(adj[v]) == 1:
                    (u,) = adj[v]
                    size += 1
                    for w in adj.pop(u):
                        adj[w].discard(u)
                        if not adj[w]:
                            del adj[w]
                    changed = True
        if size >= best[0]:
            return
        if not adj:
            best[0] = size
            return
        m = sum(len(ns) for ns in adj.values()) // 2
        dmax = max(len(ns) for ns in adj.values())
        if size + -(-m // dmax) >= best[0]:
            return
        v = max(adj, key=lambda x: (len(adj[x]), repr(x)))
        # v in the cover
        a1 = {x: ns - {v} for x, ns in adj.items() if x != v}
        rec(a1, size + 1)
        # all neighbours of v in the cover
        N = adj[v]
        a2 = {x: ns - N for x, ns in adj.items() if x not in N and x != v}
        rec(a2, size + len(N))

    rec(adj, 0)
    return best[0]


def opt_ds(G, limit: int = 40) -> int:
    """Minimum dominating set by branching on an undominated vertex with
    the fewest dominators."""
    g = _as_graph(G)
    n = g.number_of_nodes()
    if n > limit:
        raise SizeLimitExceeded(n)
    verts = sorted(g.nodes(), key=repr)
    idx = {v: i for i, v in enumerate(verts)}
    closed = [1 << i for i in range(n)]
    for u, v in g.edges():
        closed[idx[u]] |= 1 << idx[v]
        closed[idx[v]] |= 1 << idx[u]
    full = (1 << n) - 1
    maxcover = max((bin(c).count("1") for c in closed), default=1)
    best = [n]

    def rec(dom: int, allowed: int, size: int):
        if dom == full:
            best[0] = min(best[0], size)
            return
        left = n - bin(dom).count("1")
        if size + -(-left // maxcover) >= best[0]:
            return
        # undominated vertex with the fewest candidate dominators
        pick, cands = -1, None
        m = full & ~dom
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            c = closed[i] & allowed
            k = bin(c).count("1")
            if cands is None or k < bin(cands).count("1"):
                pick, cands = i, c
                if k <= 1:
                    break
        if not cands:
            return
        order = []
        c = cands
        while c:
            low = c & -c
            j = low.bit_length() - 1
            c ^= low
            order.append(j)
        order.sort(key=lambda j: -bin(closed[j] & ~dom).count("1"))
        banned = 0
        for j in order:
            rec(dom | closed[j], allowed & ~banned & ~(1 << j), size + 1)
            banned |= 1 << j

    rec(0, full, 0)
    return best[0]


def opt(plugin: str, G) -> int:
    if plugin == "vc":
        return opt_vc(G)
    if plugin == "ds":
        return opt_ds(G)
    raise ValueError(f"unknown plugin {plugin!r}")


def tw_mod_eta(G, eta: int, limit: int = 18) -> int:
    """Smallest X with tw(G - X) <= eta, smallest sizes first."""
    g = _as_graph(G)
    n = g.number_of_nodes()
    if n > limit:
        raise SizeLimitExceeded(n)
    verts = sorted(g.nodes(), key=repr)
    for k in range(n + 1):
        for X in itertools.combinations(verts, k):
            h = g.copy()
            h.remove_nodes_from(X)
            if treewidth_at_most(h, eta):
                return k
    return n


def lipschitz_check(G, op: Tuple, eta: int) -> Verdict:
    """tw-mod stays within the allowed window across one update.

    For op on a vertex v (``av``/``dv``) compare G with and without v;
    for an edge (``ae``/``de``) with and without the edge. Deletions never
    increase the value; insertions raise it by at most 1 for vertices and
    2 for edges.
    """
    g = _as_graph(G).copy()
    kind = op[0]
    if kind in ("av", "dv"):
        v = op[1]
        big = g.copy()
        big.add_node(v)
        small = big.copy()
        small.remove_node(v)
        bound = 1
    elif kind in ("ae", "de"):
        u, v = op[1], op[2]
        big = g.copy()
        big.add_edge(u, v)
        small = big.copy()
        small.remove_edge(u, v)
        bound = 2
    else:
        raise ValueError(f"unknown operation {kind!r}")
    a = tw_mod_eta(small, eta)
    b = tw_mod_eta(big, eta)
    if not a <= b <= a + bound:
        return Verdict(False, f"tw-mod {a} without, {b} with {op}")
    return Verdict(True)


# Decomposition validation -----------------------------------------------------


def _check_structure(sb: SuperbranchDecomposition) -> None:
    g = sb.g
    _need(sb.parent.get(sb.root, 0) is None, "root has a parent")
    for t, p in sb.parent.items():
        if p is not None:
            _need(t in sb.children[p], f"node {t} missing from children of {p}")
    for t, ch in sb.children.items():
        for c in ch:
            _need(sb.parent.get(c) == t, f"child {c} of {t} has parent {sb.parent.get(c)}")
        if t != sb.root and t not in sb.leaf_edge:
            _need(len(ch) >= 2, f"internal node {t} has {len(ch)} children")
        if t in sb.leaf_edge:
            _need(not ch, f"leaf {t} has children")
    _need(set(sb.edge_leaf) == g.edge_set(), "leaves do not biject with hyperedges")
    for e, l in sb.edge_leaf.items():
        _need(sb.leaf_edge.get(l) == e, f"leaf map broken at hyperedge {e}")
    # reachability from the root
    seen = set(sb.subtree_nodes(sb.root))
    _need(seen == set(sb.parent), "nodes unreachable from the root")


def _check_bookkeeping(sb: SuperbranchDecomposition) -> Dict[int, List[int]]:
    """Adhesions, leaf counts, heights and EL against recomputation."""
    g = sb.g
    vo = g.vertices_of
    leaves: Dict[int, List[int]] = {}
    order = sorted(sb.parent, key=lambda t: -sb.depth_of(t))
    EL: Dict[int, Set[int]] = {}
    for t in order:
        if t in sb.leaf_edge:
            e = sb.leaf_edge[t]
            leaves[t] = [e]
            EL[t] = {e} if len(vo(e)) == 2 else set()
            height = 0
        else:
            leaves[t] = [e for c in sb.children[t] for e in leaves[c]]
            el = set()
            for c in sb.children[t]:
                a = g.bd(leaves[c])
                el |= {e for e in EL[c] if all(v in a for v in vo(e))}
            EL[t] = el
            height = 1 + max((sb.height[c] for c in sb.children[t]), default=-1)
        if t == sb.root:
            _need(EL[t] == set(sb.edges_r), "edges(r) differs from recomputation")
            continue
        adh = frozenset(g.bd(leaves[t]))
        _need(sb.adh[t] == adh, f"adhesion of {t} is {sorted(sb.adh[t])}, expected {sorted(adh)}")
        _need(sb.nleaves[t] == len(leaves[t]), f"leaf count of {t}")
        _need(sb.height[t] == height, f"height of {t}")
        _need(sb.EL[t] == frozenset(EL[t]), f"EL of {t} differs from recomputation")
    _need(abs(sb.phi - sb.potential()) < 1e-6, f"potential drift {sb.phi} vs {sb.potential()}")
    return leaves


def _check_root_torso(sb: SuperbranchDecomposition) -> None:
    rt = sb.root_torso
    want = {sb.label[c]: sb.adh[c] for c in sb.children[sb.root]}
    _need(rt.edge_set() == set(want), "root torso labels differ from root children")
    for lab, a in want.items():
        _need(frozenset(rt.vertices_of(lab)) == a, f"root torso hyperedge {lab}")
        _need(sb.label_node.get(lab) in sb.children[sb.root], f"label {lab} maps to a non-root-child")
    verts = set().union(*want.values()) if want else set()
    _need(rt.vertex_set() == verts, "root torso vertex set")
    for t in sb.parent:
        if t != sb.root:
            _need(sb.label_node.get(sb.label[t]) == t, f"label of {t} not indexed")


def _check_bounds(sb: SuperbranchDecomposition, alpha: int) -> None:
    D = 2 ** (2 * alpha) + 1
    for t in sb.parent:
        if t == sb.root:
            continue
        _need(len(sb.adh[t]) <= alpha, f"adhesion {len(sb.adh[t])} > {alpha} at node {t}")
        if t not in sb.leaf_edge:
            _need(len(sb.children[t]) <= D, f"degree {len(sb.children[t])} > {D} at node {t}")


def _check_well_linked(sb: SuperbranchDecomposition, leaves: Dict[int, List[int]], g_limit: int) -> None:
    for t in sb.parent:
        if t == sb.root or t in sb.leaf_edge:
            continue
        _need(node_well_linked(sb, t), f"children of node {t} are not well-linked in its torso")
        if len(leaves[t]) <= g_limit:
            _need(is_well_linked(sb.g, leaves[t]), f"L[{t}] is not well-linked")


def _check_protrusion(sb: SuperbranchDecomposition, leaves: Dict[int, List[int]]) -> None:
    g = sb.g
    pd = ProtrusionDecomposition(sb)
    nodes = pd.build()
    _need(pd.edges_partition_ok(), "edge annotations do not partition E(G)")
    # tree decomposition axioms
    occ: Dict[int, List] = {}
    for x, (bag, edges, par) in nodes.items():
        for v in bag:
            occ.setdefault(v, []).append(x)
        for e in edges:
            _need(set(g.vertices_of(e)) <= bag, f"edge {e} annotated at {x} outside its bag")
    for v in g.vertices():
        xs = occ.get(v, [])
        _need(xs, f"vertex {v} is in no bag")
        xset = set(xs)
        links = sum(1 for x in xs if nodes[x][2] in xset)
        _need(len(xs) - links == 1, f"bags containing vertex {v} are not connected")
    for e in g.edges():
        vs = set(g.vertices_of(e))
        _need(any(vs <= nodes[x][0] for x in occ[next(iter(vs))]), f"hyperedge {e} in no bag")
    # correspondence
    root = (sb.root, 0)
    _need(nodes[root][0] == sb.root_torso.vertex_set(), "root bag differs from V(torso(r))")
    kids = {x[0] for x, (_, _, par) in nodes.items() if par == root}
    _need(kids == set(sb.children[sb.root]), "root children differ between decompositions")
    below: Dict = {}
    for x, (_, _, par) in nodes.items():
        below.setdefault(par, []).append(x)
    for c in sb.children[sb.root]:
        top = (c, 1) if pd.chain_length(c) else (c, 0)
        stack, verts = [top], set()
        while stack:
            y = stack.pop()
            verts |= nodes[y][0]
            stack.extend(below.get(y, ()))
        _need(verts == g.vertex_union(leaves[c]), f"V(L[{c}]) differs from the protrusion bags")
    # normality
    for e in g.edges():
        vs = set(g.vertices_of(e))
        ok = any(vs <= nodes[x][0] for x in nodes if x != root)
        _need(ok, f"hyperedge {e} fits no non-root bag")


def _check_stamps(sb: SuperbranchDecomposition) -> None:
    for c in sb.children[sb.root]:
        lb = sb.label_batch.get(c)
        for t in sb.subtree_nodes(c):
            _need(sb.stamp.get(t, 0) <= lb, f"node {t} changed after the label of root child {c}")


def validate_decomposition(obj, alpha: Optional[int] = None, g_limit: int = 64) -> Verdict:
    """Full structural check of a decomposition (or of an engine, which adds
    run, kernel and chip checks)."""
    if hasattr(obj, "sb"):
        return validate_engine(obj, g_limit=g_limit)
    sb = obj
    alpha = sb.alpha if alpha is None else alpha
    checked = []
    try:
        _check_structure(sb)
        checked.append("structure")
        leaves = _check_bookkeeping(sb)
        checked.append("bookkeeping")
        _check_root_torso(sb)
        checked.append("root torso")
        _check_bounds(sb, alpha)
        checked.append("bounds")
        _check_well_linked(sb, leaves, g_limit)
        checked.append("well-linked")
        _check_protrusion(sb, leaves)
        checked.append("protrusion decomposition")
        _check_stamps(sb)
        checked.append("labels")
    except _Fail as f:
        return Verdict(False, str(f), checked)
    return Verdict(True, "", checked)


def validate_engine(engine, g_limit: int = 64, chip_limit: int = 12, itw_limit: int = 30,
                    wl_limit: int = 10) -> Verdict:
    v = validate_decomposition(engine.sb, engine.cfg.alpha, g_limit)
    if not v.ok:
        return v
    sb = engine.sb
    try:
        for name, runs in engine.runs.items():
            fresh = runs.recompute_all()
            _need(set(fresh) == set(runs.state), f"{name} runs cover different nodes")
            for t, q in fresh.items():
                _need(runs.algebra.equal(q, runs.state[t]), f"{name} state of node {t} differs from recomputation")
        v.checked.append("runs")
        from .kernelplug import Kernel
        for name, k in engine.kernels.items():
            fresh = Kernel.assemble(k.plugin, k.store, sb, engine.runs[name].state)
            _need(fresh.signature() == k.signature(), f"{name} kernel differs from reassembly")
        v.checked.append("kernels")
        engine.chips.check()
        rt = sb.root_torso
        _need(engine.chips.h.edge_set() == rt.edge_set(), "chip index mirrors a different torso")
        if rt.num_edges() <= chip_limit:
            want = brute_force_chips(rt, engine.chips.params, engine.oracle, limit=chip_limit)
            _need(want == engine.chips.chip_set(), "chip index differs from brute force")
            v.checked.append("chips")
        for Z in engine.chips.chip_set():
            leaves = [e for lab in Z for e in sb.leaves_below(sb.label_node[lab])]
            if len(sb.g.interior(leaves)) <= itw_limit:
                _need(internal_treewidth(sb.g, leaves) <= engine.cfg.omega,
                      f"chip {sorted(Z)} has internal treewidth above omega")
        v.checked.append("chip oracle")
        for c in sb.root_children():
            leaves = sb.leaves_below(c)
            if len(leaves) <= wl_limit:
                _need(well_linked_number(sb.g, leaves, limit=wl_limit) <= engine.cfg.c,
                      f"root child {c} has well-linked number above c")
        v.checked.append("root child wl")
    except _Fail as f:
        return Verdict(False, str(f), v.checked)
    return v


def wl_tw_bound_holds(graph, limit: int = 12) -> bool:
    """wl(H(G)) <= 3 (tw(G) + 1)."""
    from .hypergraph import support_hypergraph
    h = support_hypergraph(graph)
    return well_linked_number(h, list(h.edges()), limit=limit) <= 3 * (exact_treewidth(graph) + 1)
