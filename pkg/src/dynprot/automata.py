"""Tree-decomposition automata, runs and the internal-treewidth decider.

Two layers live here:

* a generic automaton over annotated binary tree decompositions
  (``TDAutomaton``, ``compute_run``, ``repair_run``) built from a node
  algebra with introduce, edge, forget and join steps;
* per-node states on a superbranch decomposition (``NodeRuns``). The state
  of node t summarizes the graph of L[t] with boundary adh(t). It is folded
  over the children of t, which is the same computation as running the
  automaton along the binary chain that replaces t in the corresponding
  tree decomposition.

The internal-treewidth oracle keeps, per node, a reduced boundaried graph:
interior vertices that are almost simplicial with degree at most omega are
eliminated. Elimination commutes with gluing and with deleting boundary
vertices, so gluing states, deleting the boundary and reducing again decides
tw <= omega exactly for omega <= 2.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Set, Tuple

import networkx as nx

from .welllinked import SizeLimitExceeded


# Exact treewidth ---------------------------------------------------------


def _adj_from(graph) -> Dict[Hashable, Set[Hashable]]:
    if isinstance(graph, dict):
        return {v: set(ns) for v, ns in graph.items()}
    return {v: set(graph.neighbors(v)) for v in graph.nodes()}


def _components(adj):
    seen = set()
    for s in adj:
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        seen.add(s)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        yield comp


def _eliminate(adj, v):
    ns = adj.pop(v)
    for a in ns:
        adj[a].discard(v)
    for a in ns:
        adj[a] |= ns - {a}


def _reduce_low(adj, low: int) -> int:
    """Eliminate simplicial and almost simplicial vertices of degree <= low.

    Returns the largest degree eliminated; the treewidth of the input is the
    maximum of that value and the treewidth of what remains, as long as
    low is a lower bound for the answer.
    """
    best = -1
    changed = True
    while changed:
        changed = False
        for v in sorted(adj, key=lambda x: (len(adj[x]), repr(x))):
            ns = adj[v]
            if len(ns) > low:
                break
            if _almost_simplicial(adj, v):
                best = max(best, len(ns))
                _eliminate(adj, v)
                changed = True
                break
    return best


def _almost_simplicial(adj, v) -> bool:
    ns = list(adj[v])
    if len(ns) <= 2:
        return True
    bad = None
    for i, a in enumerate(ns):
        for b in ns[i + 1:]:
            if b not in adj[a]:
                if bad is None:
                    bad = {a, b}
                else:
                    bad &= {a, b}
                    if not bad:
                        return False
    return True


def _degeneracy(adj) -> int:
    a = {v: set(ns) for v, ns in adj.items()}
    best = 0
    while a:
        v = min(a, key=lambda x: (len(a[x]), repr(x)))
        best = max(best, len(a[v]))
        for w in a.pop(v):
            a[w].discard(v)
    return best


def _min_fill_ub(adj) -> int:
    a = {v: set(ns) for v, ns in adj.items()}
    width = 0
    while a:
        def fill(v):
            ns = list(a[v])
            return sum(1 for i, x in enumerate(ns) for y in ns[i + 1:] if y not in a[x])
        v = min(a, key=lambda x: (fill(x), len(a[x]), repr(x)))
        width = max(width, len(a[v]))
        _eliminate(a, v)
    return width


def _tw_dp(adj, lb: int, ub: int) -> int:
    """Subset dynamic programming over elimination prefixes.

    TW(S) is the best width of eliminating S first; Q(S, v) is the number
    of vertices outside S + v reachable from v through S.
    """
    verts = sorted(adj, key=repr)
    n = len(verts)
    idx = {v: i for i, v in enumerate(verts)}
    nb = [0] * n
    for v in verts:
        for w in adj[v]:
            nb[idx[v]] |= 1 << idx[w]

    def q(S: int, i: int) -> int:
        seen = 1 << i
        stack = [i]
        out = 0
        while stack:
            x = stack.pop()
            m = nb[x] & ~seen
            while m:
                low = m & -m
                j = low.bit_length() - 1
                m ^= low
                seen |= low
                if S >> j & 1:
                    stack.append(j)
                else:
                    out |= low
        return bin(out).count("1")

    for k in range(max(lb, 0), ub):
        # can we eliminate everything with width <= k?
        layer = {0}
        ok = False
        for _ in range(n):
            nxt = set()
            for S in layer:
                for i in range(n):
                    if S >> i & 1:
                        continue
                    if q(S, i) <= k:
                        nxt.add(S | 1 << i)
            if not nxt:
                break
            layer = nxt
            if (1 << n) - 1 in layer:
                ok = True
                break
            if len(layer) > 400000:
                raise SizeLimitExceeded(n)
        if ok or n == 0:
            return k
    return ub


def exact_treewidth(graph, limit: int = 40) -> int:
    """Exact treewidth of a small graph; -1 for the empty graph."""
    adj = _adj_from(graph)
    if not adj:
        return -1
    best = 0 if adj else -1
    for comp in _components(adj):
        sub = {v: adj[v] & comp for v in comp}
        best = max(best, _tw_component(sub, limit))
    return best


def _tw_component(adj, limit: int) -> int:
    if len(adj) == 1:
        return 0
    low = _degeneracy(adj)
    low = max(low, 1)
    a = {v: set(ns) for v, ns in adj.items()}
    red = _reduce_low(a, low)
    if not a:
        return max(red, 0) if red >= 0 else 0
    best = max(red, 0)
    for comp in list(_components(a)):
        sub = {v: a[v] & comp for v in comp}
        if len(sub) > limit:
            raise SizeLimitExceeded(len(sub))
        lb = max(_degeneracy(sub), low, best)
        ub = _min_fill_ub(sub)
        if ub <= lb:
            best = max(best, ub)
            continue
        best = max(best, _tw_dp(sub, lb, ub))
    return best


def treewidth_by_orderings(graph) -> int:
    """Treewidth by trying every elimination ordering (oracle, tiny graphs)."""
    adj = _adj_from(graph)
    if not adj:
        return -1
    verts = sorted(adj, key=repr)
    best = len(verts) - 1
    for perm in itertools.permutations(verts):
        a = {v: set(ns) for v, ns in adj.items()}
        width = 0
        for v in perm:
            width = max(width, len(a[v]))
            if width >= best:
                break
            _eliminate(a, v)
        best = min(best, width)
    return best


def treewidth_at_most(graph, k: int) -> bool:
    """Decide tw <= k, with reduction-only fast paths for k <= 2."""
    adj = _adj_from(graph)
    if not adj:
        return True
    if k < 0:
        return False
    if k <= 2:
        a = {v: set(ns) for v, ns in adj.items()}
        _reduce_low(a, k)
        return not a
    return exact_treewidth(adj) <= k


# Generic automata over annotated tree decompositions --------------------


class Algebra:
    """Node algebra: states over a tracked vertex tuple, closed under
    introduce, edge, forget and join."""

    def empty(self):
        raise NotImplementedError

    def introduce(self, q, v):
        raise NotImplementedError

    def add_edge(self, q, u, v):
        raise NotImplementedError

    def forget(self, q, v):
        raise NotImplementedError

    def join(self, q1, q2):
        raise NotImplementedError

    def tracked(self, q) -> Tuple:
        raise NotImplementedError

    def equal(self, q1, q2) -> bool:
        return q1 == q2


class TDAutomaton:
    """A deterministic automaton of width ``width`` derived from an algebra.

    iota(bag, edges) is the state of a leaf node; delta(X, Y, Z, J, qy, qz)
    the state of a node with bag X and edge set J whose children have bags
    Y, Z (Z and qz are None for a single child).
    """

    def __init__(self, algebra: Algebra, width: int, accept: Optional[Callable] = None):
        self.algebra = algebra
        self.width = width
        self.accept = accept or (lambda q: True)

    def _check(self, bag):
        if len(bag) > self.width + 1:
            raise ValueError(f"bag of size {len(bag)} exceeds width {self.width}")

    def iota(self, bag, edges):
        self._check(bag)
        A = self.algebra
        q = A.empty()
        for v in sorted(bag, key=repr):
            q = A.introduce(q, v)
        for u, v in edges:
            q = A.add_edge(q, u, v)
        return q

    def delta(self, X, Y, Z, J, qy, qz):
        self._check(X)
        A = self.algebra
        q = qy if qz is None else A.join(qy, qz)
        have = set(A.tracked(q))
        for v in sorted(set(X) - have, key=repr):
            q = A.introduce(q, v)
        for u, v in J:
            q = A.add_edge(q, u, v)
        for v in sorted(have - set(X), key=repr):
            q = A.forget(q, v)
        return q


class AnnotatedTD:
    """A rooted annotated tree decomposition with at most two children per
    node: bag[x], edges[x] (pairs) and parent[x]."""

    def __init__(self):
        self.bag: Dict[Hashable, FrozenSet] = {}
        self.edges: Dict[Hashable, Tuple] = {}
        self.parent: Dict[Hashable, Optional[Hashable]] = {}
        self.children: Dict[Hashable, List[Hashable]] = {}

    def add_node(self, x, bag, edges=(), parent=None):
        self.bag[x] = frozenset(bag)
        self.edges[x] = tuple(tuple(e) for e in edges)
        self.parent[x] = parent
        self.children.setdefault(x, [])
        if parent is not None:
            self.children.setdefault(parent, []).append(x)
            if len(self.children[parent]) > 2:
                raise ValueError("annotated decompositions here are binary")

    def root(self):
        roots = [x for x, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise ValueError("expected exactly one root")
        return roots[0]

    def postorder(self):
        out = []
        stack = [(self.root(), False)]
        while stack:
            x, done = stack.pop()
            if done:
                out.append(x)
                continue
            stack.append((x, True))
            for c in self.children[x]:
                stack.append((c, False))
        return out

    def width(self) -> int:
        return max((len(b) for b in self.bag.values()), default=0) - 1


def compute_run(aut: TDAutomaton, td: AnnotatedTD) -> Dict:
    run: Dict = {}
    for x in td.postorder():
        run[x] = _node_state(aut, td, x, run)
    return run


def _node_state(aut, td, x, run):
    ch = td.children[x]
    if not ch:
        return aut.iota(td.bag[x], td.edges[x])
    y = ch[0]
    z = ch[1] if len(ch) > 1 else None
    return aut.delta(td.bag[x], td.bag[y], td.bag[z] if z is not None else None, td.edges[x],
                     run[y], run[z] if z is not None else None)


def repair_run(aut: TDAutomaton, td: AnnotatedTD, run: Dict, dirty: Iterable) -> Dict:
    """Recompute states bottom-up from dirty nodes; stop where unchanged.

    Returns the delta {node: new state}; ``run`` is updated in place.
    """
    depth = {}
    for x in dirty:
        d, y = 0, x
        while td.parent[y] is not None:
            y = td.parent[y]
            d += 1
        depth[x] = d
    pending = set(depth)
    delta = {}
    order = sorted(pending, key=lambda x: -depth[x])
    while order:
        x = order.pop(0)
        new = _node_state(aut, td, x, run)
        old = run.get(x)
        if old is not None and aut.algebra.equal(old, new) and x not in delta:
            # unchanged: ancestors only need recomputation if another path asks
            run[x] = new
            continue
        run[x] = new
        delta[x] = new
        p = td.parent[x]
        if p is not None and p not in pending:
            pending.add(p)
            depth[p] = depth[x] - 1
            order.append(p)
            order.sort(key=lambda y: -depth[y])
    return delta


# Per-node states on a superbranch decomposition --------------------------


class NodeRuns:
    """Maintained algebra states for every non-root superbranch node.

    The state of t covers the graph with vertex set V(L[t]) and the graph
    edges of L[t] that do not have both ends in adh(t), with boundary
    adh(t). Leaves are built from their hyperedge; an internal node folds
    its children in a greedy order (fewest new vertices first), adding each
    child's pending edges right after it and forgetting vertices as soon as
    they are no longer needed.
    """

    def __init__(self, algebra: Algebra, sb):
        self.algebra = algebra
        self.sb = sb
        self.state: Dict[int, object] = {}
        self.evaluations = 0

    def leaf_state(self, t: int):
        A = self.algebra
        sb = self.sb
        e = sb.leaf_edge[t]
        vs = sb.g.vertices_of(e)
        q = A.empty()
        for v in vs:
            q = A.introduce(q, v)
        a = sb.adh[t]
        if len(vs) == 2 and not all(v in a for v in vs):
            q = A.add_edge(q, vs[0], vs[1])
        for v in vs:
            if v not in a:
                q = A.forget(q, v)
        return q

    def fold_order(self, t: int) -> List[int]:
        sb = self.sb
        kids = list(sb.children[t])
        if len(kids) <= 2:
            return kids
        count: Dict[int, int] = {}
        for c in kids:
            for v in sb.adh[c]:
                count[v] = count.get(v, 0) + 1
        order: List[int] = []
        have: Set[int] = set()
        left = set(kids)
        pos = {c: i for i, c in enumerate(kids)}
        while left:
            c = min(left, key=lambda x: (len(sb.adh[x] - have), -len(sb.adh[x] & have), pos[x]))
            order.append(c)
            left.discard(c)
            have |= sb.adh[c]
        return order

    def node_state(self, t: int):
        sb = self.sb
        if t in sb.leaf_edge:
            return self.leaf_state(t)
        A = self.algebra
        order = self.fold_order(t)
        remaining: Dict[int, int] = {}
        for c in order:
            for v in sb.adh[c]:
                remaining[v] = remaining.get(v, 0) + 1
        keep = sb.adh.get(t, frozenset())
        vo = sb.g.vertices_of
        q = None
        for c in order:
            qc = self.state[c]
            q = qc if q is None else A.join(q, qc)
            for e in sorted(sb.pending(c)):
                u, v = vo(e)
                if not (u in keep and v in keep):
                    q = A.add_edge(q, u, v)
            for v in sorted(sb.adh[c], key=repr):
                remaining[v] -= 1
                if remaining[v] == 0 and v not in keep:
                    q = A.forget(q, v)
        return q if q is not None else A.empty()

    def recompute_all(self) -> Dict[int, object]:
        sb = self.sb
        out: Dict[int, object] = {}
        saved = self.state
        self.state = out
        try:
            order = sorted((t for t in sb.parent if t != sb.root), key=lambda x: -sb.depth_of(x))
            for t in order:
                out[t] = self.node_state(t)
        finally:
            self.state = saved
        return out

    def repair(self, trace: List[int], dirty: Set[int]) -> Set[int]:
        """Recompute along the trace (deepest first). A node is recomputed if
        it is structurally dirty or a child state changed. Returns the nodes
        whose state changed."""
        sb = self.sb
        for t in list(self.state):
            if t not in sb.parent:
                del self.state[t]
        changed: Set[int] = set()
        for t in trace:
            if t == sb.root:
                continue
            need = t in dirty or t not in self.state or any(c in changed for c in sb.children[t])
            if not need:
                continue
            new = self.node_state(t)
            self.evaluations += 1
            old = self.state.get(t)
            self.state[t] = new
            if old is None or not self.algebra.equal(old, new):
                changed.add(t)
        return changed


# Internal treewidth states -------------------------------------------------


class ReducedGraph:
    """A boundaried graph with interior vertices eliminated where safe.

    ``adj`` maps vertices to neighbour sets and ``boundary`` is the tracked
    vertex set. ``fail`` marks states whose interior already forces
    treewidth above omega.
    """

    __slots__ = ("adj", "boundary", "fail")

    def __init__(self, adj=None, boundary=frozenset(), fail=False):
        self.adj = adj or {}
        self.boundary = frozenset(boundary)
        self.fail = fail

    def key(self):
        if self.fail:
            return ("fail",)
        return (tuple(sorted(self.boundary)),
                tuple(sorted((v, tuple(sorted(ns))) for v, ns in self.adj.items())))

    def __eq__(self, other):
        return isinstance(other, ReducedGraph) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.fail:
            return "ReducedGraph(fail)"
        return f"ReducedGraph(bd={sorted(self.boundary)}, n={len(self.adj)})"


class ItwAlgebra(Algebra):
    """Reduced-graph states deciding internal treewidth <= omega."""

    def __init__(self, omega: int = 2):
        self.omega = omega

    def empty(self):
        return ReducedGraph()

    def tracked(self, q):
        return tuple(sorted(q.boundary))

    def introduce(self, q, v):
        if q.fail:
            return q
        adj = {x: set(ns) for x, ns in q.adj.items()}
        adj.setdefault(v, set())
        return ReducedGraph(adj, q.boundary | {v})

    def add_edge(self, q, u, v):
        if q.fail:
            return q
        adj = {x: set(ns) for x, ns in q.adj.items()}
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
        return ReducedGraph(adj, q.boundary | {u, v})

    def forget(self, q, v):
        if q.fail:
            return q
        adj = {x: set(ns) for x, ns in q.adj.items()}
        return self._reduce(adj, q.boundary - {v})

    def join(self, q1, q2):
        if q1.fail or q2.fail:
            return ReducedGraph(fail=True)
        adj = {x: set(ns) for x, ns in q1.adj.items()}
        for x, ns in q2.adj.items():
            adj.setdefault(x, set()).update(ns)
        return ReducedGraph(adj, q1.boundary | q2.boundary)

    def _reduce(self, adj, boundary):
        w = self.omega
        changed = True
        while changed:
            changed = False
            for v in sorted((x for x in adj if x not in boundary), key=lambda x: (len(adj[x]), x)):
                if len(adj[v]) > w:
                    break
                if _almost_simplicial(adj, v):
                    _eliminate(adj, v)
                    changed = True
                    break
        interior = {x for x in adj if x not in boundary}
        if interior and _has_core(adj, interior, w + 1):
            return ReducedGraph(fail=True)
        return ReducedGraph(adj, boundary)

    def decide(self, q, drop: Iterable = ()) -> bool:
        """tw of the state's graph with the ``drop`` vertices deleted is
        <= omega; the other tracked vertices count as ordinary vertices."""
        if q.fail:
            return False
        adj = {x: set(ns) for x, ns in q.adj.items()}
        for v in set(drop):
            if v in adj:
                for w in adj.pop(v):
                    if w in adj:
                        adj[w].discard(v)
        if not adj:
            return True
        if self.omega <= 2:
            _reduce_low(adj, self.omega)
            return not adj
        try:
            return exact_treewidth(adj) <= self.omega
        except SizeLimitExceeded:
            return False


def _has_core(adj, verts: Set, k: int) -> bool:
    """Non-empty k-core of the subgraph induced on ``verts``."""
    deg = {v: len(adj[v] & verts) for v in verts}
    alive = set(verts)
    stack = [v for v in verts if deg[v] < k]
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for w in adj[v]:
            if w in alive:
                deg[w] -= 1
                if deg[w] < k:
                    stack.append(w)
    return bool(alive)


def itw_decide_states(alg: ItwAlgebra, states: Iterable[ReducedGraph], extra_edges: Iterable[Tuple] = (),
                      boundary: Iterable = ()) -> bool:
    """Glue child states plus edges, delete ``boundary`` and decide."""
    q = alg.empty()
    for s in states:
        q = alg.join(q, s)
        if q.fail:
            return False
    for u, v in extra_edges:
        q = alg.add_edge(q, u, v)
    return alg.decide(q, boundary)


def internal_treewidth(h, edges: Iterable[int], graph_edges: Callable[[int], Optional[Tuple]] = None) -> int:
    """itw of a set of hyperedges of a support hypergraph, by direct
    materialization: the treewidth of the graph induced on the interior."""
    A = list(edges)
    inner = h.interior(A)
    g = nx.Graph()
    g.add_nodes_from(inner)
    for e in A:
        vs = h.vertices_of(e)
        if len(vs) == 2 and vs[0] in inner and vs[1] in inner:
            g.add_edge(*vs)
    return exact_treewidth(g)


def prefix_assemble(aut: TDAutomaton, child_bags: List[FrozenSet], child_states: List, root_bag,
                    edges_between: Callable[[FrozenSet, FrozenSet], List[Tuple]]):
    """Fold child states along a chain s_1 .. s_{q-1} and up to a root.

    The chain node joining child i carries the union of the remaining bags;
    ``edges_between(done, bag)`` returns the edges to introduce at a chain
    node (edges of edges(r) with both ends in bag and not yet introduced).
    """
    if not child_states:
        return aut.iota(frozenset(root_bag), ())
    A = aut.algebra
    q = child_states[0]
    cur = frozenset(child_bags[0])
    for bag, st in zip(child_bags[1:], child_states[1:]):
        union = cur | frozenset(bag)
        q = A.join(q, st)
        for u, v in edges_between(cur, union):
            q = A.add_edge(q, u, v)
        cur = union
    return aut.delta(frozenset(root_bag), cur, None, tuple(edges_between(cur, frozenset(root_bag) | cur)), q, None)
