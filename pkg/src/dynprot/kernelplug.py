"""Problem plugins (vertex cover, dominating set), representative stores and
the kernel (K, Delta) maintained from the root children.

A plugin table over boundary vertices b_1 < ... < b_t maps every vector of
boundary states to the cheapest partial solution, counting boundary
vertices that are in the solution. Two boundaried graphs whose tables differ
by a constant are interchangeable in every context up to that constant, so
the normalized table serves as the class signature and the constant is the
shift.

Vertex cover states: 0 = out, 1 = in.
Dominating set states: 0 = black (in the set), 1 = white (not in the set,
dominated inside), 2 = grey (not in the set, no requirement inside).
"""

from __future__ import annotations

import io
import itertools
import os
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .automata import Algebra

INF = 1 << 40
_HALF = INF // 2

STORE_VERSION = 1


def _clip(arr: np.ndarray) -> np.ndarray:
    return np.where(arr >= _HALF, INF, arr)


class Table:
    """A plugin table over a sorted vertex tuple."""

    __slots__ = ("verts", "arr")

    def __init__(self, verts: Tuple, arr: np.ndarray):
        self.verts = tuple(verts)
        self.arr = arr

    def min(self) -> int:
        return int(self.arr.min())

    def normalized(self) -> np.ndarray:
        m = self.arr.min()
        if m >= _HALF:
            return self.arr.copy()
        return _clip(self.arr - m)

    def key(self) -> Tuple[int, Tuple[int, ...]]:
        return len(self.verts), tuple(int(x) for x in self.normalized().ravel())

    def __eq__(self, other):
        return (isinstance(other, Table) and self.verts == other.verts
                and self.arr.shape == other.arr.shape and bool(np.array_equal(self.arr, other.arr)))

    def __repr__(self):
        return f"Table({self.verts}, {self.arr.tolist()})"


class Plugin(Algebra):
    """Table algebra shared by the plugins."""

    name = ""
    q = 0
    intro: Sequence[int] = ()

    def empty(self):
        return Table((), np.zeros((), dtype=np.int64))

    def tracked(self, T):
        return T.verts

    def equal(self, a, b):
        return a == b

    def _pos(self, verts, v):
        return sorted(verts + (v,), key=_vkey).index(v)

    def introduce(self, T, v):
        if v in T.verts:
            return T
        verts = tuple(sorted(T.verts + (v,), key=_vkey))
        i = verts.index(v)
        add = np.array(self.intro, dtype=np.int64)
        arr = np.expand_dims(T.arr, i) + add.reshape([1] * i + [self.q] + [1] * (len(verts) - i - 1))
        return Table(verts, _clip(arr))

    def forget(self, T, v):
        i = T.verts.index(v)
        arr = np.take(T.arr, self.forget_states, axis=i).min(axis=i)
        return Table(T.verts[:i] + T.verts[i + 1:], arr)

    def _align(self, T, verts):
        arr = T.arr
        shape = []
        j = 0
        for v in verts:
            if j < len(T.verts) and T.verts[j] == v:
                shape.append(self.q)
                j += 1
            else:
                shape.append(1)
        return arr.reshape(shape)

    def join(self, A, B):
        verts = tuple(sorted(set(A.verts) | set(B.verts), key=_vkey))
        shared = set(A.verts) & set(B.verts)
        a = self._align(A, verts)
        b = self._align(B, verts)
        for i, v in enumerate(verts):
            if v in shared:
                a = np.take(a, self.join_left, axis=i)
                b = np.take(b, self.join_right, axis=i)
        c = a + b
        for i, v in enumerate(verts):
            if v in shared:
                c = self._join_reduce(c, i)
        return Table(verts, _clip(c))

    def graph_table(self, graph, boundary: Sequence) -> Table:
        """Table of a plain graph with the given boundary, via the algebra."""
        T = self.empty()
        for v in graph.nodes():
            T = self.introduce(T, v)
        for u, v in graph.edges():
            T = self.add_edge(T, u, v)
        bset = set(boundary)
        for v in list(graph.nodes()):
            if v not in bset:
                T = self.forget(T, v)
        return T


def _vkey(v):
    return (isinstance(v, str), v if not isinstance(v, str) else 0, str(v))


class VertexCover(Plugin):
    name = "vc"
    q = 2
    intro = (0, 1)
    forget_states = [0, 1]
    join_left = [0, 1]
    join_right = [0, 1]

    def add_edge(self, T, u, v):
        i, j = T.verts.index(u), T.verts.index(v)
        arr = T.arr.copy()
        idx = [slice(None)] * arr.ndim
        idx[i] = 0
        idx[j] = 0
        arr[tuple(idx)] = INF
        return Table(T.verts, arr)

    def _join_reduce(self, c, i):
        sub = np.array([0, 1], dtype=np.int64).reshape([1] * i + [2] + [1] * (c.ndim - i - 1))
        return c - sub

    def monotone_ok(self, T) -> bool:
        """f(S) <= f(S + v) <= f(S) + 1 along every axis (finite entries)."""
        for i in range(T.arr.ndim):
            lo = np.take(T.arr, 0, axis=i)
            hi = np.take(T.arr, 1, axis=i)
            fin = (lo < _HALF) & (hi < _HALF)
            if np.any(hi[fin] > lo[fin] + 1):
                return False
        return True


class DominatingSet(Plugin):
    name = "ds"
    q = 3
    intro = (1, INF, 0)
    forget_states = [0, 1]
    # combos per shared vertex: (B,B), (W,G), (G,W), (G,G)
    join_left = [0, 1, 2, 2]
    join_right = [0, 2, 1, 2]

    def add_edge(self, T, u, v):
        i, j = T.verts.index(u), T.verts.index(v)
        arr = T.arr.copy()
        src = T.arr

        def sl(a, b):
            idx = [slice(None)] * src.ndim
            idx[i] = a
            idx[j] = b
            return tuple(idx)

        arr[sl(0, 1)] = np.minimum(src[sl(0, 1)], src[sl(0, 2)])
        arr[sl(1, 0)] = np.minimum(src[sl(1, 0)], src[sl(2, 0)])
        return Table(T.verts, arr)

    def _join_reduce(self, c, i):
        b = np.take(c, 0, axis=i) - 1
        w = np.minimum(np.take(c, 1, axis=i), np.take(c, 2, axis=i))
        g = np.take(c, 3, axis=i)
        return np.stack([b, w, g], axis=i)


PLUGINS = {"vc": VertexCover, "ds": DominatingSet}


def get_plugin(name: str) -> Plugin:
    try:
        return PLUGINS[name]()
    except KeyError:
        raise ValueError(f"unknown plugin {name!r}") from None


# Boundaried graphs ----------------------------------------------------------


class BoundariedGraph:
    """A graph with an injective labeling of its boundary by integers >= 1."""

    def __init__(self, graph: nx.Graph, labels: Dict[Hashable, int]):
        if len(set(labels.values())) != len(labels):
            raise ValueError("boundary labeling must be injective")
        for v, l in labels.items():
            if v not in graph or l < 1:
                raise ValueError("bad boundary label")
        self.graph = graph
        self.labels = dict(labels)

    @classmethod
    def in_order(cls, graph: nx.Graph, boundary: Iterable) -> "BoundariedGraph":
        """The unique labeling by 1..t that follows the vertex order."""
        bd = sorted(boundary, key=_vkey)
        return cls(graph, {v: i + 1 for i, v in enumerate(bd)})

    def label_set(self):
        return frozenset(self.labels.values())

    def boundary(self) -> List:
        """Boundary vertices ordered by label."""
        return [v for v, _ in sorted(self.labels.items(), key=lambda x: x[1])]

    def is_t_boundaried(self, t: int) -> bool:
        return all(1 <= l <= t for l in self.labels.values())


def _glue(X: BoundariedGraph, Y: BoundariedGraph):
    g = nx.Graph()
    lx = X.labels
    ly = Y.labels

    def nx_(v):
        return ("b", lx[v]) if v in lx else ("x", v)

    def ny_(v):
        return ("b", ly[v]) if v in ly else ("y", v)

    for v in X.graph.nodes():
        g.add_node(nx_(v))
    for v in Y.graph.nodes():
        g.add_node(ny_(v))
    for u, v in X.graph.edges():
        g.add_edge(nx_(u), nx_(v))
    for u, v in Y.graph.edges():
        g.add_edge(ny_(u), ny_(v))
    return g


def glue_u(X: BoundariedGraph, Y: BoundariedGraph) -> nx.Graph:
    """Disjoint union identifying boundary vertices with equal labels."""
    return _glue(X, Y)


def glue_b(X: BoundariedGraph, Y: BoundariedGraph) -> BoundariedGraph:
    """Like glue_u but keeping the identified vertices as the boundary."""
    if X.label_set() != Y.label_set():
        raise ValueError("glue_b needs equal label sets")
    g = _glue(X, Y)
    return BoundariedGraph(g, {("b", l): l for l in X.label_set()})


# Brute-force tables -----------------------------------------------------------


def _popcount(n: int) -> np.ndarray:
    x = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(x)
    for i in range(n):
        out += (x >> i) & 1
    return out


def table_of(plugin: Plugin, G: BoundariedGraph, limit: int = 16) -> Table:
    """Reference table by trying every vertex subset.

    The result is indexed by boundary vertices in label order; its vertex
    tuple lists the labels.
    """
    verts = list(G.graph.nodes())
    n = len(verts)
    if n > limit:
        raise ValueError("graph too large for table_of")
    idx = {v: i for i, v in enumerate(verts)}
    bd = G.boundary()
    bidx = [idx[v] for v in bd]
    masks = np.arange(1 << n, dtype=np.int64)
    pc = _popcount(n)
    nbr = [0] * n
    for u, v in G.graph.edges():
        nbr[idx[u]] |= 1 << idx[v]
        nbr[idx[v]] |= 1 << idx[u]
    interior = 0
    for i in range(n):
        if i not in bidx:
            interior |= 1 << i
    t = len(bd)
    arr = np.full((plugin.q,) * t, INF, dtype=np.int64)
    if plugin.name == "vc":
        ok = np.ones(1 << n, dtype=bool)
        for u, v in G.graph.edges():
            ok &= (((masks >> idx[u]) | (masks >> idx[v])) & 1).astype(bool)
        for s in itertools.product(range(2), repeat=t):
            m = ok.copy()
            for b, st in zip(bidx, s):
                m &= (((masks >> b) & 1) == st)
            if m.any():
                arr[s] = pc[m].min()
    else:
        # a vertex is dominated when it has a neighbour in the set
        adjdom = np.zeros_like(masks)
        for i in range(n):
            adjdom |= np.where((masks >> i) & 1, nbr[i], 0)
        ok = (((masks | adjdom) & interior) == interior)
        for s in itertools.product(range(3), repeat=t):
            m = ok.copy()
            for b, st in zip(bidx, s):
                inD = ((masks >> b) & 1).astype(bool)
                if st == 0:
                    m &= inD
                elif st == 1:
                    m &= ~inD & ((adjdom >> b) & 1).astype(bool)
                else:
                    m &= ~inD
            if m.any():
                arr[s] = pc[m].min()
    return Table(tuple(range(1, t + 1)), arr)


# Representative stores -------------------------------------------------------


class Representative:
    """A boundaried graph on vertices 0..n-1 whose boundary is 0..t-1 in
    label order, with the minimum entry of its table."""

    __slots__ = ("t", "n", "edges", "base")

    def __init__(self, t: int, n: int, edges: Sequence[Tuple[int, int]], base: int):
        self.t = t
        self.n = n
        self.edges = tuple(sorted((min(a, b), max(a, b)) for a, b in edges))
        self.base = base

    def boundaried(self) -> BoundariedGraph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return BoundariedGraph(g, {i: i + 1 for i in range(self.t)})

    def sort_key(self):
        return (self.base, self.n, len(self.edges), self.edges)


class RepresentativeStore:
    """Map from (t, normalized table) to the chosen representative."""

    def __init__(self, plugin: str):
        self.plugin = plugin
        self.reps: Dict[Tuple[int, Tuple[int, ...]], Representative] = {}

    def lookup(self, key) -> Optional[Representative]:
        return self.reps.get(key)

    def offer(self, key, rep: Representative) -> None:
        cur = self.reps.get(key)
        if cur is None or rep.sort_key() < cur.sort_key():
            self.reps[key] = rep

    def __len__(self):
        return len(self.reps)

    def max_vertices(self, t: Optional[int] = None) -> int:
        return max((r.n for (tt, _), r in self.reps.items() if t is None or tt == t), default=0)

    def dumps(self) -> str:
        out = io.StringIO()
        out.write(f"store {STORE_VERSION} {self.plugin}\n")
        for key in sorted(self.reps):
            t, tab = key
            r = self.reps[key]
            tab_s = ",".join("inf" if x >= _HALF else str(x) for x in tab)
            edges_s = ",".join(f"{a}-{b}" for a, b in r.edges)
            out.write(f"rep {t} {tab_s} {r.n} {r.base} {edges_s or '-'}\n")
        return out.getvalue()

    @classmethod
    def loads(cls, text: str) -> "RepresentativeStore":
        lines = text.splitlines()
        head = lines[0].split()
        if head[0] != "store" or int(head[1]) != STORE_VERSION:
            raise ValueError("not a representative store")
        st = cls(head[2])
        for line in lines[1:]:
            if not line.strip():
                continue
            _, t, tab_s, n, base, edges_s = line.split()
            tab = tuple(INF if x == "inf" else int(x) for x in tab_s.split(","))
            edges = [] if edges_s == "-" else [tuple(map(int, e.split("-"))) for e in edges_s.split(",")]
            st.reps[(int(t), tab)] = Representative(int(t), int(n), edges, int(base))
        return st

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.dumps())

    @classmethod
    def load(cls, path: str) -> "RepresentativeStore":
        with open(path) as f:
            return cls.loads(f.read())

    def self_check(self) -> List[str]:
        """Recompute every stored table; return descriptions of failures."""
        plugin = get_plugin(self.plugin)
        bad = []
        for key, r in sorted(self.reps.items()):
            T = table_of(plugin, r.boundaried())
            if T.key() != key or T.min() != r.base:
                bad.append(f"t={key[0]} rep n={r.n} edges={r.edges}")
        return bad


def synthesize_representatives(plugin_name: str, t_max: int = 3, n_max: int = 6,
                               budget: int = 2_000_000) -> RepresentativeStore:
    """Enumerate boundaried graphs up to n_max vertices and keep, per
    normalized table, the one with the smallest minimum entry, then the
    fewest vertices, then the fewest and lexicographically first edges."""
    if n_max > 7:
        raise ValueError("n_max above 7 is outside the enumeration budget")
    plugin = get_plugin(plugin_name)
    store = RepresentativeStore(plugin_name)
    work = 0
    atlas = nx.graph_atlas_g()
    # empty boundary, empty graph
    store.offer((0, (0,)), Representative(0, 0, (), 0))
    for g in atlas:
        n = g.number_of_nodes()
        if n == 0 or n > n_max:
            continue
        for t in range(0, min(t_max, n) + 1):
            for bd in itertools.permutations(range(n), t):
                work += 1
                if work > budget:
                    raise RuntimeError("synthesis budget exceeded")
                rest = [v for v in range(n) if v not in bd]
                order = list(bd) + rest
                relabel = {v: i for i, v in enumerate(order)}
                edges = [(relabel[a], relabel[b]) for a, b in g.edges()]
                rep = Representative(t, n, edges, 0)
                T = table_of(plugin, rep.boundaried())
                rep.base = T.min()
                store.offer(T.key(), rep)
    return store


_STORE_CACHE: Dict[str, RepresentativeStore] = {}


def default_store(plugin_name: str) -> RepresentativeStore:
    """The store shipped with the package (t <= 3, n <= 6)."""
    if plugin_name not in _STORE_CACHE:
        path = os.path.join(os.path.dirname(__file__), "data", f"{plugin_name}.store")
        if os.path.exists(path):
            _STORE_CACHE[plugin_name] = RepresentativeStore.load(path)
        else:
            _STORE_CACHE[plugin_name] = synthesize_representatives(plugin_name)
    return _STORE_CACHE[plugin_name]


# Kernel ------------------------------------------------------------------------


class ChildPart:
    """What one root child contributes to K."""

    __slots__ = ("interior", "edges", "delta", "replaced", "key")

    def __init__(self, interior, edges, delta, replaced, key):
        self.interior = tuple(interior)
        self.edges = tuple(edges)
        self.delta = delta
        self.replaced = replaced
        self.key = key


def _ekey(u, v):
    return (u, v) if _vkey(u) <= _vkey(v) else (v, u)


class Kernel:
    """K = G[bag(r)] restricted to edges(r), plus one glued representative
    per root child; Delta is the sum of the per-child shifts."""

    def __init__(self, plugin: Plugin, store: RepresentativeStore):
        self.plugin = plugin
        self.store = store
        self.vcount: Dict = {}
        self.ecount: Dict = {}
        self.parts: Dict[int, ChildPart] = {}
        self.delta = 0
        self.misses = 0
        self.root_edges: Dict[int, Tuple] = {}

    # graph bookkeeping

    def _inc_v(self, v, out):
        c = self.vcount.get(v, 0)
        self.vcount[v] = c + 1
        if c == 0:
            out.append(("kv+", v))

    def _dec_v(self, v, out):
        c = self.vcount[v] - 1
        if c == 0:
            del self.vcount[v]
            out.append(("kv-", v))
        else:
            self.vcount[v] = c

    def _inc_e(self, e, out):
        c = self.ecount.get(e, 0)
        self.ecount[e] = c + 1
        if c == 0:
            out.append(("ke+", e))

    def _dec_e(self, e, out):
        c = self.ecount[e] - 1
        if c == 0:
            del self.ecount[e]
            out.append(("ke-", e))
        else:
            self.ecount[e] = c

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vcount)
        g.add_edges_from(self.ecount)
        return g

    def size(self) -> int:
        return len(self.vcount) + len(self.ecount)

    # child parts

    def child_part(self, sb, lab: int, state: Table) -> ChildPart:
        c = sb.label_node[lab]
        adh = sorted(sb.adh[c], key=_vkey)
        if tuple(adh) != state.verts:
            raise AssertionError("state is not over the adhesion")
        key = state.key()
        m = state.min()
        rep = self.store.lookup(key)
        if rep is not None and m >= rep.base:
            names = {i: adh[i] for i in range(rep.t)}
            for i in range(rep.t, rep.n):
                names[i] = f"x{lab}_{i}"
            interior = [names[i] for i in range(rep.t, rep.n)]
            edges = [_ekey(names[a], names[b]) for a, b in rep.edges]
            return ChildPart(interior, edges, m - rep.base, True, key)
        # keep the protrusion as it is
        verts = set()
        edges = []
        pend = sb.pending(c)
        for e in sb.leaves_below(c):
            vs = sb.g.vertices_of(e)
            verts.update(vs)
            if len(vs) == 2 and e not in pend:
                edges.append(_ekey(*vs))
        interior = sorted((v for v in verts if v not in sb.adh[c]), key=_vkey)
        return ChildPart(interior, sorted(edges, key=lambda x: (_vkey(x[0]), _vkey(x[1]))), 0, False, key)

    def _add_part(self, lab, part, out):
        self.parts[lab] = part
        for v in part.interior:
            self._inc_v(v, out)
        for e in part.edges:
            self._inc_e(e, out)
        self.delta += part.delta
        if not part.replaced:
            self.misses += 1

    def _remove_part(self, lab, out):
        part = self.parts.pop(lab)
        for e in part.edges:
            self._dec_e(e, out)
        for v in part.interior:
            self._dec_v(v, out)
        self.delta -= part.delta
        if not part.replaced:
            self.misses -= 1

    def apply_change(self, sb, C, edges_delta, states: Dict[int, Table]) -> List[Tuple]:
        """Update K from a root torso change C and the edges(r) delta."""
        from .hypergraph import AddHyperedge, AddVertex, DeleteHyperedge, DeleteVertex
        raw: List[Tuple] = []
        old_delta = self.delta
        for op in C:
            if isinstance(op, DeleteHyperedge):
                self._remove_part(op.e, raw)
        for sign, e in edges_delta:
            if sign == "-":
                self._dec_e(self.root_edges.pop(e), raw)
        for op in C:
            if isinstance(op, DeleteVertex):
                self._dec_v(op.v, raw)
        for op in C:
            if isinstance(op, AddVertex):
                self._inc_v(op.v, raw)
        for op in C:
            if isinstance(op, AddHyperedge):
                c = sb.label_node[op.e]
                self._add_part(op.e, self.child_part(sb, op.e, states[c]), raw)
        for sign, e in edges_delta:
            if sign == "+":
                self.root_edges[e] = _ekey(*sb.g.vertices_of(e))
                self._inc_e(self.root_edges[e], raw)
        out = _net(raw)
        if self.delta != old_delta:
            out.append(("kd", self.delta))
        return out

    @classmethod
    def assemble(cls, plugin: Plugin, store: RepresentativeStore, sb, states: Dict[int, Table]) -> "Kernel":
        """Build (K, Delta) from scratch."""
        k = cls(plugin, store)
        sink: List[Tuple] = []
        for v in sb.root_torso.vertices():
            k._inc_v(v, sink)
        for lab in sorted(sb.root_torso.edges()):
            c = sb.label_node[lab]
            k._add_part(lab, k.child_part(sb, lab, states[c]), sink)
        for e in sb.edges_r:
            k.root_edges[e] = _ekey(*sb.g.vertices_of(e))
            k._inc_e(k.root_edges[e], sink)
        return k

    def signature(self):
        return (dict(self.vcount), dict(self.ecount), self.delta)


def _net(raw: List[Tuple]) -> List[Tuple]:
    """Cancel +/- pairs and order as edge removals, vertex removals,
    vertex additions, edge additions."""
    count: Dict[Tuple, int] = {}
    for op, x in raw:
        kind = op[:2]
        sign = 1 if op.endswith("+") else -1
        count[(kind, x)] = count.get((kind, x), 0) + sign
    out = []
    for phase in (("ke", -1), ("kv", -1), ("kv", 1), ("ke", 1)):
        items = sorted((x for (kind, x), s in count.items() if kind == phase[0] and s == phase[1]),
                       key=lambda x: repr(x))
        out.extend((phase[0] + ("+" if phase[1] > 0 else "-"), x) for x in items)
    return out
