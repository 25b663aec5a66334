"""Labeled multi-hypergraphs with an incidence representation.

Vertices are caller-chosen integers. Hyperedges get fresh integer labels from
a counter, so two hyperedges with the same vertex set are still different
objects. Every vertex keeps the set of hyperedges incident to it, which gives
the bipartite incidence graph between vertices and hyperedges.
"""

from __future__ import annotations

from collections import Counter
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple


class HypergraphError(ValueError):
    pass


class MissingVertex(HypergraphError):
    pass


class NonIsolatedVertex(HypergraphError):
    pass


class MissingEdge(HypergraphError):
    pass


class DuplicateVertex(HypergraphError):
    pass


class DuplicateEdge(HypergraphError):
    pass


# Basic operations ---------------------------------------------------------


class AddVertex:
    __slots__ = ("v",)

    def __init__(self, v: int):
        self.v = v

    def size(self) -> int:
        return 1

    def apply(self, h: "Hypergraph") -> None:
        h.add_vertex(self.v)

    def key(self):
        return ("av", self.v)

    def __eq__(self, other):
        return isinstance(other, AddVertex) and other.v == self.v

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"AddVertex({self.v})"


class DeleteVertex:
    __slots__ = ("v",)

    def __init__(self, v: int):
        self.v = v

    def size(self) -> int:
        return 1

    def apply(self, h: "Hypergraph") -> None:
        h.delete_vertex(self.v)

    def key(self):
        return ("dv", self.v)

    def __eq__(self, other):
        return isinstance(other, DeleteVertex) and other.v == self.v

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"DeleteVertex({self.v})"


class AddHyperedge:
    __slots__ = ("e", "verts")

    def __init__(self, e: int, verts: Iterable[int]):
        self.e = e
        self.verts = tuple(sorted(verts))

    def size(self) -> int:
        return len(self.verts) + 1

    def apply(self, h: "Hypergraph") -> None:
        h.add_hyperedge(self.verts, label=self.e)

    def key(self):
        return ("ah", self.e, self.verts)

    def __eq__(self, other):
        return isinstance(other, AddHyperedge) and other.key() == self.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"AddHyperedge({self.e}, {list(self.verts)})"


class DeleteHyperedge:
    __slots__ = ("e", "verts")

    def __init__(self, e: int, verts: Iterable[int] = ()):
        self.e = e
        # the vertex set is kept only for size accounting
        self.verts = tuple(sorted(verts))

    def size(self) -> int:
        return len(self.verts) + 1

    def apply(self, h: "Hypergraph") -> None:
        h.delete_hyperedge(self.e)

    def key(self):
        return ("dh", self.e)

    def __eq__(self, other):
        return isinstance(other, DeleteHyperedge) and other.e == self.e

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"DeleteHyperedge({self.e})"


class OperationSeq:
    """An ordered list of basic hypergraph operations."""

    def __init__(self, ops: Optional[Iterable] = None):
        self.ops: List = list(ops) if ops is not None else []

    def append(self, op) -> None:
        self.ops.append(op)

    def extend(self, ops) -> None:
        if isinstance(ops, OperationSeq):
            ops = ops.ops
        self.ops.extend(ops)

    def size(self) -> int:
        return sum(op.size() for op in self.ops)

    def replay(self, h: "Hypergraph") -> None:
        for op in self.ops:
            op.apply(h)

    def deleted_edges(self) -> Set[int]:
        return {op.e for op in self.ops if isinstance(op, DeleteHyperedge)}

    def added_edges(self) -> Set[int]:
        return {op.e for op in self.ops if isinstance(op, AddHyperedge)}

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __repr__(self):
        return f"OperationSeq({self.ops!r})"


def net_operations(pre_vertices: Set[int], pre_edges: Dict[int, Tuple[int, ...]],
                   post: "Hypergraph", touched_vertices: Iterable[int],
                   touched_edges: Iterable[int]) -> OperationSeq:
    """Build a minimal replay sequence between two states of one hypergraph.

    Only the touched labels are compared, so the cost is proportional to the
    number of touched items. Order: edge deletions, vertex deletions, vertex
    additions, edge additions.
    """
    seq = OperationSeq()
    adds_e = []
    for e in sorted(set(touched_edges)):
        before = e in pre_edges
        after = post.has_edge(e)
        if before and not after:
            seq.append(DeleteHyperedge(e, pre_edges[e]))
        elif after and not before:
            adds_e.append(AddHyperedge(e, post.vertices_of(e)))
    adds_v = []
    for v in sorted(set(touched_vertices)):
        before = v in pre_vertices
        after = post.has_vertex(v)
        if before and not after:
            seq.append(DeleteVertex(v))
        elif after and not before:
            adds_v.append(AddVertex(v))
    seq.extend(adds_v)
    seq.extend(adds_e)
    return seq


# The hypergraph -----------------------------------------------------------


class Hypergraph:
    """A labeled multi-hypergraph.

    ``_inc[v]`` is the set of hyperedge labels containing ``v`` and
    ``_verts[e]`` the sorted vertex tuple of ``e``.
    """

    def __init__(self):
        self._inc: Dict[int, Set[int]] = {}
        self._verts: Dict[int, Tuple[int, ...]] = {}
        self._next_label = 0
        self._rank_count: Counter = Counter()
        self._incidences = 0

    # queries

    def has_vertex(self, v: int) -> bool:
        return v in self._inc

    def has_edge(self, e: int) -> bool:
        return e in self._verts

    def vertices(self) -> Iterator[int]:
        return iter(self._inc)

    def edges(self) -> Iterator[int]:
        return iter(self._verts)

    def vertex_set(self) -> Set[int]:
        return set(self._inc)

    def edge_set(self) -> Set[int]:
        return set(self._verts)

    def num_vertices(self) -> int:
        return len(self._inc)

    def num_edges(self) -> int:
        return len(self._verts)

    def vertices_of(self, e: int) -> Tuple[int, ...]:
        try:
            return self._verts[e]
        except KeyError:
            raise MissingEdge(e) from None

    def edges_of(self, v: int) -> Set[int]:
        try:
            return self._inc[v]
        except KeyError:
            raise MissingVertex(v) from None

    def degree(self, v: int) -> int:
        return len(self.edges_of(v))

    def rank(self) -> int:
        while self._rank_count:
            top = max(self._rank_count)
            if self._rank_count[top] > 0:
                return top
            del self._rank_count[top]
        return 0

    def size(self) -> int:
        """|V| plus the sum of |V(e)|+1 over all hyperedges."""
        return len(self._inc) + self._incidences + len(self._verts)

    def recomputed_size(self) -> int:
        return len(self._inc) + sum(len(vs) + 1 for vs in self._verts.values())

    # basic operations

    def add_vertex(self, v: int) -> None:
        if v in self._inc:
            raise DuplicateVertex(v)
        self._inc[v] = set()

    def delete_vertex(self, v: int) -> None:
        if v not in self._inc:
            raise MissingVertex(v)
        if self._inc[v]:
            raise NonIsolatedVertex(v)
        del self._inc[v]

    def add_hyperedge(self, verts: Iterable[int], label: Optional[int] = None) -> int:
        vs = tuple(sorted(set(verts)))
        for v in vs:
            if v not in self._inc:
                raise MissingVertex(v)
        if label is None:
            label = self._next_label
        elif label in self._verts:
            raise DuplicateEdge(label)
        self._next_label = max(self._next_label, label + 1)
        self._verts[label] = vs
        for v in vs:
            self._inc[v].add(label)
        self._rank_count[len(vs)] += 1
        self._incidences += len(vs)
        return label

    def delete_hyperedge(self, e: int) -> Tuple[int, ...]:
        vs = self._verts.pop(e, None)
        if vs is None:
            raise MissingEdge(e)
        for v in vs:
            self._inc[v].discard(e)
        self._rank_count[len(vs)] -= 1
        self._incidences -= len(vs)
        return vs

    def fresh_label(self) -> int:
        label = self._next_label
        self._next_label += 1
        return label

    # set queries

    def vertex_union(self, edges: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for e in edges:
            out.update(self.vertices_of(e))
        return out

    def boundary(self, edges: Iterable[int]) -> Tuple[Set[int], Set[int]]:
        """Return (V(C), bd(C)) by counting incidences inside C.

        A vertex is on the boundary when some incident hyperedge lies outside
        C, which happens exactly when its count inside C is below its degree.
        """
        count: Dict[int, int] = {}
        seen = set()
        for e in edges:
            if e in seen:
                continue
            seen.add(e)
            for v in self.vertices_of(e):
                count[v] = count.get(v, 0) + 1
        bd = {v for v, c in count.items() if c < len(self._inc[v])}
        return set(count), bd

    def bd(self, edges: Iterable[int]) -> Set[int]:
        return self.boundary(edges)[1]

    def lam(self, edges: Iterable[int]) -> int:
        return len(self.boundary(edges)[1])

    def interior(self, edges: Iterable[int]) -> Set[int]:
        vs, bd = self.boundary(edges)
        return vs - bd

    def naive_boundary(self, edges: Iterable[int]) -> Set[int]:
        inside = set(edges)
        v_in = self.vertex_union(inside)
        v_out = self.vertex_union(e for e in self._verts if e not in inside)
        return v_in & v_out

    def internal_components(self, edges: Iterable[int]) -> List[FrozenSet[int]]:
        """Split a non-empty edge set into its internal components.

        Hyperedges sharing an interior vertex are joined; a hyperedge with no
        interior vertex is a component on its own.
        """
        A = list(dict.fromkeys(edges))
        if not A:
            raise HypergraphError("internal_components of an empty set")
        vs, bd = self.boundary(A)
        parent = {e: e for e in A}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        owner: Dict[int, int] = {}
        for e in A:
            for v in self._verts[e]:
                if v in bd:
                    continue
                if v in owner:
                    a, b = find(owner[v]), find(e)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
                else:
                    owner[v] = e
        groups: Dict[int, List[int]] = {}
        for e in A:
            groups.setdefault(find(e), []).append(e)
        return sorted((frozenset(g) for g in groups.values()), key=lambda s: min(s))

    def is_internally_connected(self, edges: Iterable[int]) -> bool:
        A = set(edges)
        if len(A) == 1:
            return True
        if not A:
            return False
        return len(self.internal_components(A)) == 1 and bool(self.interior(A))

    def primal_adjacency(self, edges: Iterable[int]) -> Dict[int, Set[int]]:
        """Adjacency of the primal graph of the sub-hypergraph G[edges]."""
        adj: Dict[int, Set[int]] = {}
        for e in edges:
            vs = self._verts[e]
            for v in vs:
                adj.setdefault(v, set())
            for i, u in enumerate(vs):
                for w in vs[i + 1:]:
                    adj[u].add(w)
                    adj[w].add(u)
        return adj

    def incidence_neighbors(self, v: int) -> Set[int]:
        return set(self.edges_of(v))

    # copies and serialization

    def copy(self) -> "Hypergraph":
        h = Hypergraph()
        h._inc = {v: set(es) for v, es in self._inc.items()}
        h._verts = dict(self._verts)
        h._next_label = self._next_label
        h._rank_count = Counter(self._rank_count)
        h._incidences = self._incidences
        return h

    def sub_hypergraph(self, edges: Iterable[int]) -> "Hypergraph":
        """G[A]: the hyperedges of A on the vertex set V(A), labels kept."""
        h = Hypergraph()
        es = list(edges)
        for v in sorted(self.vertex_union(es)):
            h.add_vertex(v)
        for e in sorted(es):
            h.add_hyperedge(self._verts[e], label=e)
        return h

    def dumps(self) -> str:
        lines = [f"v {v}" for v in sorted(self._inc)]
        for e in sorted(self._verts):
            lines.append(" ".join(["h", str(e)] + [str(v) for v in self._verts[e]]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def loads(cls, text: str) -> "Hypergraph":
        h = cls()
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                h.add_vertex(int(parts[1]))
            elif parts[0] == "h":
                h.add_hyperedge([int(x) for x in parts[2:]], label=int(parts[1]))
            else:
                raise HypergraphError(f"bad line: {line!r}")
        return h

    def state(self):
        return (frozenset(self._inc), frozenset(self._verts.items()))

    def __eq__(self, other):
        return isinstance(other, Hypergraph) and self.state() == other.state()

    def __repr__(self):
        return f"Hypergraph(|V|={len(self._inc)}, |E|={len(self._verts)})"


# Support hypergraphs ------------------------------------------------------


class SupportHypergraph(Hypergraph):
    """H(G) for a simple graph G, kept in sync under graph updates.

    ``vertex_edge[v]`` is the label of the singleton {v} and
    ``pair_edge[(u, v)]`` (u < v) the label of the hyperedge {u, v}.
    """

    def __init__(self):
        super().__init__()
        self.vertex_edge: Dict[int, int] = {}
        self.pair_edge: Dict[Tuple[int, int], int] = {}
        self.edge_kind: Dict[int, Tuple[int, ...]] = {}

    def add_graph_vertex(self, v: int) -> int:
        self.add_vertex(v)
        e = self.add_hyperedge((v,))
        self.vertex_edge[v] = e
        self.edge_kind[e] = (v,)
        return e

    def add_graph_edge(self, u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        if u == v:
            raise HypergraphError("self loops are not allowed")
        if key in self.pair_edge:
            raise DuplicateEdge(key)
        e = self.add_hyperedge(key)
        self.pair_edge[key] = e
        self.edge_kind[e] = key
        return e

    def delete_graph_edge(self, u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        e = self.pair_edge.pop(key, None)
        if e is None:
            raise MissingEdge(key)
        self.delete_hyperedge(e)
        del self.edge_kind[e]
        return e

    def delete_graph_vertex(self, v: int) -> int:
        if v not in self.vertex_edge:
            raise MissingVertex(v)
        if len(self.edges_of(v)) > 1:
            raise NonIsolatedVertex(v)
        e = self.vertex_edge.pop(v)
        self.delete_hyperedge(e)
        del self.edge_kind[e]
        self.delete_vertex(v)
        return e

    def graph_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.pair_edge)

    def graph_vertices(self) -> List[int]:
        return sorted(self.vertex_edge)

    def copy(self) -> "SupportHypergraph":
        h = SupportHypergraph()
        h._inc = {v: set(es) for v, es in self._inc.items()}
        h._verts = dict(self._verts)
        h._next_label = self._next_label
        h._rank_count = Counter(self._rank_count)
        h._incidences = self._incidences
        h.vertex_edge = dict(self.vertex_edge)
        h.pair_edge = dict(self.pair_edge)
        h.edge_kind = dict(self.edge_kind)
        return h


def support_hypergraph(graph) -> SupportHypergraph:
    """Build H(G) from a networkx graph or an (vertices, edges) pair."""
    if hasattr(graph, "nodes") and hasattr(graph, "edges"):
        vertices, edges = list(graph.nodes()), list(graph.edges())
    else:
        vertices, edges = graph
    h = SupportHypergraph()
    for v in sorted(vertices):
        h.add_graph_vertex(v)
    for u, v in sorted((min(a, b), max(a, b)) for a, b in edges):
        h.add_graph_edge(u, v)
    return h
