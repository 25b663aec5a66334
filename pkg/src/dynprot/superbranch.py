"""Rooted superbranch decompositions with torsos, rotations and the
corresponding annotated protrusion decomposition.

Nodes are integers. The root is a distinguished internal node that may have
any number of children; every other internal node has at least two. Leaves
are in bijection with the hyperedges of the underlying hypergraph.

Every tree edge (t, parent(t)) carries a label, which is the name of the
hyperedge e_t representing that edge in the torsos of both endpoints. A
label is replaced whenever the child moves, its adhesion changes, or (for
root children) anything below it changes, so labels act as version stamps
for the root torso.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .hypergraph import (AddHyperedge, AddVertex, DeleteHyperedge, DeleteVertex, Hypergraph,
                         OperationSeq, net_operations)


class DecompositionError(ValueError):
    pass


class Rotation:
    """One applied basic rotation with its torso deltas."""

    def __init__(self, kind: str, node: int, size: int, deltas: Dict[int, OperationSeq],
                 touched: Iterable[int]):
        self.kind = kind
        self.node = node
        self.size = size
        self.deltas = deltas
        self.touched = set(touched)

    def __repr__(self):
        return f"Rotation({self.kind}, node={self.node}, size={self.size})"


class RotationSeq:
    """Rotations applied so far, with the size and trace bookkeeping."""

    def __init__(self):
        self.items: List[Rotation] = []

    def append(self, rot: Rotation) -> None:
        self.items.append(rot)

    def extend(self, other: "RotationSeq") -> None:
        self.items.extend(other.items)

    def size(self) -> int:
        return sum(r.size + 1 for r in self.items)

    def vertices(self) -> Set[int]:
        out: Set[int] = set()
        for r in self.items:
            out |= r.touched
        return out

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


class SuperbranchDecomposition:
    """A superbranch decomposition of a hypergraph ``g``.

    Per node we store parent, ordered children, adhesion to the parent,
    number of leaves below, height and the edge list EL. The root torso is
    kept as a real hypergraph whose labels are the root-child labels; other
    torsos are small and built on demand.
    """

    def __init__(self, g: Hypergraph, alpha: int = 3):
        self.g = g
        self.alpha = alpha
        self.root = 0
        self._next_node = 1
        self.parent: Dict[int, Optional[int]] = {0: None}
        self.children: Dict[int, Dict[int, None]] = {0: {}}
        self.leaf_edge: Dict[int, int] = {}
        self.edge_leaf: Dict[int, int] = {}
        self.adh: Dict[int, FrozenSet[int]] = {}
        self.nleaves: Dict[int, int] = {0: 0}
        self.height: Dict[int, int] = {0: 0}
        self.label: Dict[int, int] = {}
        self.label_node: Dict[int, int] = {}
        self._next_label = 0
        self.root_torso = Hypergraph()
        # EL(t) holds graph edges (labels of rank-2 hyperedges of g)
        self.EL: Dict[int, FrozenSet[int]] = {0: frozenset()}
        self._root_contrib: Dict[int, FrozenSet[int]] = {}
        self._el_root: Set[int] = set()
        self.batch = 0
        self.label_batch: Dict[int, int] = {}
        self.stamp: Dict[int, int] = {0: 0}
        self._phi: Dict[int, float] = {}
        self.phi = 0.0
        self.begin_batch()

    # basic queries ------------------------------------------------------

    def nodes(self) -> List[int]:
        return list(self.parent)

    def is_leaf(self, t: int) -> bool:
        return t in self.leaf_edge

    def degree(self, t: int) -> int:
        return len(self.children[t])

    def root_children(self) -> List[int]:
        return list(self.children[self.root])

    def depth_of(self, t: int) -> int:
        d = 0
        while self.parent[t] is not None:
            t = self.parent[t]
            d += 1
        return d

    def ancestors(self, t: Optional[int]) -> List[int]:
        out = []
        while t is not None:
            out.append(t)
            t = self.parent[t]
        return out

    def root_child_of(self, t: int) -> int:
        if t == self.root:
            raise DecompositionError("the root has no root-child ancestor")
        while self.parent[t] != self.root:
            t = self.parent[t]
        return t

    def leaves_below(self, t: int) -> List[int]:
        out, stack = [], [t]
        while stack:
            x = stack.pop()
            if x in self.leaf_edge:
                out.append(self.leaf_edge[x])
            else:
                stack.extend(self.children[x])
        return out

    def subtree_nodes(self, t: int) -> List[int]:
        out, stack = [], [t]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children.get(x, ()))
        return out

    def adhsize(self) -> int:
        return max((len(a) for a in self.adh.values()), default=0)

    def pending(self, t: int) -> FrozenSet[int]:
        """Edges of EL(t) with both ends in adh(t); they belong above t."""
        a = self.adh.get(t, frozenset())
        vo = self.g.vertices_of
        return frozenset(e for e in self.EL[t] if all(v in a for v in vo(e)))

    @property
    def edges_r(self) -> Set[int]:
        return self._el_root

    # torsos ------------------------------------------------------------

    def torso_edges(self, t: int) -> Dict[int, FrozenSet[int]]:
        """Labels and vertex sets of the hyperedges of torso(t)."""
        out = {self.label[c]: self.adh[c] for c in self.children[t]}
        if t != self.root:
            out[self.label[t]] = self.adh[t]
        return out

    def torso(self, t: int) -> Hypergraph:
        """torso(t) as a hypergraph; the maintained object for the root."""
        if t == self.root:
            return self.root_torso
        h = Hypergraph()
        edges = self.torso_edges(t)
        for v in sorted(set().union(*edges.values()) if edges else ()):
            h.add_vertex(v)
        for lab in sorted(edges):
            h.add_hyperedge(edges[lab], label=lab)
        return h

    def torso_vertices(self, t: int) -> Set[int]:
        if t == self.root:
            return self.root_torso.vertex_set()
        out = set(self.adh[t])
        for c in self.children[t]:
            out |= self.adh[c]
        return out

    def _count(self, t: int, v: int) -> int:
        """Number of torso(t) hyperedges containing v."""
        if t == self.root:
            rt = self.root_torso
            return len(rt.edges_of(v)) if rt.has_vertex(v) else 0
        k = 1 if v in self.adh[t] else 0
        return k + sum(1 for c in self.children[t] if v in self.adh[c])

    def _has_torso_vertex(self, t: int, v: int) -> bool:
        if t == self.root:
            return self.root_torso.has_vertex(v)
        return self._count(t, v) > 0

    def child_of_label(self, lab: int) -> int:
        return self.label_node[lab]

    def split_boundary(self, t: int, C: Iterable[int]) -> FrozenSet[int]:
        """bd(C) computed inside torso(t) for a set of children of t."""
        inner: Counter = Counter()
        for c in set(C):
            inner.update(self.adh[c])
        return frozenset(v for v, k in inner.items() if self._count(t, v) > k)

    # labels and root bookkeeping -----------------------------------------

    def _fresh_label(self, t: int) -> int:
        old = self.label.get(t)
        if old is not None and self.label_node.get(old) == t:
            del self.label_node[old]
        lab = self._next_label
        self._next_label += 1
        self.label[t] = lab
        self.label_node[lab] = t
        self.label_batch[t] = self.batch
        return lab

    def _root_apply(self, op) -> None:
        rt = self.root_torso
        if isinstance(op, (AddHyperedge, DeleteHyperedge)):
            if op.e not in self._touched_e:
                self._touched_e.add(op.e)
                if rt.has_edge(op.e):
                    self._pre_edges[op.e] = rt.vertices_of(op.e)
            if isinstance(op, AddHyperedge):
                for v in op.verts:
                    self._touch_vertex(v)
        else:
            self._touch_vertex(op.v)
        op.apply(rt)

    def _touch_vertex(self, v: int) -> None:
        if v not in self._touched_v:
            self._touched_v.add(v)
            if self.root_torso.has_vertex(v):
                self._pre_vertices.add(v)

    def _apply_delta(self, t: int, seq: OperationSeq) -> None:
        if t == self.root:
            for op in seq:
                self._root_apply(op)

    def _mark(self, *nodes: int) -> None:
        for t in nodes:
            if t in self.parent:
                self._dirty.add(t)

    def _mark_struct(self, *nodes: int) -> None:
        """Nodes whose children or adhesion changed."""
        for t in nodes:
            self._struct.add(t)

    def begin_batch(self) -> None:
        """Start recording rotations and root torso changes."""
        self.batch += 1
        self._dirty: Set[int] = set()
        self._struct: Set[int] = set()
        self.el_changed: Set[int] = set()
        self._pre_edges: Dict[int, Tuple[int, ...]] = {}
        self._pre_vertices: Set[int] = set()
        self._touched_e: Set[int] = set()
        self._touched_v: Set[int] = set()
        self.rotations = RotationSeq()
        self.work = 0

    def end_batch(self):
        """Finish a batch of rotations.

        Heights, leaf counts and EL are refreshed bottom-up along the trace,
        root children with modified subtrees get a new label, and the net
        change of the root torso is returned as (C, edges(r) delta, trace).
        """
        trace = self.trace()
        for t in trace:
            self.stamp[t] = self.batch
            self._refresh_node(t)
        for t in trace:
            new = self.node_potential(t)
            self.phi += new - self._phi.get(t, 0.0)
            self._phi[t] = new
        for t in trace:
            if t != self.root and self.parent[t] == self.root and self.label_batch.get(t) != self.batch:
                lab = self.label[t]
                self._root_apply(DeleteHyperedge(lab, self.root_torso.vertices_of(lab)))
                self._root_apply(AddHyperedge(self._fresh_label(t), self.adh[t]))
        seq = net_operations(self._pre_vertices, self._pre_edges, self.root_torso,
                             self._touched_v, self._touched_e)
        removed: Set[int] = set()
        added: Set[int] = set()
        for op in seq:
            if isinstance(op, DeleteHyperedge):
                removed |= self._root_contrib.pop(op.e, frozenset())
            elif isinstance(op, AddHyperedge):
                c = self.label_node[op.e]
                contrib = self.pending(c)
                self._root_contrib[op.e] = contrib
                added |= contrib
        both = removed & added
        removed -= both
        added -= both
        self._el_root -= removed
        self._el_root |= added
        self.EL[self.root] = frozenset(self._el_root)
        edges_delta = [("-", e) for e in sorted(removed)] + [("+", e) for e in sorted(added)]
        return seq, edges_delta, trace

    def run_dirty(self) -> Set[int]:
        """Nodes whose folded state must be recomputed after end_batch:
        structural changes plus parents of nodes whose EL changed."""
        out = {t for t in self._struct if t in self.parent}
        for t in self.el_changed:
            p = self.parent.get(t)
            if p is not None:
                out.add(p)
        return out

    def trace(self) -> List[int]:
        """Dirty nodes and all their ancestors, deepest first."""
        depth: Dict[int, int] = {}
        for t in self._dirty:
            if t not in self.parent or t in depth:
                continue
            path = []
            x = t
            while x is not None and x not in depth:
                path.append(x)
                x = self.parent[x]
            d = -1 if x is None else depth[x]
            for y in reversed(path):
                d += 1
                depth[y] = d
        return sorted(depth, key=lambda x: (-depth[x], x))

    def _refresh_node(self, t: int) -> None:
        if t == self.root:
            return
        if t in self.leaf_edge:
            self.height[t] = 0
            self.nleaves[t] = 1
            e = self.leaf_edge[t]
            el = frozenset([e]) if len(self.g.vertices_of(e)) == 2 else frozenset()
            if self.EL.get(t) != el:
                self.el_changed.add(t)
            self.EL[t] = el
            return
        ch = self.children[t]
        self.height[t] = 1 + max((self.height[c] for c in ch), default=-1)
        self.nleaves[t] = sum(self.nleaves[c] for c in ch)
        el: Set[int] = set()
        vo = self.g.vertices_of
        for c in ch:
            a = self.adh[c]
            for e in self.EL[c]:
                if all(v in a for v in vo(e)):
                    el.add(e)
        el = frozenset(el)
        if self.EL.get(t) != el:
            self.el_changed.add(t)
        self.EL[t] = el

    # rotations ---------------------------------------------------------

    def _new_node(self) -> int:
        t = self._next_node
        self._next_node += 1
        return t

    def _record(self, rot: Rotation) -> Rotation:
        self.rotations.append(rot)
        self.work += rot.size + 1
        return rot

    def contract(self, t: int) -> Rotation:
        """Contract the edge between t and its parent p."""
        if t == self.root or t in self.leaf_edge or t not in self.parent:
            raise DecompositionError("contract needs an internal non-root node")
        p = self.parent[t]
        kids = list(self.children[t])
        size = max(1, self.alpha) * (len(kids) + 1)
        seq = OperationSeq()
        seq.append(DeleteHyperedge(self.label[t], self.adh[t]))
        if p == self.root:
            present = self.root_torso.has_vertex
        else:
            present = self.torso_vertices(p).__contains__
        if p == self.root:
            del self.children[p][t]
            for k in kids:
                self.children[p][k] = None
        else:
            new_children: Dict[int, None] = {}
            for c in self.children[p]:
                if c == t:
                    for k in kids:
                        new_children[k] = None
                else:
                    new_children[c] = None
            self.children[p] = new_children
        seen: Set[int] = set()
        added_v: List[int] = []
        for k in kids:
            self.parent[k] = p
            for v in sorted(self.adh[k]):
                if v not in seen:
                    seen.add(v)
                    if not present(v):
                        added_v.append(v)
        for v in added_v:
            seq.append(AddVertex(v))
        for k in kids:
            seq.append(AddHyperedge(self._fresh_label(k), self.adh[k]))
        self.children[t] = {}
        self._remove_node(t)
        self._apply_delta(p, seq)
        self._mark(p, *kids)
        self._mark_struct(p)
        return self._record(Rotation("contract", t, size, {p: seq}, [p, t] + kids))

    def split(self, t: int, C: Iterable[int]) -> Rotation:
        """Move the children C of t below a fresh child t_C of t."""
        C = list(dict.fromkeys(C))
        ch = self.children[t]
        for c in C:
            if c not in ch:
                raise DecompositionError(f"{c} is not a child of {t}")
        torso_size = len(ch) + (0 if t == self.root else 1)
        if len(C) < 2 or torso_size - len(C) < 2:
            raise DecompositionError("split needs |C| >= 2 and |complement| >= 2")
        adh_new = self.split_boundary(t, C)
        z = self._new_node()
        old = {c: self.label[c] for c in C}
        if t == self.root:
            for c in C:
                del ch[c]
            ch[z] = None
        else:
            cset = set(C)
            new_children: Dict[int, None] = {}
            for c in ch:
                if c in cset:
                    if z not in new_children:
                        new_children[z] = None
                else:
                    new_children[c] = None
            self.children[t] = new_children
        self.parent[z] = t
        self.children[z] = {c: None for c in C}
        self.adh[z] = adh_new
        self.stamp[z] = self.batch
        for c in C:
            self.parent[c] = z
        inner = set().union(*(self.adh[c] for c in C))
        seq_t = OperationSeq()
        for c in C:
            seq_t.append(DeleteHyperedge(old[c], self.adh[c]))
        lab_z = self._fresh_label(z)
        seq_t.append(AddHyperedge(lab_z, adh_new))
        for v in sorted(inner - adh_new):
            seq_t.append(DeleteVertex(v))
        seq_z = OperationSeq()
        for v in sorted(inner | adh_new):
            seq_z.append(AddVertex(v))
        for c in C:
            seq_z.append(AddHyperedge(self._fresh_label(c), self.adh[c]))
        seq_z.append(AddHyperedge(lab_z, adh_new))
        self._apply_delta(t, seq_t)
        self._refresh_node(z)
        self._mark(t, z, *C)
        self._mark_struct(t, z)
        rot = Rotation("split", t, max(1, self.alpha) * len(C), {t: seq_t, z: seq_z}, [t, z] + C)
        rot.new_node = z
        return self._record(rot)

    def insert_leaf(self, t: int, e: int, X: Iterable[int] = ()) -> Rotation:
        """Insert a leaf for the (already added) hyperedge e below t."""
        if t in self.leaf_edge or t not in self.parent:
            raise DecompositionError("cannot insert below a leaf")
        if e in self.edge_leaf:
            raise DecompositionError("hyperedge already has a leaf")
        X = list(dict.fromkeys(X))
        for x in X:
            if self.parent.get(x) != t or x not in self.leaf_edge:
                raise DecompositionError(f"{x} is not a leaf child of {t}")
        ve = self.g.vertices_of(e)
        covered: Set[int] = set()
        for x in X:
            covered.update(self.g.vertices_of(self.leaf_edge[x]))
        for v in ve:
            if self.g.degree(v) > 1 and v not in covered:
                raise DecompositionError(f"vertex {v} of the new hyperedge is not covered by X")
        l = self._new_node()
        adh_l = frozenset(v for v in ve if self.g.degree(v) > 1)
        seq = OperationSeq()
        for v in sorted(adh_l):
            if not self._has_torso_vertex(t, v):
                seq.append(AddVertex(v))
        for x in X:
            seq.append(DeleteHyperedge(self.label[x], self.adh[x]))
            vx = self.g.vertices_of(self.leaf_edge[x])
            self.adh[x] = self.adh[x] | frozenset(v for v in ve if v in vx)
            seq.append(AddHyperedge(self._fresh_label(x), self.adh[x]))
        self.parent[l] = t
        self.children[t][l] = None
        self.children[l] = {}
        self.leaf_edge[l] = e
        self.edge_leaf[e] = l
        self.adh[l] = adh_l
        self.stamp[l] = self.batch
        self._refresh_node(l)
        seq.append(AddHyperedge(self._fresh_label(l), adh_l))
        for a in self.ancestors(t):
            self.nleaves[a] += 1
        self._apply_delta(t, seq)
        self._mark(t, l, *X)
        self._mark_struct(t, l, *X)
        size = (len(X) * max(1, self.alpha) + 1) * max(1, len(ve)) + self.depth_of(t) + 1
        rot = Rotation("insert_leaf", t, size, {t: seq}, [t, l] + X)
        rot.new_node = l
        return self._record(rot)

    def delete_leaf(self, l: int) -> Rotation:
        """Remove the leaf l. The hyperedge itself is removed by the caller."""
        if l not in self.leaf_edge:
            raise DecompositionError("delete_leaf needs a leaf")
        t = self.parent[l]
        if t != self.root and len(self.children[t]) < 3:
            raise DecompositionError("delete_leaf needs a parent with at least three children")
        al = self.adh[l]
        for v in al:
            if self._count(t, v) < 2:
                raise DecompositionError(f"vertex {v} is not covered by the siblings")
        seq = OperationSeq()
        seq.append(DeleteHyperedge(self.label[l], al))
        changed: Dict[int, Set[int]] = {}
        isolated = []
        for v in sorted(al):
            holders = self._holders(t, v, exclude=l)
            if len(holders) == 1 and holders[0] != t:
                changed.setdefault(holders[0], set()).add(v)
                isolated.append(v)
        del self.children[t][l]
        for s in sorted(changed):
            seq.append(DeleteHyperedge(self.label[s], self.adh[s]))
            self.adh[s] = self.adh[s] - frozenset(changed[s])
            seq.append(AddHyperedge(self._fresh_label(s), self.adh[s]))
        for v in isolated:
            seq.append(DeleteVertex(v))
        e = self.leaf_edge[l]
        for a in self.ancestors(t):
            self.nleaves[a] -= 1
        self._remove_node(l)
        del self.edge_leaf[e]
        self._apply_delta(t, seq)
        self._mark(t, *changed)
        self._mark_struct(t, *changed)
        size = max(1, self.alpha) ** 2 + self.depth_of(t) + 1
        return self._record(Rotation("delete_leaf", t, size, {t: seq}, [t, l] + list(changed)))

    def _holders(self, t: int, v: int, exclude: int) -> List[int]:
        """Neighbours of t (children, or t itself for the parent edge) whose
        torso hyperedge contains v, other than ``exclude``."""
        out = []
        if t == self.root:
            rt = self.root_torso
            if rt.has_vertex(v):
                for lab in rt.edges_of(v):
                    c = self.label_node[lab]
                    if c != exclude and v in self.adh[c]:
                        out.append(c)
            return sorted(out)
        if v in self.adh[t]:
            out.append(t)
        out.extend(c for c in self.children[t] if c != exclude and v in self.adh[c])
        return out

    def _remove_node(self, t: int) -> None:
        p = self.parent.pop(t)
        if p is not None and t in self.children.get(p, {}):
            del self.children[p][t]
        self.children.pop(t, None)
        self.adh.pop(t, None)
        self.nleaves.pop(t, None)
        self.height.pop(t, None)
        self.EL.pop(t, None)
        self.stamp.pop(t, None)
        self.phi -= self._phi.pop(t, 0.0)
        lab = self.label.pop(t, None)
        if lab is not None and self.label_node.get(lab) == t:
            del self.label_node[lab]
        self.label_batch.pop(t, None)
        self.leaf_edge.pop(t, None)
        self._dirty.discard(t)

    # potential -----------------------------------------------------------

    def node_potential(self, t: int) -> float:
        """(deg(t) - 1) * log2 |L[t]| for internal nodes (the root included),
        0 for leaves."""
        if t in self.leaf_edge:
            return 0.0
        n = self.nleaves[t]
        d = len(self.children[t])
        if n <= 1 or d <= 1:
            return 0.0
        return (d - 1) * math.log2(n)

    def potential(self) -> float:
        return sum(self.node_potential(t) for t in self.parent if t not in self.leaf_edge)

    # recomputation helpers -------------------------------------------------

    def recomputed_adhesion(self, t: int) -> FrozenSet[int]:
        return frozenset(self.g.bd(self.leaves_below(t)))

    def dump(self) -> str:
        """Deterministic text dump of (T, L, adhesions).

        Internal nodes are renamed n0, n1, ... in a canonical preorder where
        children are sorted by their smallest hyperedge label; leaves are
        named e<label>.
        """
        first: Dict[int, int] = {}
        for t in sorted(self.parent, key=lambda x: -self.depth_of(x)):
            if t in self.leaf_edge:
                first[t] = self.leaf_edge[t]
            else:
                first[t] = min((first[c] for c in self.children[t]), default=-1)
        canon: Dict[int, str] = {}
        order = []
        stack = [self.root]
        while stack:
            x = stack.pop()
            order.append(x)
            if x not in self.leaf_edge:
                stack.extend(sorted(self.children[x], key=lambda c: first[c], reverse=True))
        k = 0
        for x in order:
            if x in self.leaf_edge:
                canon[x] = f"e{self.leaf_edge[x]}"
            else:
                canon[x] = f"n{k}"
                k += 1
        lines = []
        for x in order:
            if x == self.root:
                lines.append(f"root {canon[x]}")
                continue
            a = " ".join(str(v) for v in sorted(self.adh[x]))
            lines.append(f"node {canon[x]} parent {canon[self.parent[x]]} adh {a}".rstrip())
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        out = ["digraph T {"]
        for t in sorted(self.parent):
            lab = f"e{self.leaf_edge[t]}" if t in self.leaf_edge else f"t{t}"
            if t != self.root:
                lab += "\\n" + ",".join(str(v) for v in sorted(self.adh[t]))
            out.append(f'  {t} [label="{lab}"];')
        for t, p in sorted((t, p) for t, p in self.parent.items() if p is not None):
            out.append(f"  {p} -> {t};")
        out.append("}")
        return "\n".join(out) + "\n"


# Protrusion decomposition ----------------------------------------------


class ProtrusionDecomposition:
    """The annotated tree decomposition corresponding to a superbranch
    decomposition.

    Every node t keeps bag(t) = V(torso(t)); a leaf holding hyperedge e gets
    bag V(e) so that isolated vertices are covered too. A non-root node with
    d > 2 children is replaced by a chain t_1 ... t_{d-1} with the same bag.
    Edges sit at the top of the chain of the shallowest node covering them.
    Nodes of the tree are pairs (t, i): i = 0 for unchained nodes and
    i = 1 .. d-1 along a chain.
    """

    def __init__(self, sb: SuperbranchDecomposition):
        self.sb = sb

    def bag_of(self, t: int) -> FrozenSet[int]:
        sb = self.sb
        if t in sb.leaf_edge:
            return frozenset(sb.g.vertices_of(sb.leaf_edge[t]))
        return frozenset(sb.torso_vertices(t))

    def edges_of(self, t: int) -> FrozenSet[int]:
        sb = self.sb
        if t == sb.root:
            return sb.EL[t]
        p = sb.parent[t]
        return sb.EL[t] - sb.EL[p]

    def chain_length(self, t: int) -> int:
        sb = self.sb
        if t == sb.root or t in sb.leaf_edge:
            return 0
        d = len(sb.children[t])
        return d - 1 if d > 2 else 0

    def build(self):
        """Materialize nodes as {(t, i): (bag, edges, parent)}."""
        sb = self.sb
        out: Dict[Tuple[int, int], Tuple[FrozenSet[int], FrozenSet[int], Optional[Tuple[int, int]]]] = {}

        def top(t):
            return (t, 1) if self.chain_length(t) else (t, 0)

        for t in sb.parent:
            bag = self.bag_of(t)
            edges = self.edges_of(t)
            p = sb.parent[t]
            ptop = None
            if p is not None:
                # attach to the chain node of p that owns t
                if self.chain_length(p):
                    kids = list(sb.children[p])
                    i = kids.index(t)
                    ptop = (p, min(i + 1, len(kids) - 1))
                else:
                    ptop = top(p)
            L = self.chain_length(t)
            if L:
                for i in range(1, L + 1):
                    par = ptop if i == 1 else (t, i - 1)
                    out[(t, i)] = (bag, edges if i == 1 else frozenset(), par)
            else:
                out[(t, 0)] = (bag, edges, ptop)
        return out

    def edges_partition_ok(self) -> bool:
        seen: Counter = Counter()
        for t in self.sb.parent:
            for e in self.edges_of(t):
                seen[e] += 1
        graph_edges = [e for e in self.sb.g.edges() if len(self.sb.g.vertices_of(e)) == 2]
        return all(seen[e] == 1 for e in graph_edges) and sum(seen.values()) == len(graph_edges)
