"""Potential accounting, good/semigood predicates and the balancing
operations (rebalance, rotate-to-root, isolate) built from basic rotations.

All regrouping is planned first on a virtual torso, a small hypergraph whose
hyperedges are the adhesions of the atoms being regrouped. Planned groups
are well-linked parts with boundary at most alpha, so realizing a plan with
splits keeps the decomposition downwards well-linked with bounded adhesion.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Dict, Iterable, List, Optional, Set

from .hypergraph import Hypergraph
from .superbranch import DecompositionError, SuperbranchDecomposition
from .welllinked import SizeLimitExceeded, is_well_linked, partition_well_linked, well_linked_number


class BalanceConfig:
    """Semigood parameter c with the derived degree bound and window.

    ``window`` is the depth at which a heavy chain triggers a rebuild. It
    must not exceed d = 2^(2c+1); a d'-balanced node is also d-balanced.
    """

    def __init__(self, c: int = 3, window: int = 4):
        if c < 3:
            raise ValueError("c must be at least 3")
        self.c = c
        self.alpha = c
        self.max_degree = 2 ** (2 * c) + 1
        self.d = 2 ** (2 * c + 1)
        if not 1 <= window <= self.d:
            raise ValueError("window must lie in [1, 2^(2c+1)]")
        self.window = window


# Predicates ------------------------------------------------------------


def heavy_chain(sb: SuperbranchDecomposition, t: int) -> List[int]:
    """t followed by the descendants holding at least 2/3 of L[t]."""
    W = sb.nleaves[t]
    chain = [t]
    x = t
    while x not in sb.leaf_edge and sb.children[x]:
        best = max(sb.children[x], key=lambda c: (sb.nleaves[c], -c))
        if 3 * sb.nleaves[best] >= 2 * W:
            chain.append(best)
            x = best
        else:
            break
    return chain


def is_balanced(sb: SuperbranchDecomposition, t: int, d: int) -> bool:
    """No descendant at depth >= d below t holds 2/3 of the leaves of t."""
    return len(heavy_chain(sb, t)) - 1 < d


def node_well_linked(sb: SuperbranchDecomposition, t: int) -> bool:
    """The child hyperedges of t form a well-linked set of torso(t).

    Given that every child is itself well-linked, this is equivalent to
    L[t] being well-linked in the underlying hypergraph.
    """
    if t in sb.leaf_edge or t == sb.root:
        return True
    h = sb.torso(t)
    return is_well_linked(h, [sb.label[c] for c in sb.children[t]])


def is_c_semigood_at(sb: SuperbranchDecomposition, x: int, cfg: BalanceConfig,
                     wl_limit: int = 12) -> bool:
    """Downwards well-linked, degree bounded and wl(L[x]) <= c."""
    for t in sb.subtree_nodes(x):
        if t in sb.leaf_edge:
            continue
        if len(sb.children[t]) > cfg.max_degree:
            return False
        if not node_well_linked(sb, t):
            return False
    leaves = sb.leaves_below(x)
    if len(leaves) > wl_limit:
        raise SizeLimitExceeded(len(leaves))
    return well_linked_number(sb.g, leaves, limit=wl_limit) <= cfg.c


def is_c_good_at(sb: SuperbranchDecomposition, x: int, cfg: BalanceConfig,
                 d: Optional[int] = None, wl_limit: int = 12) -> bool:
    d = cfg.d if d is None else d
    if not is_c_semigood_at(sb, x, cfg, wl_limit):
        return False
    return all(is_balanced(sb, t, d) for t in sb.subtree_nodes(x) if t not in sb.leaf_edge)


# Planning on a virtual torso ---------------------------------------------


class Planner:
    """Group atoms (children of one node u) into nested well-linked parts.

    Atoms are labeled by their node ids; the parent edge of u and other
    fixed hyperedges use labels below -1000. Planned groups get fresh
    negative labels and replace their members in the virtual torso.
    """

    def __init__(self, sb: SuperbranchDecomposition, u: int, atoms: Iterable[int],
                 fixed: Dict[int, frozenset], cfg: BalanceConfig):
        self.sb = sb
        self.u = u
        self.cfg = cfg
        self.h = Hypergraph()
        self.members: Dict[int, List[int]] = {}
        self.weight: Dict[int, int] = {}
        self._next = -2
        atoms = list(atoms)
        verts: Set[int] = set()
        for a in atoms:
            verts |= sb.adh[a]
        for vs in fixed.values():
            verts |= vs
        for v in sorted(verts):
            self.h.add_vertex(v)
        for a in atoms:
            self.h.add_hyperedge(sb.adh[a], label=a)
            self.weight[a] = sb.nleaves[a]
        for lab, vs in fixed.items():
            self.h.add_hyperedge(vs, label=lab)
        self.work = 0

    def form(self, items: List[int]) -> int:
        bd = self.h.bd(items)
        lab = self._next
        self._next -= 1
        for x in items:
            self.h.delete_hyperedge(x)
        self.h.add_hyperedge(bd, label=lab)
        self.members[lab] = list(items)
        self.weight[lab] = sum(self.weight[x] for x in items)
        self.work += len(items)
        return lab

    def group_wl(self, items: List[int]) -> List[int]:
        """Replace items by well-linked groups where boundaries allow."""
        items = list(items)
        if len(items) <= 1:
            return items
        parts = partition_well_linked(self.h, items)
        self.work += len(items) * len(parts)
        out: List[int] = []
        D = self.cfg.max_degree
        for part in parts:
            part = sorted(part, key=self._order_key)
            if len(part) == 1:
                out.append(part[0])
            elif self.h.lam(part) > self.cfg.alpha:
                out.extend(part)
            elif len(part) <= D:
                out.append(self.form(part))
            else:
                sub = self.reduce_to(part, D)
                if sub is None:
                    out.extend(part)
                else:
                    out.append(self.form(sub))
        return out

    def _order_key(self, x: int):
        return (x < 0, abs(x))

    def bfs_order(self, items: List[int]) -> List[int]:
        """Items ordered by BFS over shared vertices, from the heaviest."""
        iset = set(items)
        left = sorted(items, key=lambda x: (-self.weight[x], self._order_key(x)))
        seen: Set[int] = set()
        order: List[int] = []
        for s in left:
            if s in seen:
                continue
            seen.add(s)
            dq = deque([s])
            while dq:
                x = dq.popleft()
                order.append(x)
                nbrs = set()
                for v in self.h.vertices_of(x):
                    nbrs |= self.h.edges_of(v)
                for y in sorted(nbrs & iset, key=self._order_key):
                    if y not in seen:
                        seen.add(y)
                        dq.append(y)
        return order

    def chunks(self, items: List[int], k: int, by_weight: bool) -> List[List[int]]:
        order = self.bfs_order(items)
        if by_weight:
            total = sum(self.weight[x] for x in order)
            out, cur, acc = [], [], 0
            for x in order:
                cur.append(x)
                acc += self.weight[x]
                if acc * k >= total * (len(out) + 1) and len(out) < k - 1:
                    out.append(cur)
                    cur = []
            if cur:
                out.append(cur)
            return out
        size = math.ceil(len(order) / k)
        return [order[i:i + size] for i in range(0, len(order), size)]

    def reduce_to(self, items: List[int], limit: int) -> Optional[List[int]]:
        """Regroup items until at most ``limit`` entries remain."""
        items = list(items)
        while len(items) > limit:
            before = len(items)
            k = max(2, math.ceil(2 * len(items) / limit))
            new: List[int] = []
            for ch in self.chunks(items, k, by_weight=False):
                new.extend(self.group_wl(ch))
            if len(new) > limit and len(new) < before:
                items = new
                continue
            if len(new) >= before:
                # peel the heaviest entry and regroup the rest
                q = max(new, key=lambda x: (self.weight[x], self._order_key(x)))
                rest = [x for x in new if x != q]
                new = [q] + self.group_wl(rest)
                if len(new) >= before:
                    return None
            items = new
        return items

    def balanced(self, items: List[int]) -> Optional[List[int]]:
        """Top-level entries for u with no entry holding 2/3 of the weight
        unless it is a single atom."""
        W = sum(self.weight[x] for x in items)
        heavy = [x for x in items if 3 * self.weight[x] >= 2 * W]
        if heavy:
            a = heavy[0]
            rest = [x for x in items if x != a]
            entries = [a] + self.group_wl(rest)
        else:
            entries = []
            for ch in self.chunks(items, 2, by_weight=True):
                entries.extend(self.group_wl(ch))
        if len(entries) > self.cfg.max_degree:
            entries = self.reduce_to(entries, self.cfg.max_degree)
        if entries is not None and len(entries) == 1 and entries[0] < 0:
            entries = self.members[entries[0]]
        return entries

    def planned_potential(self, entries: List[int], total: int) -> float:
        phi = (len(entries) - 1) * math.log2(total) if len(entries) > 1 and total > 1 else 0.0
        stack = [x for x in entries if x < 0]
        while stack:
            g = stack.pop()
            m = self.members[g]
            w = self.weight[g]
            if len(m) > 1 and w > 1:
                phi += (len(m) - 1) * math.log2(w)
            stack.extend(x for x in m if x < 0)
        return phi

    def realize(self, entries: List[int]) -> List[int]:
        """Apply the plan with splits at u; return the new nodes."""
        created: List[int] = []

        def make(x: int) -> int:
            if x >= 0:
                return x
            kids = [make(y) for y in self.members[x]]
            rot = self.sb.split(self.u, kids)
            created.append(rot.new_node)
            return rot.new_node

        for x in entries:
            make(x)
        return created


# Balancing operations ------------------------------------------------------

_PARENT = -1000
_LEAF = -1001


def _fixed_edges(sb: SuperbranchDecomposition, u: int, extra: Iterable[int] = ()) -> Dict[int, frozenset]:
    fixed = {}
    if u != sb.root:
        fixed[_PARENT] = sb.adh[u]
    for i, x in enumerate(extra):
        fixed[_LEAF - i] = sb.adh[x]
    return fixed


def explode(sb: SuperbranchDecomposition, u: int, cfg: BalanceConfig) -> None:
    """Contract u and, while degrees overflow, its ancestors."""
    while u != sb.root:
        p = sb.parent[u]
        sb.contract(u)
        if p == sb.root or len(sb.children[p]) <= cfg.max_degree:
            return
        u = p


def build(sb: SuperbranchDecomposition, u: int, cfg: BalanceConfig) -> List[int]:
    """Bring the degree of a non-root node u down to the bound."""
    if u == sb.root or len(sb.children[u]) <= cfg.max_degree:
        return []
    atoms = list(sb.children[u])
    pl = Planner(sb, u, atoms, _fixed_edges(sb, u), cfg)
    entries = pl.reduce_to(atoms, cfg.max_degree)
    sb.work += pl.work
    if entries is None:
        explode(sb, u, cfg)
        return []
    return pl.realize(entries)


def rebalance(sb: SuperbranchDecomposition, nodes: Iterable[int], cfg: BalanceConfig) -> int:
    """Rebuild heavy chains of length >= window below the given nodes.

    Nodes are processed top-down; a rebuild is applied only when its planned
    potential does not exceed the current one. Returns the rebuild count.
    """
    todo = [t for t in set(nodes) if t in sb.parent and t != sb.root and t not in sb.leaf_edge]
    todo.sort(key=lambda t: sb.depth_of(t))
    queue = deque(todo)
    rebuilt = 0
    guard = 0
    while queue and guard < 10000:
        guard += 1
        u = queue.popleft()
        if u not in sb.parent or u in sb.leaf_edge or u == sb.root:
            continue
        chain = heavy_chain(sb, u)
        if len(chain) - 1 < cfg.window:
            continue
        inner = [x for x in chain[1:cfg.window + 1] if x not in sb.leaf_edge]
        if not inner:
            continue
        atoms: List[int] = []
        prev = u
        for x in inner:
            atoms.extend(c for c in sb.children[prev] if c != x)
            prev = x
        atoms.extend(sb.children[prev])
        before = sb.node_potential(u) + sum(sb.node_potential(x) for x in inner)
        pl = Planner(sb, u, atoms, _fixed_edges(sb, u), cfg)
        entries = pl.balanced(atoms)
        sb.work += pl.work
        if entries is None or len(entries) < 2:
            continue
        after = pl.planned_potential(entries, sb.nleaves[u])
        if after > before + 1e-9:
            continue
        for x in inner:
            sb.contract(x)
        created = pl.realize(entries)
        rebuilt += 1
        queue.extend(sorted(created, key=lambda t: sb.depth_of(t)))
        queue.append(u)
        # the heavy entry keeps the rest of the chain below u
        queue.extend(c for c in sb.children[u] if c not in sb.leaf_edge and c not in created)
    return rebuilt


def rotate_to_root(sb: SuperbranchDecomposition, x: int, e: int, cfg: BalanceConfig) -> List[int]:
    """Make the leaf of e a child of x, keeping x semigood.

    The path from x to the leaf is contracted into x and the hanging
    subtrees are regrouped level by level, deepest first, into well-linked
    parts. Returns the nodes created.
    """
    l = sb.edge_leaf.get(e)
    if l is None or x not in sb.ancestors(l):
        raise DecompositionError("hyperedge is not below the given node")
    if l == x or sb.parent[l] == x:
        return []
    path = []
    y = sb.parent[l]
    while y != x:
        path.append(y)
        y = sb.parent[y]
    path.reverse()  # p_1 .. p_{k-1}, top-down
    levels: List[List[int]] = []
    below = path + [l]
    cur = x
    for nxt in below:
        levels.append([c for c in sb.children[cur] if c != nxt])
        cur = nxt
    for p in path:
        sb.contract(p)
    atoms = [c for c in sb.children[x] if c != l]
    pl = Planner(sb, x, atoms, _fixed_edges(sb, x, [l]), cfg)
    carry: List[int] = []
    for items in reversed(levels):
        carry = pl.group_wl(items + carry)
    if len(carry) + 1 > cfg.max_degree:
        red = pl.reduce_to(carry, cfg.max_degree - 1)
        if red is not None:
            carry = red
    sb.work += pl.work
    created = pl.realize(carry)
    if len(sb.children[x]) > cfg.max_degree and x != sb.root:
        created += build(sb, x, cfg)
    return created


def isolate(sb: SuperbranchDecomposition, X: Iterable[int], cfg: BalanceConfig) -> None:
    """Make the leaves of the hyperedges X children of the root."""
    for e in X:
        l = sb.edge_leaf[e]
        if sb.parent[l] == sb.root:
            continue
        x = sb.root_child_of(l)
        created = rotate_to_root(sb, x, e, cfg)
        sb.contract(x)
        rebalance(sb, [t for t in created if t in sb.parent], cfg)


def merge(sb: SuperbranchDecomposition, A: Iterable[int], cfg: BalanceConfig) -> int:
    """Group the root children A under a fresh child and rebalance it."""
    A = list(A)
    if not 2 <= len(A) <= cfg.max_degree:
        raise DecompositionError("merge needs 2 <= |A| <= 2^(2c)+1")
    if len(sb.children[sb.root]) - len(A) < 2:
        raise DecompositionError("merge needs at least two other root children")
    if len(sb.split_boundary(sb.root, A)) > cfg.alpha:
        raise DecompositionError("merged set has boundary above alpha")
    rot = sb.split(sb.root, A)
    z = rot.new_node
    rebalance(sb, [z], cfg)
    return z
