"""Dynamic local search over a hypergraph: the chip index.

A chip is an internally connected set Z of hyperedges with |Z| <= s2,
lambda(Z) <= k and oracle(Z, bd(Z)) true. The index keeps every chip,
grouped by boundary, with the group volumes in a lazy max-heap.

Updates are applied in batches. Every operation only changes incidences at
the vertices it touches, so a chip whose vertex set avoids all touched
vertices keeps its boundary, interior and oracle value. Those chips stay;
all others are dropped and the chips meeting the touched vertices are
enumerated again by local search from the hyperedges at those vertices.
"""

from __future__ import annotations

import heapq
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .hypergraph import AddHyperedge, AddVertex, DeleteHyperedge, DeleteVertex, Hypergraph

Oracle = Callable[[FrozenSet[int], FrozenSet[int]], bool]


class ChipParams:
    def __init__(self, s1: int = 16, s2: int = 64, k: int = 2):
        if not 1 <= s1 <= s2:
            raise ValueError("need 1 <= s1 <= s2")
        self.s1 = s1
        self.s2 = s2
        self.k = k


def static_local_search(h: Hypergraph, I: Iterable[int], X: Iterable[int], p: int, s: int, k: int,
                        counter: Optional[List[int]] = None, avoid: FrozenSet[int] = frozenset(),
                        cache: Optional[Dict] = None) -> List[FrozenSet[int]]:
    """All sets A with I <= A, X <= bd(A), |A| <= p, |V(A)| <= s,
    lambda(A) <= k and every internal component of A meeting I.

    Branches on a boundary vertex v of the current set outside X: either v
    stays on the boundary, or v is interior and all its hyperedges join.
    Sets meeting ``avoid`` are skipped; ``cache`` memoizes boundaries.
    """
    I0 = frozenset(I)
    X0 = frozenset(X)
    if not I0 or len(I0) > p:
        return []
    if not X0 <= h.vertex_union(I0):
        raise ValueError("X must lie inside V(I)")
    out: List[FrozenSet[int]] = []
    if len(X0) > k:
        return out
    stack = [(I0, X0)]
    while stack:
        cur, Xc = stack.pop()
        if counter is not None:
            counter[0] += 1
        if len(Xc) > k or len(cur) > p or (avoid and not avoid.isdisjoint(cur)):
            continue
        if cache is None:
            vs, bd = h.boundary(cur)
        else:
            got = cache.get(cur)
            if got is None:
                got = cache[cur] = h.boundary(cur)
            vs, bd = got
        if len(vs) > s or not Xc <= bd:
            continue
        rest = bd - Xc
        if not rest:
            out.append(cur)
            continue
        v = min(rest)
        stack.append((cur | h.edges_of(v), Xc))
        stack.append((cur, Xc | {v}))
    return out


def is_chip(h: Hypergraph, Z: Iterable[int], params: ChipParams, oracle: Oracle) -> bool:
    Z = frozenset(Z)
    if not Z or len(Z) > params.s2:
        return False
    bd = h.bd(Z)
    if len(bd) > params.k or not h.is_internally_connected(Z):
        return False
    return bool(oracle(Z, frozenset(bd)))


def brute_force_chips(h: Hypergraph, params: ChipParams, oracle: Oracle, limit: int = 16) -> Set[FrozenSet[int]]:
    """Every chip by subset enumeration (oracle use)."""
    E = sorted(h.edges())
    if len(E) > limit:
        raise ValueError("too many hyperedges for brute force")
    out = set()
    for r in range(1, min(len(E), params.s2) + 1):
        for Z in combinations(E, r):
            if is_chip(h, Z, params, oracle):
                out.add(frozenset(Z))
    return out


def is_semi_mergeable(h: Hypergraph, C: Iterable[int], params: ChipParams, oracle: Oracle) -> bool:
    """lambda(C) <= k and every internal component has the boundary of C
    and passes the oracle."""
    C = frozenset(C)
    if not C:
        return False
    bd = frozenset(h.bd(C))
    if len(bd) > params.k:
        return False
    for comp in h.internal_components(C):
        if frozenset(h.bd(comp)) != bd or not oracle(comp, bd):
            return False
    return True


def brute_force_semi_mergeable(h: Hypergraph, params: ChipParams, oracle: Oracle,
                               limit: int = 22) -> Optional[FrozenSet[int]]:
    """Some semi-mergeable set with s1 <= |C| <= s2, or None (oracle use)."""
    E = sorted(h.edges())
    if len(E) > limit:
        raise ValueError("too many hyperedges for brute force")
    for r in range(params.s1, min(len(E), params.s2) + 1):
        for C in combinations(E, r):
            if is_semi_mergeable(h, C, params, oracle):
                return frozenset(C)
    return None


class ChipIndex:
    """All chips of a mirrored hypergraph, grouped by boundary."""

    def __init__(self, params: ChipParams, oracle: Oracle, h: Optional[Hypergraph] = None):
        self.params = params
        self.oracle = oracle
        self.h = Hypergraph() if h is None else h.copy()
        self.chips: Dict[FrozenSet[int], Tuple[int, ...]] = {}
        self.by_vertex: Dict[int, Set[FrozenSet[int]]] = {}
        self.by_edge: Dict[int, Set[FrozenSet[int]]] = {}
        self.groups: Dict[Tuple[int, ...], Set[FrozenSet[int]]] = {}
        self.vol: Dict[Tuple[int, ...], int] = {}
        self._heap: List[Tuple[int, Tuple[int, ...]]] = []
        self.work = 0
        if self.h.num_edges():
            self._rescan(set(self.h.vertices()), set(self.h.edges()))

    # bookkeeping -----------------------------------------------------------

    def _add_chip(self, Z: FrozenSet[int], bd: Tuple[int, ...]) -> None:
        if Z in self.chips:
            return
        group = self.groups.setdefault(bd, set())
        for other in group:
            if other & Z:
                raise AssertionError("chips with equal boundary must be disjoint")
        self.chips[Z] = bd
        group.add(Z)
        for v in self.h.vertex_union(Z):
            self.by_vertex.setdefault(v, set()).add(Z)
        for e in Z:
            self.by_edge.setdefault(e, set()).add(Z)
        self.vol[bd] = self.vol.get(bd, 0) + len(Z)
        heapq.heappush(self._heap, (-self.vol[bd], bd))

    def _drop_chip(self, Z: FrozenSet[int], verts: Iterable[int]) -> None:
        bd = self.chips.pop(Z, None)
        if bd is None:
            return
        for v in verts:
            s = self.by_vertex.get(v)
            if s is not None:
                s.discard(Z)
                if not s:
                    del self.by_vertex[v]
        for e in Z:
            s = self.by_edge.get(e)
            if s is not None:
                s.discard(Z)
                if not s:
                    del self.by_edge[e]
        g = self.groups[bd]
        g.discard(Z)
        self.vol[bd] -= len(Z)
        if not g:
            del self.groups[bd]
            del self.vol[bd]
        else:
            heapq.heappush(self._heap, (-self.vol[bd], bd))

    # updates -----------------------------------------------------------------

    def apply(self, ops: Iterable) -> None:
        """Apply a batch of hypergraph operations and resynchronize."""
        touched_v: Set[int] = set()
        seeds_e: Set[int] = set()
        for op in ops:
            if isinstance(op, AddVertex):
                self.h.add_vertex(op.v)
            elif isinstance(op, DeleteVertex):
                self.h.delete_vertex(op.v)
            elif isinstance(op, AddHyperedge):
                self.h.add_hyperedge(op.verts, label=op.e)
                touched_v.update(op.verts)
                seeds_e.add(op.e)
            elif isinstance(op, DeleteHyperedge):
                for Z in list(self.by_edge.get(op.e, ())):
                    self._drop_chip(Z, self.h.vertex_union(Z))
                touched_v.update(self.h.vertices_of(op.e))
                self.h.delete_hyperedge(op.e)
                seeds_e.discard(op.e)
            else:
                raise TypeError(op)
        for v in touched_v:
            for Z in list(self.by_vertex.get(v, ())):
                self._drop_chip(Z, self.h.vertex_union(Z))
        self._rescan(touched_v, seeds_e)

    def _rescan(self, verts: Set[int], extra_seeds: Set[int]) -> None:
        p = self.params
        seeds: Set[int] = set(e for e in extra_seeds if self.h.has_edge(e))
        for v in verts:
            if self.h.has_vertex(v):
                seeds |= self.h.edges_of(v)
        counter = [0]
        seen: Set[FrozenSet[int]] = set()
        cache: Dict = {}
        done: Set[int] = set()
        smax = p.s2 * max(1, self.h.rank())
        for f in sorted(seeds):
            # sets holding an earlier seed were found from that seed
            avoid = frozenset(done)
            done.add(f)
            for A in static_local_search(self.h, [f], [], p.s2, smax, p.k, counter, avoid, cache):
                if A in seen or A in self.chips:
                    continue
                seen.add(A)
                bd = tuple(sorted(self.h.bd(A)))
                if len(A) > 1 and not self.h.is_internally_connected(A):
                    continue
                if self.oracle(A, frozenset(bd)):
                    self._add_chip(A, bd)
        self.work += counter[0]

    # queries -----------------------------------------------------------------

    def chip_set(self) -> Set[FrozenSet[int]]:
        return set(self.chips)

    def query(self) -> Optional[FrozenSet[int]]:
        """A semi-mergeable set of size in [s1/2, s2], or None when no
        boundary group reaches volume s1."""
        got = self.candidates(1)
        return got[0] if got else None

    def candidates(self, limit: int, max_size: Optional[int] = None) -> List[FrozenSet[int]]:
        """query() for each of the ``limit`` heaviest groups of volume >= s1,
        skipping groups whose set is larger than ``max_size``."""
        out: List[FrozenSet[int]] = []
        popped = []
        seen = set()
        while self._heap and len(out) < limit:
            negvol, bd = heapq.heappop(self._heap)
            if self.vol.get(bd) != -negvol or bd in seen:
                continue
            popped.append((negvol, bd))
            seen.add(bd)
            if -negvol < self.params.s1:
                break
            C = self._group_set(bd)
            if max_size is None or len(C) <= max_size:
                out.append(C)
        for item in popped:
            heapq.heappush(self._heap, item)
        return out

    def _group_set(self, bd: Tuple[int, ...]) -> FrozenSet[int]:
        chips = sorted(self.groups[bd], key=lambda Z: (len(Z), sorted(Z)))
        half = self.params.s1 / 2
        for Z in reversed(chips):
            if len(Z) >= half:
                return Z
        out: Set[int] = set()
        for Z in chips[:self.params.s2]:
            out |= Z
            if len(out) >= half:
                break
        return frozenset(out)

    def check(self) -> None:
        """Internal consistency of groups and volumes."""
        for bd, g in self.groups.items():
            assert g and self.vol[bd] == sum(len(Z) for Z in g)
            for Z in g:
                assert self.chips[Z] == bd
        assert sum(len(g) for g in self.groups.values()) == len(self.chips)

    def dump(self) -> str:
        lines = []
        for bd in sorted(self.groups):
            lines.append(f"group {' '.join(map(str, bd))} vol {self.vol[bd]} chips {len(self.groups[bd])}")
        return "\n".join(lines) + ("\n" if lines else "")
