"""Deterministic update-stream generators for sparse graph classes.

Every generator returns a list of operations (``("av", v)``,
``("ae", u, v)``, ``("de", u, v)``, ``("dv", v)``) and is reproducible
from its seed.
"""

from __future__ import annotations

import random
from typing import List, Tuple

import networkx as nx
import numpy as np
from scipy.spatial import Delaunay

KINDS = ("grid", "random-planar-incremental", "bounded-degree-tree-plus", "mixed-insert-delete")

Op = Tuple


def grid(n: int, seed: int = 0) -> List[Op]:
    """The n x n grid, vertices first, then edges row by row."""
    ops: List[Op] = [("av", i * n + j) for i in range(n) for j in range(n)]
    for i in range(n):
        for j in range(n):
            v = i * n + j
            if j + 1 < n:
                ops.append(("ae", v, v + 1))
            if i + 1 < n:
                ops.append(("ae", v, v + n))
    return ops


def _delaunay_edges(n: int, rng: random.Random) -> List[Tuple[int, int]]:
    pts = np.array([[rng.random(), rng.random()] for _ in range(n)])
    if n < 3:
        return [(0, 1)] if n == 2 else []
    tri = Delaunay(pts)
    edges = set()
    for s in tri.simplices:
        for a in range(3):
            u, v = int(s[a]), int(s[(a + 1) % 3])
            edges.add((min(u, v), max(u, v)))
    return sorted(edges)


def random_planar_incremental(n: int, seed: int = 0, extra: float = 0.1) -> List[Op]:
    """Random spanning tree of a Delaunay triangulation plus about
    ``extra * n`` further edges, each accepted only if the graph stays
    planar. Edges arrive in random order after all vertices."""
    rng = random.Random(seed)
    cand = _delaunay_edges(n, rng)
    dsu = list(range(n))

    def find(x):
        while dsu[x] != x:
            dsu[x] = dsu[dsu[x]]
            x = dsu[x]
        return x

    shuffled = cand[:]
    rng.shuffle(shuffled)
    tree, rest = [], []
    for u, v in shuffled:
        a, b = find(u), find(v)
        if a != b:
            dsu[a] = b
            tree.append((u, v))
        else:
            rest.append((u, v))
    chosen = tree + rest[:int(extra * n)]
    rng.shuffle(chosen)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    ops: List[Op] = [("av", v) for v in range(n)]
    for u, v in chosen:
        g.add_edge(u, v)
        if not nx.check_planarity(g)[0]:
            g.remove_edge(u, v)
            continue
        ops.append(("ae", u, v))
    return ops


def bounded_degree_tree_plus(n: int, seed: int = 0, max_degree: int = 3, extra: int = 2) -> List[Op]:
    """A random tree with degree cap, then ``extra`` chords per 10 vertices
    between close tree vertices, keeping the cap plus one."""
    rng = random.Random(seed)
    ops: List[Op] = [("av", 0)]
    deg = [0] * n
    parent = [-1] * n
    for v in range(1, n):
        ops.append(("av", v))
        while True:
            p = rng.randrange(v)
            if deg[p] < max_degree - (0 if p == 0 else 1):
                break
        deg[p] += 1
        deg[v] += 1
        parent[v] = p
        ops.append(("ae", p, v))
    present = {(min(v, parent[v]), max(v, parent[v])) for v in range(1, n)}
    for _ in range(extra * n // 10):
        v = rng.randrange(n)
        # walk up to the grandparent to keep chords local
        u = parent[parent[v]] if v > 0 and parent[v] > 0 else -1
        if u < 0 or deg[u] > max_degree or deg[v] > max_degree:
            continue
        key = (min(u, v), max(u, v))
        if key in present:
            continue
        present.add(key)
        deg[u] += 1
        deg[v] += 1
        ops.append(("ae", u, v))
    return ops


def mixed_insert_delete(n: int, seed: int = 0, length: int = 0, delete_prob: float = 0.3) -> List[Op]:
    """Interleaved insertions and deletions on a planar edge pool.

    Edges come from a Delaunay triangulation, so every intermediate graph is
    planar. Vertices appear lazily and isolated vertices are sometimes
    deleted and later re-added.
    """
    rng = random.Random(seed)
    pool = _delaunay_edges(n, rng)
    length = length or 4 * n
    alive = set()
    live = set()
    ops: List[Op] = []
    while len(ops) < length:
        r = rng.random()
        if r < delete_prob and live:
            e = rng.choice(sorted(live))
            live.discard(e)
            ops.append(("de",) + e)
            continue
        if r < delete_prob + 0.05 and alive:
            iso = sorted(v for v in alive if not any(v in e for e in live))
            if iso:
                v = rng.choice(iso)
                alive.discard(v)
                ops.append(("dv", v))
                continue
        if not pool:
            break
        u, v = rng.choice(pool)
        if (u, v) in live:
            continue
        for x in (u, v):
            if x not in alive:
                alive.add(x)
                ops.append(("av", x))
        live.add((u, v))
        ops.append(("ae", u, v))
    return ops


def generate(kind: str, n: int, seed: int = 0) -> List[Op]:
    if kind == "grid":
        return grid(n, seed)
    if kind == "random-planar-incremental":
        return random_planar_incremental(n, seed)
    if kind == "bounded-degree-tree-plus":
        return bounded_degree_tree_plus(n, seed)
    if kind == "mixed-insert-delete":
        return mixed_insert_delete(n, seed)
    raise ValueError(f"unknown generator {kind!r}")


def format_ops(ops: List[Op]) -> str:
    return "".join(" ".join(str(x) for x in op) + "\n" for op in ops)
