"""The assembled dynamic data structure: graph updates on the support
hypergraph, isolate-then-edit update paths, maintained node states, the chip
index over torso(r), the root-degree reduction loop and the kernels."""

from __future__ import annotations

from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .automata import ItwAlgebra, NodeRuns, itw_decide_states
from .balancing import BalanceConfig, isolate, merge
from .chips import ChipIndex, ChipParams
from .hypergraph import (AddHyperedge, AddVertex, DeleteHyperedge, DeleteVertex, DuplicateEdge,
                         DuplicateVertex, HypergraphError, MissingEdge, MissingVertex,
                         NonIsolatedVertex, SupportHypergraph)
from .kernelplug import Kernel, PLUGINS, default_store, get_plugin
from .superbranch import DecompositionError, SuperbranchDecomposition
from .welllinked import SizeLimitExceeded, partition_well_linked, well_linked_number


# merged leaf sets up to this size get an exact wl check
WL_MERGE_LIMIT = 10


class EngineError(Exception):
    exit_code = 2


class InputError(EngineError):
    """Invalid update for the current graph (also the density tripwire)."""
    exit_code = 1


class InvariantViolation(EngineError):
    exit_code = 2


class BudgetExceeded(EngineError):
    exit_code = 3


class EngineConfig:
    """Engine parameters.

    c is both the adhesion bound alpha and the semigood parameter; omega
    bounds the internal treewidth of merged sets; s1, s2, k are the chip
    parameters; merge_budget caps merges per update and merge_tries the
    chip groups tried per merge.
    """

    def __init__(self, c: int = 3, omega: int = 2, s1: Optional[int] = None, s2: int = 64,
                 k: Optional[int] = None, merge_budget: int = 16, paranoid: bool = False,
                 plugins: Sequence[str] = ("vc", "ds"), window: int = 4, density: float = 6.0,
                 max_change: int = 100000, merge_tries: int = 4):
        if c < 3:
            raise ValueError("c must be at least 3")
        if omega < 0:
            raise ValueError("omega must be non-negative")
        self.c = c
        self.alpha = c
        self.omega = omega
        self.s1 = 2 ** (omega + 2) if s1 is None else s1
        self.s2 = s2
        self.k = omega if k is None else k
        if self.k < omega:
            raise ValueError("k must be at least omega")
        if not 2 <= self.s1 <= self.s2:
            raise ValueError("need 2 <= s1 <= s2")
        if self.s2 > 2 ** (2 * c) + 1:
            raise ValueError("s2 must not exceed the degree bound 2^(2c)+1")
        if self.k > c:
            raise ValueError("k must not exceed c")
        for p in plugins:
            if p not in PLUGINS:
                raise ValueError(f"unknown plugin {p!r}")
        self.merge_budget = merge_budget
        self.merge_tries = merge_tries
        self.paranoid = paranoid
        self.plugins = tuple(plugins)
        self.window = window
        self.density = density
        self.max_change = max_change


class ChangeReport:
    """What one engine step did to torso(r), edges(r), bag(r) and kernels."""

    __slots__ = ("op", "C", "edges_delta", "bag_delta", "kernel_delta", "work", "rotations",
                 "evaluations", "merges")

    def __init__(self, op, C, edges_delta, kernel_delta, work, rotations, evaluations, merges=()):
        self.op = op
        self.C = tuple(C)
        self.edges_delta = tuple(edges_delta)
        self.bag_delta = tuple(("+" if isinstance(o, AddVertex) else "-", o.v)
                               for o in C if isinstance(o, (AddVertex, DeleteVertex)))
        self.kernel_delta = {k: tuple(v) for k, v in kernel_delta.items()}
        self.work = work
        self.rotations = rotations
        self.evaluations = evaluations
        self.merges = tuple(merges)

    def total_work(self) -> int:
        return self.work + sum(m.work for m in self.merges)

    def all_kernel_ops(self, plugin: str) -> List[Tuple]:
        out = list(self.kernel_delta.get(plugin, ()))
        for m in self.merges:
            out.extend(m.kernel_delta.get(plugin, ()))
        return out

    def __repr__(self):
        return f"ChangeReport({self.op}, |C|={len(self.C)}, merges={len(self.merges)}, work={self.total_work()})"


class Engine:
    """Dynamic superbranch decomposition, chip index and kernels of a graph."""

    def __init__(self, config: Optional[EngineConfig] = None):
        self.cfg = config or EngineConfig()
        cfg = self.cfg
        self.g = SupportHypergraph()
        self.sb = SuperbranchDecomposition(self.g, alpha=cfg.alpha)
        self.bal = BalanceConfig(cfg.c, cfg.window)
        self.itw = ItwAlgebra(cfg.omega)
        self.runs: Dict[str, NodeRuns] = {"itw": NodeRuns(self.itw, self.sb)}
        self.kernels: Dict[str, Kernel] = {}
        for name in cfg.plugins:
            plugin = get_plugin(name)
            self.runs[name] = NodeRuns(plugin, self.sb)
            self.kernels[name] = Kernel(plugin, default_store(name))
        self.chips = ChipIndex(ChipParams(cfg.s1, cfg.s2, cfg.k), self.oracle)
        self.updates = 0
        self.oracle_calls = 0
        self.budget_hits = 0
        self.last: Optional[ChangeReport] = None
        self.verifier = None

    # oracle ----------------------------------------------------------------

    def oracle(self, Z: FrozenSet[int], bd: FrozenSet[int]) -> bool:
        """itw(S) <= omega for the root-child set S with labels Z."""
        self.oracle_calls += 1
        sb = self.sb
        runs = self.runs["itw"]
        states = []
        extra = []
        vo = self.g.vertices_of
        for lab in Z:
            c = sb.label_node[lab]
            states.append(runs.state[c])
            for e in sb._root_contrib.get(lab, ()):
                extra.append(vo(e))
        return itw_decide_states(self.itw, states, extra, bd)

    # graph queries -----------------------------------------------------------

    def num_vertices(self) -> int:
        return len(self.g.vertex_edge)

    def num_edges(self) -> int:
        return len(self.g.pair_edge)

    def graph_edges(self) -> List[Tuple[int, int]]:
        return self.g.graph_edges()

    def graph_vertices(self) -> List[int]:
        return self.g.graph_vertices()

    def root_degree(self) -> int:
        return len(self.sb.children[self.sb.root])

    def max_depth(self) -> int:
        sb = self.sb
        return max((sb.height[c] + 1 for c in sb.children[sb.root]), default=0)

    def kernel(self, plugin: str) -> Kernel:
        return self.kernels[plugin]

    # update paths --------------------------------------------------------------

    def _leaf(self, e: int) -> int:
        return self.sb.edge_leaf[e]

    def add_vertex(self, v: int) -> ChangeReport:
        if v in self.g.vertex_edge or self.g.has_vertex(v):
            raise InputError(f"vertex {v} already present")
        self.sb.begin_batch()
        e = self.g.add_graph_vertex(v)
        self.sb.insert_leaf(self.sb.root, e)
        return self._finish(("av", v))

    def delete_vertex(self, v: int) -> ChangeReport:
        if v not in self.g.vertex_edge:
            raise InputError(f"vertex {v} not present")
        if self.g.degree(v) > 1:
            raise InputError(f"vertex {v} is not isolated")
        self.sb.begin_batch()
        e = self.g.vertex_edge[v]
        self._isolate([e])
        self.sb.delete_leaf(self._leaf(e))
        self.g.delete_graph_vertex(v)
        return self._finish(("dv", v))

    def add_edge(self, u: int, v: int) -> ChangeReport:
        for x in (u, v):
            if x not in self.g.vertex_edge:
                raise InputError(f"vertex {x} not present")
        if u == v:
            raise InputError("self loops are not allowed")
        key = (min(u, v), max(u, v))
        if key in self.g.pair_edge:
            raise InputError(f"edge {key} already present")
        if self.num_edges() + 1 > self.cfg.density * max(1, self.num_vertices()):
            raise InputError(f"density tripwire: |E| would exceed {self.cfg.density}|V|")
        self.sb.begin_batch()
        eu, ev = self.g.vertex_edge[u], self.g.vertex_edge[v]
        self._isolate([eu, ev])
        e = self.g.add_graph_edge(u, v)
        self.sb.insert_leaf(self.sb.root, e, [self._leaf(eu), self._leaf(ev)])
        return self._finish(("ae", u, v))

    def delete_edge(self, u: int, v: int) -> ChangeReport:
        key = (min(u, v), max(u, v))
        if key not in self.g.pair_edge:
            raise InputError(f"edge {key} not present")
        self.sb.begin_batch()
        e = self.g.pair_edge[key]
        self._isolate([self.g.vertex_edge[u], self.g.vertex_edge[v], e])
        self.sb.delete_leaf(self._leaf(e))
        self.g.delete_graph_edge(u, v)
        return self._finish(("de", u, v))

    def apply(self, op: Tuple) -> ChangeReport:
        kind = op[0]
        if kind == "av":
            return self.add_vertex(op[1])
        if kind == "dv":
            return self.delete_vertex(op[1])
        if kind == "ae":
            return self.add_edge(op[1], op[2])
        if kind == "de":
            return self.delete_edge(op[1], op[2])
        raise InputError(f"unknown operation {kind!r}")

    def _isolate(self, X: List[int]) -> None:
        try:
            isolate(self.sb, X, self.bal)
        except SizeLimitExceeded as exc:
            raise BudgetExceeded(f"size limit during isolation: {exc}") from exc

    # batch commit --------------------------------------------------------------

    def _commit(self, op) -> ChangeReport:
        sb = self.sb
        C, edges_delta, trace = sb.end_batch()
        if len(C) > self.cfg.max_change:
            raise BudgetExceeded(f"|C| = {len(C)} exceeds the configured ceiling")
        dirty = sb.run_dirty()
        evals = 0
        for runs in self.runs.values():
            before = runs.evaluations
            runs.repair(trace, dirty)
            evals += runs.evaluations - before
        kdelta = {}
        for name, k in self.kernels.items():
            kdelta[name] = k.apply_change(sb, C, edges_delta, self.runs[name].state)
        before = self.chips.work
        self.chips.apply(C)
        work = sb.work + evals + (self.chips.work - before)
        return ChangeReport(op, C, edges_delta, kdelta, work, len(sb.rotations), evals)

    def _finish(self, op) -> ChangeReport:
        report = self._commit(op)
        merges = self.reduce_root_degree()
        report.merges = tuple(merges)
        self.updates += 1
        self.last = report
        if self.cfg.paranoid:
            self.check()
        return report

    def check(self) -> None:
        """Full verification; raises InvariantViolation with a witness."""
        from .verify import validate_engine
        verdict = validate_engine(self)
        if not verdict.ok:
            raise InvariantViolation(verdict.witness)

    # root-degree reduction -------------------------------------------------------

    def merge(self, A) -> ChangeReport:
        """Merge the root children A (node ids) under a fresh child."""
        self.sb.begin_batch()
        try:
            merge(self.sb, list(A), self.bal)
        except DecompositionError as exc:
            # nothing was applied; close the empty batch
            self.sb.end_batch()
            raise InputError(str(exc)) from exc
        return self._commit(("merge", tuple(sorted(A))))

    def mergeable_part(self, B) -> Optional[List[int]]:
        """The largest well-linked part of B (labels) that merge accepts."""
        sb = self.sb
        rt = sb.root_torso
        parts = partition_well_linked(rt, sorted(B))
        parts.sort(key=lambda p: (-len(p), sorted(p)))
        n_root = len(sb.children[sb.root])
        for p in parts:
            if len(p) < 2 or len(p) > self.bal.max_degree or n_root - len(p) < 2:
                continue
            if rt.lam(p) > self.bal.alpha:
                continue
            if not self._wl_ok(p):
                continue
            return [sb.label_node[lab] for lab in sorted(p)]
        return None

    def _wl_ok(self, labels) -> bool:
        """Exact wl <= c test for the merged leaf set when it is small enough
        to enumerate; larger sets are accepted on the chip guarantees alone."""
        sb = self.sb
        leaves = [e for lab in labels for e in sb.leaves_below(sb.label_node[lab])]
        if len(leaves) > WL_MERGE_LIMIT:
            return True
        return well_linked_number(sb.g, leaves, limit=WL_MERGE_LIMIT) <= self.cfg.c

    def reduce_root_degree(self) -> List[ChangeReport]:
        out: List[ChangeReport] = []
        while len(out) < self.cfg.merge_budget:
            A = None
            # a merge must leave two other root children
            room = self.root_degree() - 2
            for B in self.chips.candidates(self.cfg.merge_tries, room):
                A = self.mergeable_part(B)
                if A is not None:
                    break
            if A is None:
                return out
            out.append(self.merge(A))
        self.budget_hits += 1
        return out

    # metrics ---------------------------------------------------------------------

    def metrics(self) -> Dict[str, object]:
        sb = self.sb
        rep = self.last
        rec: Dict[str, object] = {
            "n": self.num_vertices(),
            "m": self.num_edges(),
            "root_degree": self.root_degree(),
            "bag_root": sb.root_torso.num_vertices(),
            "max_depth": self.max_depth(),
            "phi": round(sb.phi, 6),
            "work": rep.total_work() if rep else 0,
            "merges": len(rep.merges) if rep else 0,
        }
        for name, k in self.kernels.items():
            rec[f"kernel_{name}"] = k.size()
            rec[f"delta_{name}"] = k.delta
            rec[f"misses_{name}"] = k.misses
        return rec
