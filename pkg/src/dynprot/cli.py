"""Command-line front end: run update streams, generate streams, benchmark
work per update and synthesize representative stores.

Exit codes: 0 ok, 1 input error, 2 invariant violation, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import IO, Iterator, List, Optional, Tuple

from .engine import BudgetExceeded, Engine, EngineConfig, EngineError, InputError, InvariantViolation
from .generators import KINDS, format_ops, generate
from .kernelplug import RepresentativeStore, synthesize_representatives

METRICS_SCHEMA = "dynprot-metrics/1"

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_BUDGET = 0, 1, 2, 3


class StreamError(Exception):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def parse_stream(lines) -> Iterator[Tuple[int, Tuple]]:
    """Yield (line number, operation) from the update protocol."""
    arity = {"av": 1, "dv": 1, "ae": 2, "de": 2}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0]
        if op not in arity:
            raise StreamError(lineno, f"unknown operation {op!r}")
        if len(parts) != arity[op] + 1:
            raise StreamError(lineno, f"{op} takes {arity[op]} argument(s)")
        try:
            args = tuple(int(x) for x in parts[1:])
        except ValueError:
            raise StreamError(lineno, "vertex ids must be integers") from None
        if any(a < 0 for a in args):
            raise StreamError(lineno, "vertex ids must be non-negative")
        yield lineno, (op,) + args


def _config(args) -> EngineConfig:
    return EngineConfig(c=args.c, omega=args.omega, s1=args.s1, s2=args.s2, merge_budget=args.merge_budget,
                        paranoid=getattr(args, "paranoid", False), plugins=args.plugin or ("vc", "ds"),
                        density=args.density)


def _kernel_lines(ops) -> List[str]:
    out = []
    for op, x in ops:
        if op == "kd":
            out.append(f"kd {x}")
        elif op.startswith("ke"):
            out.append(f"{op} {x[0]} {x[1]}")
        else:
            out.append(f"{op} {x}")
    return out


def _open_out(path: Optional[str]) -> IO:
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w")


def _config_dict(cfg: EngineConfig) -> dict:
    return {"c": cfg.c, "omega": cfg.omega, "s1": cfg.s1, "s2": cfg.s2, "k": cfg.k,
            "merge_budget": cfg.merge_budget, "plugins": list(cfg.plugins), "paranoid": cfg.paranoid}


def cmd_run(args) -> int:
    try:
        cfg = _config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    engine = Engine(cfg)
    kplugin = args.kernel_plugin or cfg.plugins[0] if cfg.plugins else None
    metrics = _open_out(args.metrics_out)
    kout = open(args.kernel_out, "w") if args.kernel_out else None
    metrics.write(json.dumps({"schema": METRICS_SCHEMA, "config": _config_dict(cfg)}, sort_keys=True) + "\n")
    code = EXIT_OK
    index = 0
    try:
        with open(args.stream) if args.stream != "-" else sys.stdin as f:
            for lineno, op in parse_stream(f):
                index += 1
                try:
                    rep = engine.apply(op)
                except EngineError as exc:
                    print(f"error: update {index} (line {lineno}) {' '.join(map(str, op))}: {exc}",
                          file=sys.stderr)
                    code = exc.exit_code
                    break
                rec = {"i": index}
                rec.update(engine.metrics())
                metrics.write(json.dumps(rec, sort_keys=True) + "\n")
                if kout is not None and kplugin:
                    for line in _kernel_lines(rep.all_kernel_ops(kplugin)):
                        kout.write(line + "\n")
    except StreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    finally:
        if kout is not None:
            if kplugin:
                kout.write(f"kd {engine.kernels[kplugin].delta}\n")
            kout.close()
        if metrics is not sys.stdout:
            metrics.close()
    if args.dump:
        with open(args.dump, "w") as f:
            f.write(engine.sb.dump())
    if args.dot:
        with open(args.dot, "w") as f:
            f.write(engine.sb.to_dot())
    if args.chips_dump:
        with open(args.chips_dump, "w") as f:
            f.write(engine.chips.dump())
    return code


def cmd_gen(args) -> int:
    if args.kind not in KINDS:
        print(f"error: unknown generator {args.kind!r}; choose from {', '.join(KINDS)}", file=sys.stderr)
        return EXIT_INPUT
    ops = generate(args.kind, args.n, args.seed)
    out = _open_out(args.out)
    out.write(format_ops(ops))
    if out is not sys.stdout:
        out.close()
    return EXIT_OK


def _load_ops(source: str) -> List[Tuple]:
    """A stream file, or gen:<kind>:<n>[:<seed>]."""
    if source.startswith("gen:"):
        parts = source.split(":")
        kind, n = parts[1], int(parts[2])
        seed = int(parts[3]) if len(parts) > 3 else 0
        return generate(kind, n, seed)
    with open(source) as f:
        return [op for _, op in parse_stream(f)]


def bench_stream(ops, cfg: EngineConfig) -> dict:
    """Run one stream; return work per update and per-bucket averages."""
    engine = Engine(cfg)
    buckets = {}
    total = 0
    t0 = time.perf_counter()
    max_depth = 0
    for op in ops:
        rep = engine.apply(op)
        w = rep.total_work()
        total += w
        n = max(1, engine.num_vertices())
        b = 2 ** int(math.log2(n))
        cnt, acc = buckets.get(b, (0, 0))
        buckets[b] = (cnt + 1, acc + w)
        max_depth = max(max_depth, engine.max_depth())
    elapsed = time.perf_counter() - t0
    return {"updates": len(ops), "n": engine.num_vertices(), "m": engine.num_edges(),
            "avg_work": total / max(1, len(ops)), "seconds": elapsed, "max_depth": max_depth,
            "root_degree": engine.root_degree(),
            "buckets": {b: acc / cnt for b, (cnt, acc) in sorted(buckets.items())}}


def _plot(rows, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for r in rows:
        xs = [math.log2(b) for b in r["buckets"]]
        ys = list(r["buckets"].values())
        ax.plot(xs, ys, marker="o", label=r["name"])
    ax.set_xlabel("log2 n")
    ax.set_ylabel("work units / update")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_bench(args) -> int:
    import numpy as np
    try:
        cfg = _config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rows = []
    try:
        for source in args.streams:
            ops = _load_ops(source)
            r = bench_stream(ops, cfg)
            r["name"] = source
            rows.append(r)
    except (StreamError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    out = _open_out(args.out)
    out.write("# streams\n")
    out.write("stream\tn\tm\tupdates\tavg_work\tmax_depth\tdepth_per_log2n\troot_degree\tseconds\n")
    for r in rows:
        dl = r["max_depth"] / math.log2(r["n"]) if r["n"] > 1 else 0.0
        out.write(f"{r['name']}\t{r['n']}\t{r['m']}\t{r['updates']}\t{r['avg_work']:.3f}\t{r['max_depth']}\t"
                  f"{dl:.3f}\t{r['root_degree']}\t{r['seconds']:.2f}\n")
    out.write("# buckets\n")
    out.write("stream\tbucket_n\tavg_work\n")
    xs, ys = [], []
    for r in rows:
        for b, w in r["buckets"].items():
            out.write(f"{r['name']}\t{b}\t{w:.3f}\n")
            if b > 1:
                xs.append(math.log2(b))
                ys.append(w)
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(set(xs)) >= 2 else 0.0
    out.write("# fit\n")
    out.write(f"slope_work_per_log2n\t{slope:.4f}\n")
    code = EXIT_OK
    if len(rows) >= 2:
        small, big = min(rows, key=lambda r: r["n"]), max(rows, key=lambda r: r["n"])
        ratio = big["avg_work"] / max(small["avg_work"], 1e-9)
        out.write(f"work_ratio\t{ratio:.4f}\n")
        if args.ceiling is not None and ratio >= args.ceiling:
            print(f"work ratio {ratio:.3f} is not below the ceiling {args.ceiling}", file=sys.stderr)
            code = EXIT_BUDGET
    if out is not sys.stdout:
        out.close()
        base, _ = os.path.splitext(args.out)
        _plot(rows, base + ".png")
    elif args.figure:
        _plot(rows, args.figure)
    return code


def cmd_synth(args) -> int:
    try:
        store = synthesize_representatives(args.plugin, args.t_max, args.n_max)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    store.save(args.out)
    bad = store.self_check()
    print(f"classes {len(store)}")
    for t in range(args.t_max + 1):
        print(f"t={t} classes {sum(1 for (tt, _) in store.reps if tt == t)} max_vertices {store.max_vertices(t)}")
    if bad:
        print(f"self-check failed for {len(bad)} records", file=sys.stderr)
        return EXIT_INVARIANT
    print("self-check ok")
    return EXIT_OK


def _engine_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c", type=int, default=3, help="adhesion and semigood parameter (>= 3)")
    p.add_argument("--omega", type=int, default=2, help="internal treewidth bound for merges")
    p.add_argument("--s1", type=int, default=None, help="chip volume threshold (default 2^(omega+2))")
    p.add_argument("--s2", type=int, default=64, help="maximum chip size")
    p.add_argument("--merge-budget", type=int, default=16, help="merges per update")
    p.add_argument("--density", type=float, default=6.0, help="reject updates with |E| > density * |V|")
    p.add_argument("--plugin", action="append", choices=["vc", "ds"], help="problem plugin (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynprot", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="feed an update stream to the engine")
    p.add_argument("stream", help="update stream file, or - for stdin")
    _engine_args(p)
    p.add_argument("--paranoid", action="store_true", help="full verification after every update")
    p.add_argument("--metrics-out", default=None, help="metrics file (default stdout)")
    p.add_argument("--kernel-out", default=None, help="write the kernel delta stream here")
    p.add_argument("--kernel-plugin", default=None, help="plugin for --kernel-out")
    p.add_argument("--dump", default=None, help="write the final decomposition dump")
    p.add_argument("--dot", default=None, help="write the final decomposition in GraphViz format")
    p.add_argument("--chips-dump", default=None, help="write chip boundary groups and volumes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen", help="generate an update stream")
    p.add_argument("kind", help="one of: " + ", ".join(KINDS))
    p.add_argument("n", type=int, help="size (grid side for grid, vertices otherwise)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="measure work per update")
    p.add_argument("streams", nargs="+", help="stream files or gen:<kind>:<n>[:<seed>]")
    _engine_args(p)
    p.add_argument("-o", "--out", default=None, help="tab-separated report; a .png plot is written next to it")
    p.add_argument("--figure", default=None, help="plot path when the report goes to stdout")
    p.add_argument("--ceiling", type=float, default=None, help="fail when largest/smallest work ratio reaches this")
    p.set_defaults(func=cmd_bench, paranoid=False)

    p = sub.add_parser("synth", help="synthesize a representative store")
    p.add_argument("plugin", choices=["vc", "ds"])
    p.add_argument("--t-max", type=int, default=3)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
