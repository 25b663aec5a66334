import json

import networkx as nx
import pytest

from dynprot.cli import StreamError, bench_stream, main, parse_stream
from dynprot.engine import EngineConfig
from dynprot.generators import generate
from dynprot.verify import opt

C4 = "av 0\nav 1\nav 2\nav 3\nae 0 1\nae 1 2\nae 2 3\nae 3 0\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def metrics_lines(path):
    return [json.loads(x) for x in open(path).read().splitlines()]


def test_empty_stream_writes_header_only(tmp_path):
    s = write(tmp_path, "empty.txt", "# nothing\n\n")
    out = str(tmp_path / "m.jsonl")
    assert main(["run", s, "--metrics-out", out]) == 0
    lines = metrics_lines(out)
    assert len(lines) == 1 and lines[0]["schema"].startswith("dynprot-metrics")


def test_c4_kernel_stream_is_opt_consistent(tmp_path):
    s = write(tmp_path, "c4.txt", C4)
    out = str(tmp_path / "m.jsonl")
    kout = str(tmp_path / "k.txt")
    assert main(["run", s, "--plugin", "vc", "--metrics-out", out, "--kernel-out", kout, "--paranoid"]) == 0
    K = nx.Graph()
    delta = None
    for line in open(kout).read().splitlines():
        parts = line.split()
        if parts[0] == "kv+":
            K.add_node(int(parts[1]))
        elif parts[0] == "kv-":
            K.remove_node(int(parts[1]))
        elif parts[0] == "ke+":
            K.add_edge(int(parts[1]), int(parts[2]))
        elif parts[0] == "ke-":
            K.remove_edge(int(parts[1]), int(parts[2]))
        else:
            assert parts[0] == "kd"
            delta = int(parts[1])
    last = open(kout).read().splitlines()[-1]
    assert last.startswith("kd ")
    assert opt("vc", K) + delta == opt("vc", nx.cycle_graph(4)) == 2
    recs = metrics_lines(out)
    assert [r["i"] for r in recs[1:]] == list(range(1, 9))


def test_density_tripwire_names_update_index(tmp_path, capsys):
    s = write(tmp_path, "dense.txt", "av 0\nav 1\nav 2\nae 0 1\nae 1 2\nae 0 2\n")
    code = main(["run", s, "--density", "0.5", "--metrics-out", str(tmp_path / "m")])
    assert code == 1
    err = capsys.readouterr().err
    assert "update 5" in err and "density" in err


def test_parse_error_names_line():
    with pytest.raises(StreamError, match="line 2"):
        list(parse_stream(["av 0", "zz 1"]))
    with pytest.raises(StreamError, match="line 1"):
        list(parse_stream(["ae 0"]))


def test_run_error_exit_codes(tmp_path):
    s = write(tmp_path, "bad.txt", "av 0\nav 0\n")
    assert main(["run", s, "--metrics-out", str(tmp_path / "m")]) == 1
    s = write(tmp_path, "syn.txt", "av x\n")
    assert main(["run", s, "--metrics-out", str(tmp_path / "m")]) == 1


def test_metrics_are_reproducible(tmp_path):
    s = str(tmp_path / "s.txt")
    assert main(["gen", "mixed-insert-delete", "15", "--seed", "3", "-o", s]) == 0
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["run", s, "--metrics-out", a]) == 0
    assert main(["run", s, "--metrics-out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_gen_grid_counts(tmp_path):
    s = str(tmp_path / "g.txt")
    assert main(["gen", "grid", "3", "-o", s]) == 0
    lines = open(s).read().splitlines()
    assert sum(1 for x in lines if x.startswith("av ")) == 9
    assert sum(1 for x in lines if x.startswith("ae ")) == 12


@pytest.mark.parametrize("kind", ["grid", "random-planar-incremental", "bounded-degree-tree-plus",
                                  "mixed-insert-delete"])
def test_gen_is_deterministic(tmp_path, kind):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["gen", kind, "20", "--seed", "5", "-o", a]) == 0
    assert main(["gen", kind, "20", "--seed", "5", "-o", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_gen_unknown_kind(tmp_path):
    assert main(["gen", "torus", "5", "-o", str(tmp_path / "x")]) == 1


@pytest.mark.parametrize("kind", ["random-planar-incremental", "mixed-insert-delete", "grid"])
def test_generated_streams_stay_planar(kind):
    for seed in range(3):
        G = nx.Graph()
        for op in generate(kind, 40 if kind != "grid" else 6, seed):
            if op[0] == "av":
                G.add_node(op[1])
            elif op[0] == "dv":
                G.remove_node(op[1])
            elif op[0] == "ae":
                G.add_edge(op[1], op[2])
                assert nx.check_planarity(G)[0]
            else:
                G.remove_edge(op[1], op[2])


def test_bench_two_streams_have_buckets(tmp_path):
    out = str(tmp_path / "bench.tsv")
    code = main(["bench", "gen:random-planar-incremental:32", "gen:random-planar-incremental:128", "-o", out])
    assert code == 0
    text = open(out).read()
    sections = text.split("# buckets\n")[1].split("# fit\n")[0].splitlines()[1:]
    names = {row.split("\t")[0] for row in sections}
    assert names == {"gen:random-planar-incremental:32", "gen:random-planar-incremental:128"}
    assert "slope_work_per_log2n" in text and "work_ratio" in text
    assert (tmp_path / "bench.png").stat().st_size > 0


def test_bench_constant_size_stream_has_single_bucket():
    ops = [("av", 0)] + [("dv", 0), ("av", 0)] * 10
    r = bench_stream(ops, EngineConfig())
    assert len(r["buckets"]) == 1 and r["updates"] == 21


def test_bench_ceiling_exit_code(tmp_path):
    out = str(tmp_path / "bench.tsv")
    code = main(["bench", "gen:grid:3", "gen:grid:6", "-o", out, "--ceiling", "0.01"])
    assert code == 3


def test_synth_vc_small_store(tmp_path, capsys):
    a, b = str(tmp_path / "a.store"), str(tmp_path / "b.store")
    assert main(["synth", "vc", "--t-max", "1", "--n-max", "3", "-o", a]) == 0
    assert "self-check ok" in capsys.readouterr().out
    assert main(["synth", "vc", "--t-max", "1", "--n-max", "3", "-o", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_synth_ds_reports_classes(tmp_path, capsys):
    out = str(tmp_path / "ds.store")
    assert main(["synth", "ds", "--t-max", "2", "--n-max", "5", "-o", out]) == 0
    text = capsys.readouterr().out
    first = text.splitlines()[0]
    assert first.startswith("classes ") and int(first.split()[1]) > 0
    assert "self-check ok" in text
