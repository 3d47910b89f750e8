import csv
import json
import logging

import pytest

from paradep.charspace import NULL, default_distance_table
from paradep.cli import main
from paradep.engine import MergeTree

LAPTOP_CSV = "type,Screen\nSL410,14in\nT520i,15in\nT560,15in\n"


@pytest.fixture
def laptop_csv(tmp_path):
    p = tmp_path / "laptops.csv"
    p.write_text(LAPTOP_CSV)
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_align_laptop_types(laptop_csv, capsys):
    code, out, err = run(["align", "--input", laptop_csv, "--engine", "baseline"], capsys)
    assert code == 0
    headers = [l for l in out.splitlines() if l.startswith("@node")]
    internal = [h for h in headers if "children=-" not in h]
    assert len(internal) == 2
    assert out.splitlines()[-1].startswith("@root")
    root = out.splitlines()[-1].split()[1]
    root_header = [h for h in headers if h.startswith(f"@node {root} ")][0]
    assert root_header.endswith("pattern={ST}[L]{45}{126}0[i]")
    assert "dp_merges=4" in err


def test_align_metrics_and_trace(laptop_csv, tmp_path, capsys):
    m, t = tmp_path / "m.txt", tmp_path / "trace.txt"
    code, _, err = run(["align", "--input", laptop_csv, "--metrics-out", m, "--trace", t], capsys)
    assert code == 0 and "dp_merges" not in err
    kv = dict(line.split("=", 1) for line in m.read_text().splitlines())
    assert kv["engine"] == "pruning+" and kv["commits"] == "2"
    lines = t.read_text().splitlines()
    assert lines[0].split() == ["new", "left", "right", "size", "refine_iterations"]
    assert len(lines) == 3


def test_one_row_rejected(tmp_path, capsys):
    p = tmp_path / "one.csv"
    p.write_text("type\nA1\n")
    code, _, err = run(["align", "--input", p], capsys)
    assert code == 2 and "need ≥2 strings" in err


def test_malformed_row_reported(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("type,x\nA1,1\nB2\n")
    code, _, err = run(["align", "--input", p], capsys)
    assert code == 2 and "bad.csv:3" in err and "expected 2 fields" in err


def test_out_of_charset_rejected(tmp_path, capsys):
    p = tmp_path / "cs.csv"
    p.write_text("type,x\nA1,1\nBé,2\n", encoding="utf-8")
    code, _, err = run(["align", "--input", p], capsys)
    assert code == 2 and "'é'" in err and "position 2" in err


def test_unknown_id_column(laptop_csv, capsys):
    code, _, err = run(["align", "--input", laptop_csv, "--id-column", "nope"], capsys)
    assert code == 2 and "nope" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["align", "--input", tmp_path / "none.csv"], capsys)
    assert code == 2 and "cannot read" in err


def test_duplicates_warned_and_counted(tmp_path, capsys, caplog):
    p = tmp_path / "dup.csv"
    p.write_text(LAPTOP_CSV + "T560,15in\n")
    with caplog.at_level(logging.WARNING):
        code, out, _ = run(["discover", "--input", p, "--support-min", "2", "--confidence-min", "0.9",
                            "--diversity-min", "2", "--inner-support-min", "1"], capsys)
    assert code == 0
    assert any("duplicate" in r.message for r in caplog.records)
    line = [l for l in out.splitlines() if "<{45}>" in l][0]
    assert "support=4" in line


def test_discover_laptop_types(laptop_csv, tmp_path, capsys):
    rules = tmp_path / "rules.jsonl"
    code, out, _ = run(["discover", "--input", laptop_csv, "--engine", "baseline", "--support-min", "2",
                        "--confidence-min", "0.9", "--diversity-min", "2", "--inner-support-min", "1",
                        "--rules-out", rules], capsys)
    assert code == 0
    assert "{ST}[L]<{45}>{126}0[i] → Screen  support=3 confidence=1.0000 diversity=2 inner_support=2" in out
    recs = [json.loads(l) for l in rules.read_text().splitlines()]
    assert {"attribute": "Screen", "column": 3}.items() <= [r for r in recs if r["column"] == 3][0].items()
    sups = [r["support"] for r in recs]
    assert sups == sorted(sups, reverse=True)


def test_discover_impossible_thresholds(laptop_csv, capsys):
    code, out, _ = run(["discover", "--input", laptop_csv, "--support-min", "100"], capsys)
    assert code == 0 and out == ""


def test_discover_rejects_single(laptop_csv, capsys):
    code, _, err = run(["discover", "--input", laptop_csv, "--engine", "single"], capsys)
    assert code == 2 and "single" in err


def test_discover_from_tree(laptop_csv, tmp_path, capsys):
    tree = tmp_path / "tree.txt"
    assert run(["align", "--input", laptop_csv, "-o", tree], capsys)[0] == 0
    code, out, _ = run(["discover", "--input", laptop_csv, "--tree", tree, "--support-min", "2",
                        "--diversity-min", "2", "--inner-support-min", "1"], capsys)
    assert code == 0 and "<{45}>" in out


def test_validate_prune2_reports(laptop_csv, capsys):
    code, _, err = run(["discover", "--input", laptop_csv, "--support-min", "0", "--validate-prune2"], capsys)
    assert code == 0 and "prune2_findings=" in err


def test_config_precedence(laptop_csv, tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nengine = baseline\n[thresholds]\nsupport_min = 2\ndiversity_min = 2\n"
                   "inner_support_min = 1\n")
    m = tmp_path / "m.txt"
    code, out, _ = run(["--config", cfg, "discover", "--input", laptop_csv, "--metrics-out", m], capsys)
    assert code == 0 and "<{45}>" in out
    assert "engine=baseline" in m.read_text()
    code, out, _ = run(["--config", cfg, "discover", "--input", laptop_csv, "--support-min", "50"], capsys)
    assert code == 0 and out == ""


def test_config_bad_value(laptop_csv, tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[thresholds]\nsupport_min = lots\n")
    code, _, err = run(["--config", cfg, "discover", "--input", laptop_csv], capsys)
    assert code == 2 and "support_min" in err


def test_distance_config_flag(laptop_csv, tmp_path, capsys):
    cfg = tmp_path / "d.ini"
    cfg.write_text("[distance]\nsame_type = 0.25\n")
    code, out, _ = run(["align", "--input", laptop_csv, "--engine", "baseline",
                        "--distance-config", cfg, "--no-rows"], capsys)
    assert code == 0
    assert not [l for l in out.splitlines() if not l.startswith("@")]


def test_gen_align_round_trip(tmp_path, capsys):
    data = tmp_path / "gen.csv"
    assert run(["gen", "--count", "40", "--length", "8", "--clusters", "4", "--seed", "3",
                "--plant-column", "2", "-o", data], capsys)[0] == 0
    rows = list(csv.DictReader(data.open()))
    assert len(rows) == 40 and set(rows[0]) == {"id", "A"}
    tree_path = tmp_path / "tree.txt"
    assert run(["align", "--input", data, "-o", tree_path], capsys)[0] == 0
    tree = MergeTree.loads(tree_path.read_text(), default_distance_table())
    root = tree.paradigm(tree.root)
    rebuilt = sorted("".join(g for g in r if g is not NULL) for _, r in root.rows)
    assert rebuilt == sorted(set(r["id"] for r in rows))


def test_gen_deterministic(capsys):
    a = run(["gen", "--count", "30", "--clusters", "3", "--seed", "5"], capsys)[1]
    b = run(["gen", "--count", "30", "--clusters", "3", "--seed", "5"], capsys)[1]
    assert a == b and a.startswith("id\n")


def test_gen_bad_config(capsys):
    code, _, err = run(["gen", "--count", "3", "--clusters", "5"], capsys)
    assert code == 2 and "clusters" in err


def test_bench_closed_form_and_figures(tmp_path, capsys):
    out_dir = tmp_path / "bench"
    code, out, _ = run(["bench", "--count", "100", "200", "400", "--clusters", "10", "--sigma", "0.01",
                        "--engines", "baseline", "--out-dir", out_dir], capsys)
    assert code == 0
    rows = list(csv.DictReader((out_dir / "bench.csv").open()))
    assert [int(r["dp_merges"]) for r in rows] == [9801, 39601, 159201]
    assert (out_dir / "dp_merges.png").stat().st_size > 0
    assert (out_dir / "wall_time.png").exists()
    assert len(out.splitlines()) == 4


def test_bench_single_row_with_histogram(tmp_path, capsys):
    out_dir = tmp_path / "b"
    code, out, _ = run(["bench", "--count", "60", "--clusters", "3", "--engines", "pruning+",
                        "--out-dir", out_dir], capsys)
    assert code == 0
    recs = [json.loads(l) for l in (out_dir / "bench.jsonl").read_text().splitlines()]
    assert len(recs) == 1 and recs[0]["engine"] == "pruning+"
    assert sum(recs[0]["histogram"].values()) == 59
    assert (out_dir / "refine_histogram.png").exists()
