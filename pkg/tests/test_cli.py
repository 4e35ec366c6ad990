import json

import pytest

from tree2ring.cli import main, variant_comparison
from tree2ring.topology import TEN_NODE_TEXT, parse_tree

VOLATILE = {"timestamp", "elapsed_seconds"}


def _strip(doc):
    if isinstance(doc, dict):
        return {k: _strip(v) for k, v in doc.items() if k not in VOLATILE}
    if isinstance(doc, list):
        return [_strip(v) for v in doc]
    return doc


@pytest.fixture
def ten_node_file(tmp_path):
    p = tmp_path / "ten_node.txt"
    p.write_text(TEN_NODE_TEXT)
    return p


@pytest.fixture
def small_file(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps({"root": "P0", "children": {"P0": ["P1", "P2"], "P1": ["P3"]}}))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate_to_stdout(capsys):
    code, out, err = run(capsys, "enumerate", 4)
    assert code == 0
    trees = [parse_tree(line) for line in out.splitlines()]
    assert len(trees) == 5
    summary = json.loads(err)
    assert (summary["count"], summary["expected"]) == (5, 5)


def test_enumerate_to_file(capsys, tmp_path):
    dest = tmp_path / "trees.txt"
    code, out, _ = run(capsys, "enumerate", 5, "-o", dest)
    assert code == 0 and json.loads(out)["count"] == 14
    assert len(dest.read_text().splitlines()) == 14


def test_enumerate_rejects_zero(capsys):
    code, _, err = run(capsys, "enumerate", 0)
    assert code == 1 and "error" in err


def test_run_ten_node(capsys, ten_node_file, tmp_path):
    trace = tmp_path / "t.jsonl"
    dot = tmp_path / "ring.dot"
    code, out, _ = run(capsys, "run", ten_node_file, "--policy", "random", "--seed", 7,
                       "--trace", trace, "--ring-dot", dot)
    assert code == 0
    doc = json.loads(out)
    assert doc["ring_report"]["all_ok"]
    assert doc["message_stats"]["total"] == 23
    assert doc["policy"] == "random:7"
    assert len(trace.read_text().splitlines()) == doc["steps"]
    assert dot.read_text().startswith("digraph")
    assert len(doc["manifest"]["inputs"][str(ten_node_file)]) == 64


def test_run_original_from_random_state(capsys, ten_node_file):
    code, out, _ = run(capsys, "run", ten_node_file, "--variant", "original", "--init-random-seed", 5,
                       "--policy", "fifo")
    assert code == 0
    assert json.loads(out)["seed_state"] is not None


def test_run_rejects_seed_for_simplified(capsys, ten_node_file):
    code, _, err = run(capsys, "run", ten_node_file, "--init-random-seed", 5)
    assert code == 1 and "original" in err


def test_run_is_deterministic(capsys, ten_node_file):
    a = json.loads(run(capsys, "run", ten_node_file, "--policy", "random:3")[1])
    b = json.loads(run(capsys, "run", ten_node_file, "--policy", "random:3")[1])
    assert _strip(a) == _strip(b)


def test_explore_adjacency_json(capsys, small_file, tmp_path):
    report = tmp_path / "r.json"
    dot = tmp_path / "g.dot"
    code, out, _ = run(capsys, "explore", small_file, "--check", "all", "--report", report, "--dot", dot)
    assert code == 0 and out == ""
    doc = json.loads(report.read_text())
    assert doc["report"]["terminal_count"] == 1
    assert doc["report"]["violation_count"] == 0
    assert "digraph" in dot.read_text()


def test_explore_deterministic_modulo_timing(capsys, small_file):
    a = json.loads(run(capsys, "explore", small_file, "--variant", "pred")[1])
    b = json.loads(run(capsys, "explore", small_file, "--variant", "pred")[1])
    assert _strip(a) == _strip(b)


def test_explore_por(capsys, small_file):
    code, out, _ = run(capsys, "explore", small_file, "--por")
    doc = json.loads(out)["report"]
    assert code == 0 and doc["reduced"] and doc["terminal_count"] == 1


def test_explore_bound_exit_code(capsys, ten_node_file):
    code, out, _ = run(capsys, "explore", ten_node_file, "--bound", 100)
    assert code == 3
    assert json.loads(out)["report"]["complete"] is False


def test_explore_sweep(capsys):
    code, out, _ = run(capsys, "explore", "--all-nodes", 4, "--check", "all")
    doc = json.loads(out)
    assert code == 0
    assert len(doc["reports"]) == 5
    assert doc["summary"]["passing"] == 5
    assert "not comparable" in doc["summary"]["note"]


def test_explore_inapplicable_check(capsys, small_file):
    code, _, err = run(capsys, "explore", small_file, "--variant", "pred", "--check", "A")
    assert code == 1 and "do not apply" in err


def test_explore_needs_exactly_one_input(capsys, small_file):
    assert run(capsys, "explore")[0] == 1
    assert run(capsys, "explore", small_file, "--all-nodes", 3)[0] == 1


def test_bad_tree_file_reports_diagnostics(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("(fake,P0,1),(fake,fake,2),(P0,P1,1),(P0,fake,2)")
    code, _, err = run(capsys, "run", bad)
    assert code == 1 and "missing fake terminator for P1" in err
    code, _, err = run(capsys, "run", tmp_path / "absent.txt")
    assert code == 1 and "cannot read" in err


def test_stats_json_and_table(capsys, ten_node_file):
    code, out, _ = run(capsys, "stats", ten_node_file)
    doc = json.loads(out)
    assert code == 0
    assert (doc["m1"], doc["m2"], doc["m3"], doc["recommendation"]) == (23, 18, 18, "tie")
    code, out, _ = run(capsys, "stats", ten_node_file, "--table")
    assert code == 0 and "recommendation=tie" in out and out.splitlines()[0].startswith("variant")


def test_variant_comparison_recommends_fewer_messages():
    path4 = parse_tree("(fake,P0,1),(fake,fake,2),(P0,P1,1),(P0,fake,2),(P1,P2,1),(P1,fake,2),"
                       "(P2,P3,1),(P2,fake,2),(P3,fake,1)")
    cmp = variant_comparison(path4)
    # one leaf, three inner nodes: dropping FC saves more than dropping BC
    assert cmp["recommendation"] == "succ"
    assert cmp["measured_deltas"] == cmp["expected_send_deltas"] == {"m1-m2": 3, "m1-m3": 1}
    assert cmp["interpretations"]["per_send_and_receive"]["matches"]
    assert not cmp["interpretations"]["per_send"]["matches"]
