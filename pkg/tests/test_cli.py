import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from pbfair.abstention import GRID_COLUMNS
from pbfair.cli import COMPARE_CSV_COLUMNS, SUMMARY_CSV_COLUMNS, TALLY_CSV_COLUMNS, main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def e1_path(tmp_path):
    from pathlib import Path

    src = Path(__file__).parent / "data" / "e1.pb"
    dst = tmp_path / "e1.pb"
    shutil.copy(src, dst)
    return dst


@pytest.fixture
def three(tmp_path, corpus_dir):
    d = tmp_path / "three"
    d.mkdir()
    for f in sorted(corpus_dir.glob("*.pb"))[:3]:
        shutil.copy(f, d / f.name)
    return d


def test_validate_ok(e1_path):
    assert run("validate", e1_path) == (0, "", "")


def test_validate_bad_meta(tmp_path, minimal_text):
    bad = tmp_path / "bad.pb"
    bad.write_text(minimal_text.replace("budget;100", "budget;lots"))
    code, out, _ = run("validate", bad)
    assert code == 1
    lines = out.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith(f"{bad}:3: MalformedRow")


def test_validate_lenient_warns(tmp_path, minimal_text):
    f = tmp_path / "loose.pb"
    f.write_text(minimal_text.replace("v1;p1", "v1;p9"))
    assert run("validate", f)[0] == 1
    code, out, _ = run("validate", "--lenient", f)
    assert code == 0 and "warning" in out


def test_validate_missing_path(tmp_path):
    code, _, err = run("validate", tmp_path / "nope.pb")
    assert code == 2 and "nope.pb" in err


def test_validate_directory(three):
    assert run("validate", three)[0] == 0


def test_tally_json(e1_path):
    code, out, _ = run("tally", e1_path, "--rule", "mes")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert [w["id"] for w in doc["winners"]] == ["C"]
    assert doc["winners"][0] == {"id": "C", "cost": 150, "key": "75", "phase": "main"}
    assert doc["spend"] == 150 and doc["budget"] == 300
    m = doc["manifest"]
    assert m["config"]["rule"] == "mes" and m["config"]["tiebreak"] == "cost_asc"
    assert len(m["inputs"][0]["sha256"]) == 64


def test_tally_csv(e1_path):
    code, out, _ = run("tally", e1_path, "--rule", "mes-add1u", "--out", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == TALLY_CSV_COLUMNS
    assert [r["project_id"] for r in rows] == ["C", "B"]


def test_tally_greedy_tiebreak_recorded(e1_path, tmp_path):
    target = tmp_path / "t.json"
    assert run("tally", e1_path, "--rule", "greedy", "--tiebreak", "cost_desc", "--output", target)[0] == 0
    doc = json.loads(target.read_text())
    assert doc["manifest"]["config"]["tiebreak"] == "cost_desc"
    assert [w["id"] for w in doc["winners"]] == ["A"]


def test_tally_unknown_rule(e1_path):
    assert run("tally", e1_path, "--rule", "borda")[0] == 2


def test_tally_deterministic_body(e1_path):
    a = json.loads(run("tally", e1_path)[1])
    b = json.loads(run("tally", e1_path)[1])
    a["manifest"].pop("timestamp")
    b["manifest"].pop("timestamp")
    assert a == b


def test_compare_directory(three, tmp_path):
    out_dir = tmp_path / "reports"
    code, _, _ = run("compare", three, "--output-dir", out_dir)
    assert code == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert len(names) == 4 and "summary.json" in names
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["summary"]["elections"] == 3


def test_compare_csv(three):
    code, out, _ = run("compare", three, "--out", "csv", "--rules", "greedy,mes-add1u,phragmen")
    assert code == 0
    per_rule, summary = out.split("\n\n")
    rows = list(csv.DictReader(io.StringIO(per_rule)))
    assert tuple(rows[0]) == COMPARE_CSV_COLUMNS and len(rows) == 9
    srow = list(csv.DictReader(io.StringIO(summary)))
    assert tuple(srow[0]) == SUMMARY_CSV_COLUMNS


def test_compare_env_corpus(three, monkeypatch):
    monkeypatch.setenv("PBFAIR_CORPUS", str(three))
    code, out, _ = run("compare")
    assert code == 0 and len(json.loads(out)["reports"]) == 3
    monkeypatch.delenv("PBFAIR_CORPUS")
    assert run("compare")[0] == 2


def test_compare_continues_past_bad_files(three, minimal_text):
    (three / "zz_broken.pb").write_text(minimal_text.replace("VOTES\n", ""))
    code, out, err = run("compare", three)
    doc = json.loads(out)
    assert code == 0
    assert len(doc["reports"]) == 3 and doc["errors"][0]["file"] == "zz_broken.pb"
    assert "zz_broken.pb" in err


def test_compare_needs_two_rules(three):
    assert run("compare", three, "--rules", "greedy")[0] == 2
    assert run("compare", three, "--rules", "greedy,nope")[0] == 2


def test_simulate_boundaries(e1_path, tmp_path):
    target = tmp_path / "grid.csv"
    code, out, _ = run(
        "simulate", e1_path, "--abstention", "0,0.3", "--representation", "0,1",
        "--bias", "0", "--seeds", "5", "--output", target,
    )
    assert code == 0 and out == ""
    rows = list(csv.DictReader(target.open()))
    assert tuple(rows[0]) == GRID_COLUMNS
    assert len(rows) == 2 * 2 * 2
    for r in rows:
        if float(r["abstention"]) == 0 or float(r["representation"]) == 1:
            assert float(r["mean_jaccard"]) == 1.0
        assert r["seed_count"] == "5"
    side = json.loads((tmp_path / "grid.csv.manifest.json").read_text())
    assert side["manifest"]["seeds"] == [0, 1, 2, 3, 4]
    assert side["columns"] == list(GRID_COLUMNS)


def test_simulate_to_stdout_is_deterministic(e1_path):
    args = ("simulate", e1_path, "--abstention", "0.3", "--representation", "0.5", "--seeds", "4")
    a, b = run(*args), run(*args)
    assert a[0] == 0 and a[1] == b[1]
    assert json.loads(a[2])["manifest"]["config"]["bias"] == 0.3


@pytest.mark.parametrize(
    "extra",
    [
        ("--abstention", "1.5"),
        ("--representation", "x"),
        ("--seeds", "0"),
        ("--predictor", "replay"),
        ("--bias", "2"),
        ("--rules", "greedy,foo"),
        ("--abstention", "1", "--predictor", "popularity_prior"),
    ],
)
def test_simulate_usage_errors(e1_path, extra):
    assert run("simulate", e1_path, *extra)[0] == 2


def test_simulate_replay(e1_path, tmp_path):
    replay = tmp_path / "r.csv"
    replay.write_text('voter_id,vote,points\nv1,"A,C",\nv2,"A,C",\nv3,"A,B",\n')
    code, out, _ = run(
        "simulate", e1_path, "--predictor", "replay", "--replay", replay, "--bias", "0",
        "--abstention", "0.6", "--representation", "1", "--seeds", "3",
    )
    assert code == 0
    assert all(float(r["mean_jaccard"]) == 1.0 for r in csv.DictReader(io.StringIO(out)))


def test_module_entry_point(e1_path):
    proc = subprocess.run(
        [sys.executable, "-m", "pbfair", "tally", str(e1_path), "--rule", "greedy", "--out", "csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("greedy,1,A,300,3,main")
