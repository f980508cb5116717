import csv
import io
import json
import subprocess
import sys

import pytest

from doseorder.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_tallies_and_paths(capsys):
    code, out, _ = run(capsys, "tallies", "2")
    assert code == 0 and len(rows(out)) == 42
    code, out, _ = run(capsys, "tallies", "2", "--r", "1", "--rectified")
    table = {r["tally"]: r for r in rows(out)}
    assert table["1/6 1/6"]["F"] == "2" and table["1/6 1/6"]["F_rectified"] == "1"
    code, out, _ = run(capsys, "paths", "2")
    assert len(rows(out)) == 46
    code, out, _ = run(capsys, "paths", "2", "--format", "json")
    assert len(json.loads(out)) == 46


def test_recommend(capsys):
    assert run(capsys, "recommend", "kan", "--r", "2", "--tally", "0/0 0/0 0/0")[1] == "1\n"
    assert run(capsys, "recommend", "galois", "--tally", "0/6 0/0 0/0")[1] == "1\n"
    assert run(capsys, "recommend", "kan", "--tally", "0/6 0/0 0/0")[1] == "3\n"
    # one pending first dose at level 1 is counted as 1/1 there
    assert run(capsys, "recommend", "kan", "--tally", "0/0 0/0 0/0",
               "--pending", "1 0 0")[1] == "1\n"


@pytest.mark.parametrize("argv", [
    ["recommend", "kan", "--tally", "3/2 0/0"],
    ["recommend", "kan", "--tally", "0/0 0/0", "--pending", "1"],
    ["recommend", "crm", "--tally", "0/0"],
    ["exact33", "3", "--probs", "0.1 0.2"],
    ["exact33", "3", "--sd", "0"],
    ["tallies", "0"],
    ["nosuch"],
])
def test_bad_input_exits_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == ""
    assert err


def test_exact33(capsys):
    code, out, _ = run(capsys, "exact33", "3", "--mean", "3.0")
    got = [float(x) for x in rows(out)[0].values()]
    assert got == pytest.approx([0.02710926, 0.3361197, 0.5619761, 0.07479493], abs=1e-5)
    code, out, _ = run(capsys, "exact33", "2", "--probs", "0,0", "--format", "json")
    assert json.loads(out)["rec_probs"] == {"rec0": 0.0, "rec1": 0.0, "rec2": 1.0}


def test_fibers_galois_json(capsys):
    fib = json.loads(run(capsys, "fibers", "3")[1])
    assert fib["fiber_maxima"]["0"] == ["2/6 0/0 0/0"]
    gal = json.loads(run(capsys, "galois", "3", "--r", "2")[1])
    assert gal["thresholds"] == ["2/6 0/0 0/0", "0/6 0/0 0/0", "0/3 0/6 0/0"]


def test_hasse(capsys):
    out = run(capsys, "hasse", "2", "--r", "1")[1]
    assert out.startswith("digraph {")
    assert sum(1 for line in out.splitlines() if "label=" in line) == 42
    assert "peripheries=2" in out
    assert out == run(capsys, "hasse", "2", "--r", "1")[1]


def test_audit(capsys):
    found = rows(run(capsys, "audit", "2", "--r", "1")[1])
    assert {"lower": "1/6 1/6", "upper": "0/6 2/6", "F_lower": "2", "F_upper": "1"} in found


def test_simulate_config_and_override(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("# small run\nreps = 20\nseed = 7\nrule = galois\nn = 12\n")
    code, first, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    rec = rows(first)[0]
    assert rec["reps"] == "20" and rec["seed"] == "7"
    assert run(capsys, "simulate", "--config", str(cfg))[1] == first
    changed = run(capsys, "simulate", "--config", str(cfg), "--seed", "8")[1]
    assert rows(changed)[0]["seed"] == "8"

    events = tmp_path / "ev.jsonl"
    out_csv = tmp_path / "summary.csv"
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--events", str(events),
                       "--output", str(out_csv))
    assert code == 0 and out == ""
    assert out_csv.read_text() == first
    recs = [json.loads(line) for line in events.read_text().splitlines()]
    assert {r["rep"] for r in recs} == set(range(20))
    assert {"time", "kind", "participant", "dose", "outcome"} <= recs[0].keys()


def test_simulate_json_and_no_titration(capsys):
    out = run(capsys, "simulate", "--reps", "10", "--titr-wait", "inf", "--format", "json")[1]
    data = json.loads(out)
    assert data["mean_titrations"] == 0
    assert sum(data["rec_freq"]) == pytest.approx(1.0)


@pytest.mark.parametrize("text", ["bogus = 1\n", "reps 10\n", "reps = ten\n",
                                  "pessimize_titrations = maybe\n"])
def test_bad_config(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 1 and "error" in err


def test_missing_config(capsys, tmp_path):
    assert run(capsys, "simulate", "--config", str(tmp_path / "none"))[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "doseorder", "recommend", "kan",
                           "--tally", "2/6 0/0 0/0"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "0\n"
