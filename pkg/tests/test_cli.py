import json
import math
from pathlib import Path

import pytest

from nkinterdict.cli import main, report_from_dict, report_to_dict

from conftest import data_text

DATA = Path(__file__).resolve().parent.parent / "src" / "nkinterdict" / "data"
CASE14 = str(DATA / "case14.m")
PROB14 = str(DATA / "prob_case14.csv")

REPORT_KEYS = {
    "case", "k", "formulation", "epsilon", "status", "best_scenario", "z_pu",
    "log_prob", "weighted_pu", "weighted_mw", "upper_bound", "gap", "iterations",
    "wall_seconds", "trace", "flags", "seed",
}


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_report_schema(capsys, tmp_path):
    out_path = tmp_path / "rep.json"
    code = main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "2",
                 "--form", "nf", "--out", str(out_path)])
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert set(doc) == REPORT_KEYS
    assert doc["status"] == "converged"
    assert doc["best_scenario"] == [11, 15]
    assert doc["weighted_mw"] == pytest.approx(3.0868, abs=1e-3)
    assert doc["flags"]["dc_angle_limits"] is True
    for entry in doc["trace"]:
        assert set(entry) == {"iter", "scenario", "z_pu", "f_lb", "f_ub"}
    # round-trip
    assert report_from_dict(doc) == doc


def test_solve_exit_codes(capsys, tmp_path):
    # no positive shed at k=1 -> exit 3
    code = main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "1",
                 "--form", "nf", "--out", str(tmp_path / "a.json")])
    assert code == 3
    # bad k -> usage error, exit 1
    code, _, err = run(["solve", "--case", CASE14, "--prob", PROB14, "--k", "99",
                        "--form", "nf"], capsys)
    assert code == 1 and "error" in err
    # missing file -> exit 1
    code, _, err = run(["solve", "--case", "nope.m", "--k", "1", "--form", "nf"], capsys)
    assert code == 1


def test_time_limit_exit(tmp_path):
    code = main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "3",
                 "--form", "dc", "--time-limit", "0.0", "--out", str(tmp_path / "t.json")])
    assert code == 2
    doc = json.loads((tmp_path / "t.json").read_text())
    assert doc["status"] == "time-limit"


def test_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--case", CASE14, "--prob", PROB14, "--k-min", "2",
                 "--k-max", "3", "--form", "nf", "--out", str(out)])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("k,weighted_mw")
    assert len(rows) == 3
    assert rows[1].split(",")[0] == "2"


def test_sweep_single_k_matches_solve(tmp_path):
    main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "2", "--form", "nf",
          "--out", str(tmp_path / "solve.json")])
    main(["sweep", "--case", CASE14, "--prob", PROB14, "--k-min", "2", "--k-max", "2",
          "--form", "nf", "--out", str(tmp_path / "sweep.csv")])
    doc = json.loads((tmp_path / "solve.json").read_text())
    row = (tmp_path / "sweep.csv").read_text().splitlines()[1].split(",")
    assert float(row[1]) == pytest.approx(doc["weighted_mw"])


def test_enumerate_cli(tmp_path):
    out = tmp_path / "enum.csv"
    code = main(["enumerate", "--case", CASE14, "--prob", PROB14, "--k", "1",
                 "--form", "nf", "--workers", "2", "--out", str(out)])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "scenario_lines;z_pu;log_prob;weighted_mw"
    assert len(rows) == 21


def test_compare(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "2", "--form", "nf",
          "--out", str(a)])
    main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "2", "--form", "dc",
          "--out", str(b)])
    code, out, _ = run(["compare", str(a), str(b)], capsys)
    assert code == 0
    dist = int(out.splitlines()[0].split(":")[1])
    assert dist % 2 == 0  # symmetric difference of equal-size sets is even
    # mismatched k
    main(["solve", "--case", CASE14, "--prob", PROB14, "--k", "3", "--form", "nf",
          "--out", str(b)])
    code, _, err = run(["compare", str(a), str(b)], capsys)
    assert code == 1


def test_genprob_modes(capsys, tmp_path):
    code, out, _ = run(["genprob", "--case", CASE14, "--mode", "det",
                        "--budget", "6.0"], capsys)
    assert code == 0
    rows = out.splitlines()
    assert len(rows) == 21
    assert all(row.endswith("0.3") for row in rows[1:])

    # budget taken from an existing CSV
    code, out, _ = run(["genprob", "--case", CASE14, "--mode", "texp", "--seed", "3",
                        "--budget-from", PROB14], capsys)
    assert code == 0
    total = sum(float(r.split(",")[3]) for r in out.splitlines()[1:])
    ref = sum(float(r.split(",")[3]) for r in Path(PROB14).read_text().splitlines()[1:])
    assert total == pytest.approx(ref, rel=1e-9)

    # severe event over a region file
    region = tmp_path / "region.txt"
    region.write_text("1\n2\n")
    code, out, _ = run(["genprob", "--case", CASE14, "--mode", "severe-event",
                        "--base", PROB14, "--region", str(region), "--severity", "1"],
                       capsys)
    assert code == 0
    base = {(r.split(",")[0], r.split(",")[1]): float(r.split(",")[3])
            for r in Path(PROB14).read_text().splitlines()[1:]}
    got = {(r.split(",")[0], r.split(",")[1]): float(r.split(",")[3])
           for r in out.splitlines()[1:]}
    assert got[("1", "2")] == pytest.approx(base[("1", "2")] + (1 - base[("1", "2")]) / 5)
    assert got[("2", "3")] == base[("2", "3")]


def test_json_case_input(tmp_path, case14):
    case_json = tmp_path / "case.json"
    case_json.write_text(case14.to_json())
    code = main(["solve", "--case", str(case_json), "--k", "2", "--form", "nf",
                 "--out", str(tmp_path / "rep.json")])
    assert code == 0
    doc = json.loads((tmp_path / "rep.json").read_text())
    assert doc["best_scenario"] == [11, 15]
