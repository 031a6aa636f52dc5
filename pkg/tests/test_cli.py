"""CLI surface: formats, determinism, exit codes."""

import csv
import io
import json

from click.testing import CliRunner

from gsarelay.cli import main


def _run(*args, **kwargs):
    return CliRunner().invoke(main, list(args), **kwargs)


def test_region_text_lists_all_facets():
    result = _run("region", "--config", "6,5,4,4,9")
    assert result.exit_code == 0
    for label in ("9a", "9e", "9i", "9l"):
        assert f"({label})" in result.output
    assert "d1+d2+d3 <= 11" in result.output


def test_region_csv():
    result = _run("region", "--config", "6,5,4,4,9", "--output", "csv")
    rows = list(csv.DictReader(io.StringIO(result.output)))
    assert len(rows) == 12
    assert rows[0]["label"] == "9a" and rows[0]["rhs"] == "5"


def test_sumdof_golden():
    result = _run("sumdof", "--config", "6,5,4,4,9", "--output", "json")
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["sum_dof"] == {"num": 40, "den": 3, "decimal": 40 / 3}
    assert report["sum_dof_exact"] == "40/3"
    assert report["regime"] == 2
    assert report["oracle_match"] is True


def test_sumdof_reports_canonicalization():
    result = _run("sumdof", "--config", "4,4,5,6,9", "--output", "json")
    report = json.loads(result.output)
    assert report["config"]["canonical"] == [6, 5, 4, 4, 9]
    assert report["config"]["permutation"]["pair_swap"] is True
    assert report["sum_dof_exact"] == "40/3"


def test_check_inside_and_outside():
    ok = _run("check", "--config", "6,5,4,4,9", "--tuple", "5,3,3,1", "--output", "json")
    assert ok.exit_code == 0
    assert json.loads(ok.output)["in_region"] is True

    bad = _run("check", "--config", "6,5,4,4,9", "--tuple", "5,3,3,2", "--output", "json")
    assert bad.exit_code == 0  # a verdict, not an error
    report = json.loads(bad.output)
    assert report["in_region"] is False
    assert "9k" in report["violated_labels"]


def test_check_accepts_rationals():
    result = _run("check", "--config", "6,5,4,4,9", "--tuple", "13/3,13/3,7/3,7/3", "--output", "json")
    assert json.loads(result.output)["in_region"] is True


def test_synth_reports_design():
    result = _run("synth", "--config", "6,5,4,4,9", "--tuple", "5,3,3,1", "--seed", "11", "--output", "json")
    assert result.exit_code == 0
    design = json.loads(result.output)["design"]
    assert design["j"] == 8
    assert design["shapes"]["p"] == [8, 9]
    assert max(design["alignment_residual_mac"]) < 1e-8


def test_verify_golden():
    result = _run(
        "verify", "--config", "6,5,4,4,9", "--tuple", "5,3,3,1",
        "--seed", "11", "--output", "json",
    )
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["recovery"]["passed"] is True
    assert report["recovery"]["max_abs_error"] < 1e-8
    assert abs(report["dof_slope"] - 12.0) < 0.6
    assert report["passed"] is True


def test_output_is_deterministic():
    args = ("verify", "--config", "6,5,4,4,9", "--tuple", "5,3,3,1", "--seed", "11", "--output", "json")
    assert _run(*args).output == _run(*args).output


def test_json_roundtrip_byte_identical():
    result = _run("sumdof", "--config", "6,5,4,4,9", "--output", "json")
    text = result.output
    assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text


def test_seed_env_var():
    args = ("verify", "--config", "6,5,4,4,9", "--tuple", "5,3,3,1", "--output", "json")
    via_env = _run(*args, env={"GSARELAY_SEED": "11"})
    via_flag = _run(*args, "--seed", "11")
    assert json.loads(via_env.output) == json.loads(via_flag.output)


def test_tolerance_overrides_are_accepted():
    result = _run(
        "verify", "--config", "6,5,4,4,9", "--tuple", "5,3,3,1",
        "--seed", "11", "--tol-residual", "1e-6", "--tol-rank", "1e-10",
        "--output", "json",
    )
    assert result.exit_code == 0
    assert json.loads(result.output)["passed"] is True


def test_exit_code_2_on_malformed_input():
    assert _run("check", "--config", "6,5,4,4", "--tuple", "1,1,1,1").exit_code == 2
    assert _run("check", "--config", "6,5,4,4,9", "--tuple", "1,1,1").exit_code == 2
    assert _run("check", "--config", "a,b,c,d,e", "--tuple", "1,1,1,1").exit_code == 2
    assert _run("sweep", "--m-max", "0", "--n-max", "2").exit_code == 2


def test_exit_code_3_on_infeasible_tuple():
    result = _run("synth", "--config", "6,5,4,4,9", "--tuple", "9,9,9,9")
    assert result.exit_code == 3
    result = _run("verify", "--config", "6,5,4,4,9", "--tuple", "7/2,1,1,1")
    assert result.exit_code == 3


def test_sweep_csv_schema_and_values():
    result = _run("sweep", "--m-max", "2", "--n-max", "3", "--output", "csv")
    assert result.exit_code == 0
    rows = list(csv.DictReader(io.StringIO(result.output)))
    assert list(rows[0].keys()) == [
        "m1", "m2", "m3", "m4", "n",
        "sum_dof_num", "sum_dof_den", "regime", "oracle_match",
    ]
    assert all(r["oracle_match"] == "true" for r in rows)
    by_key = {(r["m1"], r["m2"], r["m3"], r["m4"], r["n"]): r for r in rows}
    row = by_key[("1", "1", "1", "1", "2")]
    assert (row["sum_dof_num"], row["sum_dof_den"], row["regime"]) == ("8", "3", "1")
