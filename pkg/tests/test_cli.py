"""Driver behavior: exit codes, determinism, config handling, negative controls."""

import json

import pytest

from crprime.cli import main
from crprime.report import reports_from_json, reports_to_json

FAST_GRID = "48x24x32"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- run ------------------------------------------------------------------------


def test_run_sphere_passes_and_sorts_by_check_id(capsys):
    code, out, _ = run_cli(capsys, "run", "sphere", "--format", "json",
                           "--grid", FAST_GRID)
    assert code == 0
    doc = json.loads(out)
    ids = [c["check_id"] for c in doc["checks"]]
    assert ids == sorted(ids)
    assert doc["meta"]["suite"] == "sphere"
    assert doc["meta"]["seed"] == 0
    statuses = {c["status"] for c in doc["checks"]}
    assert statuses <= {"pass", "recorded"}


def test_run_text_format_has_summary_line(capsys):
    code, out, _ = run_cli(capsys, "run", "heisenberg")
    assert code == 0
    assert "fail" in out.splitlines()[-1]


def test_unknown_suite_is_a_usage_error(capsys):
    code, _, _ = run_cli(capsys, "run", "bogus")
    assert code == 2


def test_byte_identical_reports_for_fixed_config(capsys):
    args = ("run", "sphere", "--format", "json", "--seed", "5", "--grid", FAST_GRID)
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_report_json_roundtrips(capsys):
    _, out, _ = run_cli(capsys, "run", "sphere", "--format", "json",
                        "--grid", FAST_GRID)
    meta, reports = reports_from_json(out)
    assert reports_to_json(reports, meta) == out


def test_run_conformal_rejects_low_order(capsys):
    code, _, err = run_cli(capsys, "run", "conformal", "--order", "8")
    assert code == 2
    assert "order" in err


# -- negative controls ------------------------------------------------------------


def test_green_power_control_fails(capsys):
    code, out, _ = run_cli(capsys, "run", "heisenberg", "--corrupt", "green-power")
    assert code == 1
    assert "heisenberg.q3_identity" in out


def test_weight4_control_fails(capsys):
    code, out, _ = run_cli(capsys, "run", "moser", "--corrupt", "moser-weight4",
                           "--format", "json")
    assert code == 1
    fails = {c["check_id"] for c in json.loads(out)["checks"] if c["status"] == "fail"}
    assert "moser.series.curvature" in fails
    assert "moser.series.torsion" in fails


def test_corrupt_flag_must_match_suite(capsys):
    code, _, err = run_cli(capsys, "run", "sphere", "--corrupt", "moser-weight4")
    assert code == 2
    assert "moser" in err


def test_tampered_golden_file_fails(capsys, tmp_path):
    from importlib import resources

    doc = json.loads(resources.files("crprime").joinpath("data/expansions.json").read_text())
    doc["series"]["torsion"]["terms"][0]["coeff"] = [9, 1, 0, 1]
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(doc))
    code, _, _ = run_cli(capsys, "run", "moser", "--golden", str(bad))
    assert code == 1


def test_golden_flag_must_match_suite(capsys):
    code, _, _ = run_cli(capsys, "run", "sphere", "--golden", "whatever.json")
    assert code == 2


# -- config files -------------------------------------------------------------------


def test_config_file_merges_with_flag_overrides(capsys, tmp_path):
    cfg = tmp_path / "verify.cfg"
    cfg.write_text(f"grid = {FAST_GRID}\nseed = 4  # probe seed\nformat = json\n")
    code, out, _ = run_cli(capsys, "run", "sphere", "--config", str(cfg), "--seed", "9")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["seed"] == 9
    assert doc["meta"]["grid"] == FAST_GRID


def test_config_file_errors_are_usage_errors(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("volume = 11\n")
    assert run_cli(capsys, "run", "sphere", "--config", str(cfg))[0] == 2
    cfg.write_text("grid 96x40x16\n")
    assert run_cli(capsys, "run", "sphere", "--config", str(cfg))[0] == 2
    assert run_cli(capsys, "run", "sphere", "--config", str(tmp_path / "nope"))[0] == 2
    assert run_cli(capsys, "run", "sphere", "--grid", "96x40")[0] == 2
    assert run_cli(capsys, "run", "sphere", "--grid", "3x4x5")[0] == 2


# -- expand ---------------------------------------------------------------------------


def test_expand_torsion_prints_the_series(capsys):
    code, out, _ = run_cli(capsys, "expand", "A", "--order", "7")
    assert code == 0
    assert "(-24-12*i)*z^2*zb^2" in out
    assert out.strip().endswith("+ O(8)")


def test_expand_flat_curvature_is_zero(capsys):
    code, out, _ = run_cli(capsys, "expand", "R", "--order", "7", "--flat")
    assert code == 0
    assert out.strip() == "R = 0 + O(8)"


def test_expand_szego_closed_form(capsys):
    code, out, _ = run_cli(capsys, "expand", "szego")
    assert code == 0
    assert "-16*u^2 + 16*z^2*zb^2" in out


def test_expand_json_terms(capsys):
    code, out, _ = run_cli(capsys, "expand", "g", "--order", "7", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["quantity"] == "g"
    assert doc["order"] == 7
    assert doc["terms"], "metric series should have terms at order 7"
    assert set(doc["terms"][0]) <= {"coeff", "z", "zb", "u", "pi"}


def test_expand_unknown_quantity_is_usage_error(capsys):
    assert run_cli(capsys, "expand", "torsion")[0] == 2


def test_help_exits_cleanly(capsys):
    assert run_cli(capsys, "--help")[0] == 0
