"""
Tests for the command-line front end: exit codes, output formats and
usage errors.
"""

import json
from pathlib import Path

import pytest

from src.cli.app import run
from src.scenarios import build_yesno, load_scenario

YESNO_FILE = str(Path(__file__).resolve().parent.parent / "config" / "scenarios" / "yesno_n2_k2.yaml")


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestScenarioCommands:
    def test_list(self, capsys):
        code, out, _ = invoke(capsys, "scenario", "list")
        assert code == 0
        assert "appendixB" in out

    def test_show(self, capsys):
        code, out, _ = invoke(capsys, "scenario", "show", "--scenario", "example1", "--K", "3")
        assert code == 0
        assert "horizon: 3" in out

    def test_export_to_file(self, capsys, tmp_path):
        target = tmp_path / "yesno.yaml"
        code, out, _ = invoke(capsys, "scenario", "export", "--scenario", "yesno", "--output", str(target))
        assert code == 0
        assert load_scenario(target).spec == build_yesno().spec

    def test_list_as_json(self, capsys):
        code, out, _ = invoke(capsys, "scenario", "list", "--format", "json")
        assert code == 0
        assert len(json.loads(out)["scenarios"]) == 6


class TestAnalysisCommands:
    def test_scaled_table(self, capsys):
        code, out, _ = invoke(capsys, "table", "--scenario", "appendixA")
        assert code == 0
        assert "x 1/3" in out
        assert "(6, 4)" in out

    def test_table_csv(self, capsys):
        code, out, _ = invoke(capsys, "table", "--scenario", "example1", "--format", "csv")
        assert code == 0
        assert out.startswith("blue,red,payoff:blue,payoff:red")

    def test_eliminate(self, capsys):
        code, out, _ = invoke(capsys, "eliminate", "--scenario", "example1")
        assert code == 0
        assert "surviving for blue: double" in out

    def test_policy_dump(self, capsys):
        code, out, _ = invoke(capsys, "policy", "dump", "--scenario", "example1", "--limit", "3")
        assert code == 0
        assert "more entries" in out

    def test_ledger_json(self, capsys):
        code, out, _ = invoke(capsys, "ledger", "--scenario", "collusion", "--K", "1", "--format", "json")
        assert code == 0
        assert json.loads(out)["total_paths"] == 4

    def test_payoff_with_oracle(self, capsys):
        code, out, _ = invoke(capsys, "payoff", "--scenario", "example1", "--oracle", "--format", "json")
        assert code == 0
        assert json.loads(out)["oracle"]["matches"] is True

    def test_payoff_from_file(self, capsys):
        code, out, _ = invoke(capsys, "payoff", "--file", YESNO_FILE, "--profile", "always-yes")
        assert code == 0
        assert "paths: 1" in out


class TestVerifyCommands:
    def test_guarantee_passes(self, capsys):
        code, out, _ = invoke(capsys, "verify", "guarantee", "--scenario", "example1", "--mechanism", "sequential")
        assert code == 0
        assert "result: PASS" in out

    def test_balance_warns_on_subsidy(self, capsys):
        code, out, _ = invoke(capsys, "verify", "balance", "--scenario", "collusion")
        assert code == 0
        assert "warning: external subsidy" in out

    def test_martingale(self, capsys):
        code, _, _ = invoke(
            capsys, "verify", "martingale", "--scenario", "example1", "--mechanism", "sequential", "--agent", "blue"
        )
        assert code == 0

    def test_lemma_general(self, capsys):
        code, _, _ = invoke(capsys, "verify", "lemma-general", "--scenario", "appendixA", "--profile", "row2xcol2")
        assert code == 0

    def test_nash_failure_exits_one(self, capsys):
        code, out, _ = invoke(
            capsys,
            "verify",
            "nash",
            "--scenario",
            "appendixB",
            "--param",
            "p0=9/10,9/10",
            "--param",
            "mixed_low=false",
            "--profile",
            "one",
            "--agent",
            "blue",
        )
        assert code == 1
        assert "result: FAIL" in out

    def test_guarantee_needs_a_certified_rule(self, capsys):
        code, _, err = invoke(capsys, "verify", "guarantee", "--scenario", "example1", "--mechanism", "balanced")
        assert code == 2
        assert "Guarantees are certified for" in err


class TestUsageErrors:
    """Configuration mistakes exit with code 2."""

    @pytest.mark.parametrize(
        "argv",
        [
            ("table",),
            ("table", "--scenario", "example1", "--file", YESNO_FILE),
            ("table", "--file", YESNO_FILE, "--K", "3"),
            ("table", "--scenario", "example1", "--strategies", "blue="),
            ("payoff", "--scenario", "example1", "--monte-carlo"),
            ("payoff", "--scenario", "chess"),
            ("payoff", "--scenario", "example1", "--param", "K"),
            ("payoff", "--scenario", "example1", "--profile", "greedy"),
            ("payoff", "--scenario", "example1", "--max-paths", "0"),
            ("table", "--file", "/nonexistent/scenario.yaml"),
        ],
    )
    def test_exit_code(self, capsys, argv):
        code, _, err = invoke(capsys, *argv)
        assert code == 2
        assert err

    def test_unknown_check_is_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as error:
            run(["verify", "fairness", "--scenario", "example1"])
        assert error.value.code == 2
