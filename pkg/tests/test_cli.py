"""Command-line interface: golden outputs, formats, and exit codes."""

import json

import numpy as np
import pytest

from haarmaps import MatrixTuple
from haarmaps.cli import run


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestWeingartenCommand:
    def test_identity_class_gold(self, capsys):
        code, out, _ = invoke(capsys, "wg", "--q", "2", "--n", "5", "--class", "1+1")
        assert code == 0
        assert out == "1/24\n"

    def test_swap_class_gold(self, capsys):
        code, out, _ = invoke(capsys, "wg", "--q", "2", "--n", "5", "--class", "2")
        assert code == 0
        assert out == "-1/120\n"

    def test_three_cycle_gold(self, capsys):
        code, out, _ = invoke(capsys, "wg", "--q", "3", "--n", "4", "--class", "3")
        assert code == 0
        assert out == "1/360\n"

    def test_json_format(self, capsys):
        code, out, _ = invoke(
            capsys, "wg", "--q", "2", "--n", "5", "--class", "1+1",
            "--format", "json",
        )
        assert code == 0
        assert out == '{"class": [1, 1], "n": 5, "q": 2, "value": "1/24"}\n'

    def test_csv_format(self, capsys):
        code, out, _ = invoke(
            capsys, "wg", "--q", "2", "--n", "5", "--class", "1+1",
            "--format", "csv",
        )
        assert code == 0
        assert out == "q,n,class,value\n2,5,1+1,1/24\n"

    def test_identity_keyword(self, capsys):
        code, out, _ = invoke(capsys, "wg", "--q", "2", "--n", "5", "--class", "id")
        assert code == 0
        assert out == "1/24\n"

    def test_wrong_class_sum_is_a_usage_error(self, capsys):
        code, _, err = invoke(capsys, "wg", "--q", "2", "--n", "5", "--class", "3")
        assert code == 1
        assert "does not sum" in err

    def test_dimension_below_regime_is_an_error(self, capsys):
        code, _, err = invoke(capsys, "wg", "--q", "2", "--n", "1", "--class", "2")
        assert code == 1
        assert "regime" in err


class TestMomentAndCumulant:
    def test_moment_gold(self, capsys):
        code, out, _ = invoke(capsys, "moment", "--n", "4", "a1 u1 a2 u1^-1")
        assert code == 0
        assert out == "4 * tr(a1) tr(a2)\n"

    def test_moment_of_cancelling_word(self, capsys):
        code, out, _ = invoke(capsys, "moment", "--n", "3", "u1 u1^-1")
        assert code == 0
        assert out == "3\n"

    def test_moment_json(self, capsys):
        code, out, _ = invoke(
            capsys, "moment", "--n", "4", "--format", "json", "a1 u1 a2 u1^-1"
        )
        assert code == 0
        data = json.loads(out)
        assert data["N"] == 4
        assert data["words"] == ["a1 u1 a2 u1^-1"]
        assert data["value"]["render"] == "4 * tr(a1) tr(a2)"
        assert data["value"]["terms"] == [
            {"coeff": ["4", "0"], "traces": [["a1"], ["a2"]]}
        ]

    def test_moment_csv(self, capsys):
        code, out, _ = invoke(
            capsys, "moment", "--n", "4", "--format", "csv", "a1 u1 a2 u1^-1"
        )
        assert code == 0
        assert out == "coefficient,traces\n4,tr(a1) tr(a2)\n"

    def test_cumulant_of_a_trace_pair(self, capsys):
        code, out, _ = invoke(capsys, "cumulant", "--n", "2", "u1", "u1^-1")
        assert code == 0
        assert out == "1\n"

    def test_single_word_cumulant_equals_moment(self, capsys):
        code, out, _ = invoke(capsys, "cumulant", "--n", "4", "a1 u1 a2 u1^-1")
        assert code == 0
        assert out == "4 * tr(a1) tr(a2)\n"


class TestGenusCoefficient:
    def test_planar_gold(self, capsys):
        code, out, _ = invoke(capsys, "genus-coeff", "--g", "0", "a1 u1 a2 u1^-1")
        assert code == 0
        assert out == "1 * tr(a1) tr(a2)\n"

    def test_vanishing_higher_genus(self, capsys):
        code, out, _ = invoke(capsys, "genus-coeff", "--g", "1", "a1 u1 a2 u1^-1")
        assert code == 0
        assert out == "0\n"

    def test_json_payload(self, capsys):
        code, out, _ = invoke(
            capsys, "genus-coeff", "--g", "0", "--format", "json", "a1 u1 a2 u1^-1"
        )
        assert code == 0
        data = json.loads(out)
        assert data["g"] == 0 and data["l"] == 1
        assert data["value"]["render"] == "1 * tr(a1) tr(a2)"


class TestEnumerateMaps:
    def test_pretty_listing(self, capsys):
        code, out, _ = invoke(
            capsys, "enumerate-maps", "--labels", "2", "--eps", "+-",
            "--rho", "(1 2)", "--r", "0",
        )
        assert code == 0
        assert out == (
            "1 map(s)\npi=(1 2) genus=0 connected=True walks=[color 1: ]\n"
        )

    def test_json_lines(self, capsys):
        code, out, _ = invoke(
            capsys, "enumerate-maps", "--labels", "2", "--eps", "+-",
            "--rho", "(1 2)", "--r", "0", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload == {
            "labels": [1, 2],
            "rho": "(1 2)",
            "eps": [1, -1],
            "colors": [1, 1],
            "pi": "(1 2)",
            "walks": {"1": []},
        }

    def test_csv_listing(self, capsys):
        code, out, _ = invoke(
            capsys, "enumerate-maps", "--labels", "4", "--eps", "++--",
            "--rho", "(1 2)(3 4)", "--r", "1", "--format", "csv",
        )
        assert code == 0
        assert out == (
            "index,pi,walks,genus,connected\n"
            "0,(1 3 2 4),1:(1 2),1,True\n"
            "1,(1 4 2 3),1:(1 2),1,True\n"
        )


class TestHurwitzCommand:
    def test_step_count_form(self, capsys):
        code, out, _ = invoke(
            capsys, "hurwitz", "--m", "3", "--rho", "3", "--gamma", "id",
            "--sigma", "1+1+1", "--r", "2",
        )
        assert code == 0
        assert out == "2\n"

    def test_genus_form_matches(self, capsys):
        code, out, _ = invoke(
            capsys, "hurwitz", "--m", "3", "--rho", "3", "--gamma", "id",
            "--sigma", "1+1+1", "--g", "0",
        )
        assert code == 0
        assert out == "2\n"

    def test_csv_reports_negative_step_count_as_zero(self, capsys):
        code, out, _ = invoke(
            capsys, "hurwitz", "--m", "2", "--rho", "2", "--gamma", "2",
            "--sigma", "2", "--g", "0", "--format", "csv",
        )
        assert code == 0
        assert out == "m,cycle types,g,r,count\n2,2|2|2,0,-1,0\n"


class TestIdentityCheckers:
    def test_tutte_theorem_gold(self, capsys):
        code, out, _ = invoke(capsys, "tutte-check", "--g", "0", "a1 u1^-1 a2 u1")
        assert code == 0
        assert out == (
            "lhs: 1 * tr(a1) tr(a2)\nrhs: 1 * tr(a1) tr(a2)\nequal: True\n"
        )

    def test_tutte_corollary(self, capsys):
        code, out, _ = invoke(
            capsys, "tutte-check", "--g", "0", "--form", "corollary",
            "a1 u1^-1 a2 u1",
        )
        assert code == 0
        assert out.endswith("equal: True\n")

    def test_tutte_potential_series(self, capsys):
        code, out, _ = invoke(
            capsys, "tutte-check", "--g", "0", "--potential", "a3 u1 a4 u1^-1",
            "--z-cap", "1", "a1 u1^-1 a2 u1",
        )
        assert code == 0
        assert out == "z^(0,): lhs=0 rhs=0\nz^(1,): lhs=0 rhs=0\nequal: True\n"

    def test_tutte_grid_summary(self, capsys):
        code, out, _ = invoke(
            capsys, "tutte-check", "--g", "0", "--grid",
            "--max-degree", "2", "--max-l", "1",
        )
        assert code == 0
        assert out == "g=0: 6 checks over 3 tuples, 0 failure(s)\n"

    def test_tutte_grid_json(self, capsys):
        code, out, _ = invoke(
            capsys, "tutte-check", "--g", "0", "--grid",
            "--max-degree", "2", "--max-l", "1", "--format", "json",
        )
        assert code == 0
        assert json.loads(out) == {
            "checks": 6,
            "failures": [],
            "g": 0,
            "max_degree": 2,
            "max_l": 1,
            "tuples": 3,
        }

    def test_tutte_requires_trailing_uninverted_letter(self, capsys):
        code, _, err = invoke(capsys, "tutte-check", "--g", "0", "a1 u1 a2 u1^-1")
        assert code == 1
        assert "must end with" in err

    def test_hurwitz_check(self, capsys):
        code, out, _ = invoke(capsys, "hurwitz-check", "--g", "0", "a1 u1 a2 u1^-1")
        assert code == 0
        assert out == (
            "hurwitz: 1 * tr(a1) tr(a2)\n"
            "direct : 1 * tr(a1) tr(a2)\n"
            "equal  : True\n"
        )

    def test_master_check(self, capsys):
        code, out, _ = invoke(capsys, "master-check", "u1", "u1^-1")
        assert code == 0
        assert out == "lhs: 1\nrhs: 1\nequal: True\n"

    def test_bounds_check_reports_holds(self, capsys):
        code, out, _ = invoke(
            capsys, "bounds-check", "--g", "0", "--n", "", "a1 u1 a2 u1^-1"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "lhs: 1"
        assert lines[1].startswith("rhs: ")
        assert lines[2] == "holds: True"

    def test_bounds_check_with_potential_reports_radius(self, capsys):
        code, out, _ = invoke(
            capsys, "bounds-check", "--g", "0", "--n", "1",
            "--q", "a3 u1 a4 u1^-1", "a1 u1 a2 u1^-1",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "lhs: 4"
        assert lines[2] == "holds: True"
        assert lines[3].startswith("formal radius (lower bound): ")


class TestMonteCarloCommand:
    def test_trace_pair_report(self, capsys):
        code, out, _ = invoke(
            capsys, "mc-verify", "--word", "u1", "--word", "u1^-1",
            "--n", "4", "--samples", "2000", "--seed", "7", "--sigma", "4",
        )
        assert code == 0
        data = json.loads(out)
        assert data["N"] == 4
        assert data["samples"] == 2000
        assert data["seed"] == 7
        assert data["target"] == [1.0, 0.0]
        assert data["within_tolerance"] is True
        assert data["estimate"][0] == pytest.approx(1.0102740550307219)
        assert data["sigma_distance"] == pytest.approx(0.479146051197833)

    def test_failing_target_sets_exit_code_two(self, capsys):
        code, out, _ = invoke(
            capsys, "mc-verify", "--word", "u1", "--word", "u1^-1",
            "--n", "4", "--samples", "2000", "--seed", "7",
            "--target", "50,0", "--sigma", "4",
        )
        assert code == 2
        assert json.loads(out)["within_tolerance"] is False

    def test_matrices_file(self, capsys, tmp_path):
        B = np.diag([1.0, 0.5, 0.25, 0.125]).astype(complex)
        C = np.diag([0.5, 0.5, 0.5, 0.25]).astype(complex)
        path = tmp_path / "mats.json"
        path.write_text(json.dumps(MatrixTuple(4, {1: B, 2: C}).to_json()))
        code, out, _ = invoke(
            capsys, "mc-verify", "--word", "a1 u1 a2 u1^-1", "--n", "4",
            "--samples", "4000", "--seed", "5", "--sigma", "4",
            "--matrices", str(path),
        )
        assert code == 0
        assert json.loads(out)["within_tolerance"] is True

    def test_deterministic_letters_without_matrices_is_an_error(self, capsys):
        code, _, err = invoke(
            capsys, "mc-verify", "--word", "a1 u1 a2 u1^-1", "--n", "4",
        )
        assert code == 1
        assert "error:" in err


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        code, _, err = invoke(capsys, "frobnicate")
        assert code == 1
        assert "usage:" in err

    def test_no_arguments(self, capsys):
        code, _, err = invoke(capsys)
        assert code == 1
        assert "usage:" in err

    def test_unknown_flag_is_rejected(self, capsys):
        code, _, err = invoke(
            capsys, "wg", "--q", "2", "--n", "5", "--class", "1+1", "--bogus"
        )
        assert code == 1
        assert "usage:" in err

    def test_help_exits_cleanly(self, capsys):
        assert run(["--help"]) == 0
        assert "usage:" in capsys.readouterr().out

    def test_every_subcommand_has_help(self, capsys):
        for name in (
            "wg", "moment", "cumulant", "genus-coeff", "enumerate-maps",
            "hurwitz", "tutte-check", "hurwitz-check", "bounds-check",
            "master-check", "mc-verify",
        ):
            assert run([name, "--help"]) == 0
            assert "usage:" in capsys.readouterr().out
