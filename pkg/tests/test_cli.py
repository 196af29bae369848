"""End-to-end CLI checks through click's CliRunner.

Machine output is read from ``result.stdout`` only; rich status lines go to
stderr.
"""

import json

from latininf.cli import cli


def _json(result):
    return json.loads(result.stdout)


class TestBuildTerrace:
    def test_build_window_verify(self, runner, tmp_path):
        art = tmp_path / "t.json"
        result = runner.invoke(cli, ["build-terrace", "--steps", "60", "--out", str(art)])
        assert result.exit_code == 0, result.output
        doc = _json(result)
        assert doc["kind"] == "terrace"
        assert doc["cursor"] == 60
        assert doc["check"]["passed"]
        assert art.exists()

        csv_path = tmp_path / "w.csv"
        result = runner.invoke(cli, ["window", str(art), "--size", "6", "--out", str(csv_path)])
        assert result.exit_code == 0, result.output
        assert csv_path.read_text().startswith("row,col,symbol\n")

        for check in ("latin", "vatican"):
            result = runner.invoke(cli, ["verify", check, str(csv_path)])
            assert result.exit_code == 0, result.output
            assert _json(result)["passed"]

        result = runner.invoke(cli, ["verify", "state", str(art)])
        assert result.exit_code == 0

    def test_default_out_goes_under_home(self, runner, tmp_home):
        result = runner.invoke(cli, ["build-terrace", "--steps", "10"])
        assert result.exit_code == 0, result.output
        assert _json(result)["artifact"].startswith(str(tmp_home))

    def test_resume_matches_straight_run(self, runner, tmp_path):
        straight, half, resumed = (tmp_path / n for n in ("s.json", "h.json", "r.json"))
        assert runner.invoke(cli, ["build-terrace", "--steps", "200", "--out", str(straight)]).exit_code == 0
        assert runner.invoke(cli, ["build-terrace", "--steps", "100", "--out", str(half)]).exit_code == 0
        result = runner.invoke(cli, ["build-terrace", "--steps", "100", "--resume", str(half),
                                     "--out", str(resumed)])
        assert result.exit_code == 0, result.output
        assert _json(result)["cursor"] == 200
        assert resumed.read_bytes() == straight.read_bytes()

    def test_max_distance_survives_resume(self, runner, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        runner.invoke(cli, ["build-terrace", "--index", "N", "--max-distance", "2",
                            "--steps", "30", "--out", str(first)])
        runner.invoke(cli, ["build-terrace", "--steps", "30", "--resume", str(first),
                            "--out", str(second)])
        assert json.loads(second.read_text())["params"] == {"max_distance": "2"}

    def test_finite_group_is_bad_input(self, runner, tmp_path):
        result = runner.invoke(cli, ["build-terrace", "--group", "Zn:7", "--out", str(tmp_path / "x.json")])
        assert result.exit_code == 2

    def test_unknown_flag(self, runner):
        assert runner.invoke(cli, ["build-terrace", "--colour", "red"]).exit_code == 2


def test_corrupted_window_fails_vatican(runner, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("row,col,symbol\n0,0,1\n0,1,2\n1,5,1\n1,6,2\n")
    result = runner.invoke(cli, ["verify", "vatican", str(path)])
    assert result.exit_code == 1
    doc = _json(result)
    assert not doc["passed"]
    assert doc["witnesses"]


def test_bad_jobs_env(runner, monkeypatch):
    monkeypatch.setenv("LATININF_JOBS", "0")
    assert runner.invoke(cli, ["oracle", "nim-table", "1"]).exit_code == 2


class TestSCM:
    def test_cyclic(self, runner):
        result = runner.invoke(cli, ["scm", "cyclic", "7"])
        assert result.exit_code == 0
        doc = _json(result)
        assert doc["group"] == "Zn:7"
        assert doc["transcript"]["passed"]

    def test_cyclic_bad_order(self, runner):
        assert runner.invoke(cli, ["scm", "cyclic", "6"]).exit_code == 2

    def test_certificate_artifact(self, runner, tmp_path):
        out = tmp_path / "c.json"
        assert runner.invoke(cli, ["scm", "product", "5", "7", "--out", str(out)]).exit_code == 0
        assert runner.invoke(cli, ["knutvic", "--mapping", str(out)]).exit_code == 0

    def test_quotient_and_field(self, runner):
        assert runner.invoke(cli, ["scm", "quotient", "5", "7"]).exit_code == 0
        assert _json(runner.invoke(cli, ["scm", "field", "1"]))["group"] == "E2:2"

    def test_criterion_cross_check(self, runner):
        result = runner.invoke(cli, ["scm", "criterion", "3", "3", "--check"])
        assert result.exit_code == 0, result.output
        assert _json(result) == {"factors": [3, 3], "exists": True, "search_found": True, "agree": True}

    def test_greedy_refuses_involution_group(self, runner, tmp_path):
        result = runner.invoke(cli, ["scm", "greedy", "--group", "E2", "--out", str(tmp_path / "m.json")])
        assert result.exit_code == 2

    def test_greedy_then_window(self, runner, tmp_path):
        art = tmp_path / "m.json"
        assert runner.invoke(cli, ["scm", "greedy", "--steps", "80", "--out", str(art)]).exit_code == 0
        result = runner.invoke(cli, ["knutvic", "--mapping", str(art), "--size", "12"])
        assert result.exit_code == 0, result.output


class TestKnutVic:
    def test_order_seven(self, runner, tmp_path):
        out = tmp_path / "kv.csv"
        result = runner.invoke(cli, ["knutvic", "--order", "7", "--out", str(out)])
        assert result.exit_code == 0
        assert _json(result)["passed"]
        assert len(out.read_text().splitlines()) == 1 + 49

    def test_order_six_fails(self, runner):
        result = runner.invoke(cli, ["knutvic", "--order", "6"])
        assert result.exit_code == 1
        assert not _json(result)["passed"]

    def test_needs_exactly_one_source(self, runner):
        assert runner.invoke(cli, ["knutvic"]).exit_code == 2


class TestReal:
    def test_probe(self, runner):
        result = runner.invoke(cli, ["real", "--probe", "0", "1", "1"])
        assert result.exit_code == 0
        doc = _json(result)
        assert doc["ordered"] is True
        assert max(doc["residuals"]) <= 1e-10

    def test_window(self, runner):
        result = runner.invoke(cli, ["real", "--window", "20"])
        assert result.exit_code == 0
        assert _json(result)["property"] == "semivatican-tolerance"

    def test_degenerate_pair(self, runner):
        assert runner.invoke(cli, ["real", "--probe", "1", "1", "1"]).exit_code == 2


class TestConstructions:
    def test_nonrowcomplete(self, runner, tmp_path):
        art = tmp_path / "i.json"
        result = runner.invoke(cli, ["build-nonrowcomplete", "--steps", "20", "--out", str(art)])
        assert result.exit_code == 0, result.output
        assert runner.invoke(cli, ["verify", "state", str(art)]).exit_code == 0

    def test_nongroup_vatican_breaks_quadrangle(self, runner, tmp_path):
        art = tmp_path / "v.json"
        assert runner.invoke(cli, ["build-nongroup-vatican", "--steps", "40", "--out", str(art)]).exit_code == 0
        result = runner.invoke(cli, ["verify", "quadrangle", str(art)])
        assert result.exit_code == 1
        assert runner.invoke(cli, ["verify", "vatican", str(art)]).exit_code == 0

    def test_immunize_seed(self, runner):
        result = runner.invoke(cli, ["immunize", "--place", "0", "3", "3"])
        assert result.exit_code == 0, result.output
        lines = result.stdout.splitlines()
        assert lines[0] == "row,col,symbol"
        assert "0,3,3" in lines
        assert len({line.split(",")[0] for line in lines[1:]}) == 15

    def test_immunize_clash_is_bad_input(self, runner):
        assert runner.invoke(cli, ["immunize", "--place", "0", "3", "0"]).exit_code == 2

    def test_moo(self, runner, tmp_path):
        result = runner.invoke(cli, ["moo", "--k", "3", "--steps", "60", "--out", str(tmp_path / "f.json")])
        assert result.exit_code == 0, result.output
        assert _json(result)["kind"] == "family"


class TestOrthocheck:
    def test_family_is_mutually_orthogonal(self, runner, tmp_path):
        art = tmp_path / "f.json"
        assert runner.invoke(cli, ["moo", "--k", "3", "--steps", "60", "--out", str(art)]).exit_code == 0
        result = runner.invoke(cli, ["orthocheck", str(art)])
        assert result.exit_code == 0, result.output
        doc = _json(result)
        assert doc["property"] == "mutually-orthogonal"
        assert doc["statistics"]["mappings"] == 3

    def test_mapping_is_not_orthogonal_to_itself(self, runner, tmp_path):
        art = tmp_path / "m.json"
        assert runner.invoke(cli, ["scm", "greedy", "--steps", "30", "--out", str(art)]).exit_code == 0
        result = runner.invoke(cli, ["orthocheck", str(art), str(art)])
        assert result.exit_code == 1
        assert _json(result)["witnesses"]

    def test_single_mapping_is_bad_input(self, runner, tmp_path):
        art = tmp_path / "m.json"
        runner.invoke(cli, ["scm", "greedy", "--steps", "10", "--out", str(art)])
        assert runner.invoke(cli, ["orthocheck", str(art)]).exit_code == 2

    def test_csv_is_bad_input(self, runner, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("row,col,symbol\n0,0,1\n")
        assert runner.invoke(cli, ["orthocheck", str(path), str(path)]).exit_code == 2


class TestOracle:
    def test_williams(self, runner):
        result = runner.invoke(cli, ["oracle", "williams", "4"])
        assert result.exit_code == 0
        assert len(result.stdout.splitlines()) == 1 + 16

    def test_williams_report_with_out(self, runner, tmp_path):
        out = tmp_path / "w.csv"
        result = runner.invoke(cli, ["oracle", "williams", "6", "--out", str(out)])
        assert result.exit_code == 0, result.output
        doc = _json(result)
        assert doc["passed"]
        assert doc["statistics"] == {"cells": 36, "latin": True, "row_complete": True}
        assert len(out.read_text().splitlines()) == 1 + 36

    def test_williams_failure_exits_with_witness(self, runner, monkeypatch):
        from latininf.services import square_service

        cyclic = square_service.LatinRegion.from_grid([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
        monkeypatch.setattr(square_service, "williams_complete_square", lambda n: cyclic)
        result = runner.invoke(cli, ["oracle", "williams", "4"])
        assert result.exit_code == 1
        doc = _json(result)
        assert doc["property"] == "williams"
        assert not doc["passed"]
        assert doc["witnesses"]
        assert doc["statistics"]["latin"] is True
        assert doc["statistics"]["row_complete"] is False
        assert "row,col,symbol" not in result.stdout

    def test_williams_odd(self, runner):
        assert runner.invoke(cli, ["oracle", "williams", "3"]).exit_code == 2

    def test_nim_table(self, runner):
        result = runner.invoke(cli, ["oracle", "nim-table", "2"])
        assert result.exit_code == 0
        assert _json(result)["table"][2][2] == 3

    def test_bruteforce(self, runner):
        result = runner.invoke(cli, ["oracle", "bruteforce-scm", "--factors", "2,4"])
        assert result.exit_code == 0
        doc = _json(result)
        assert doc["found"] is True
        assert len(doc["pairs"]) == 8

    def test_bruteforce_over_cap(self, runner):
        result = runner.invoke(cli, ["oracle", "bruteforce-scm", "--group", "Zn:11"])
        assert result.exit_code == 2
