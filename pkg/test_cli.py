"""CLI tests: exit codes, reports, file round trips"""

import json

import pytest

from app.cli import cli
from app.models.schemas import RunReport, SurgeryPresentationModel
from conftest import BETA5_TEXT, ONE_PATTERN_TEXT

SERIES = {
    "schema": "v1",
    "labels": ["x", "y"],
    "Q": [["0", "1"], ["1", "0"]],
    "R": [{"coeff": "1", "trees": [{"text": "x-(1,2)"}, {"text": "y-(1,3)"}]}],
    "cap": 5,
}


@pytest.fixture
def beta5_file(write_json):
    return write_json("beta5.json", {"schema": "v1", "text": BETA5_TEXT})


class TestValidate:
    def test_beta5(self, runner, beta5_file):
        result = runner.invoke(cli, ["validate", beta5_file])
        assert result.exit_code == 0
        assert "vertex 0" in result.output

    def test_pattern_document(self, runner, write_json):
        path = write_json("p.json", {"schema": "v1", "tree": {"text": ONE_PATTERN_TEXT}, "n": 1})
        result = runner.invoke(cli, ["validate", path])
        assert result.exit_code == 0
        assert "1-pattern of degree 7" in result.output

    def test_vortex(self, runner, write_json):
        path = write_json("y.json", {"text": "1-(2,3)"})
        result = runner.invoke(cli, ["validate", path])
        assert result.exit_code == 1
        assert "strut components" in result.output

    def test_malformed_json(self, runner, write_json):
        path = write_json("bad.json", "{not json")
        assert runner.invoke(cli, ["validate", path]).exit_code == 2

    def test_schema_violation(self, runner, write_json):
        path = write_json("v2.json", {"schema": "v2", "text": BETA5_TEXT})
        assert runner.invoke(cli, ["validate", path]).exit_code == 2

    def test_bad_tree_text(self, runner, write_json):
        path = write_json("t.json", {"text": "1-(2,3"})
        assert runner.invoke(cli, ["validate", path]).exit_code == 2

    def test_json_report(self, runner, beta5_file):
        result = runner.invoke(cli, ["--json", "validate", beta5_file])
        report = RunReport.model_validate_json(result.output)
        assert report.command == "validate"
        assert report.input_digest.startswith("sha256:")
        assert report.verdicts[0].passed


class TestBuildAndCertify:
    def test_build_writes_presentation(self, runner, beta5_file, tmp_path):
        out = tmp_path / "presentation.json"
        result = runner.invoke(cli, ["build", beta5_file, "--out", str(out)])
        assert result.exit_code == 0
        assert "certificate level 1: granted" in result.output
        presentation = SurgeryPresentationModel.model_validate_json(out.read_text())
        assert len(presentation.curves) == 6
        assert presentation.certificates[0].granted

    def test_build_one_pattern(self, runner, write_json):
        path = write_json("q.json", {"text": ONE_PATTERN_TEXT})
        result = runner.invoke(cli, ["--json", "build", path, "--n", "1"])
        assert result.exit_code == 0
        output = json.loads(result.output)["output"]
        assert output["reduced"]["degree"] == 1
        assert len(output["reduced"]["leaves"]) == 3

    def test_certify(self, runner, beta5_file, tmp_path):
        out = tmp_path / "presentation.json"
        runner.invoke(cli, ["build", beta5_file, "--out", str(out)])
        result = runner.invoke(cli, ["certify", str(out), "--n", "1"])
        assert result.exit_code == 0
        assert "granted" in result.output

    def test_uncertifiable_leaf(self, runner, beta5_file, tmp_path):
        out = tmp_path / "presentation.json"
        runner.invoke(cli, ["build", beta5_file, "--out", str(out)])
        data = json.loads(out.read_text())
        for curve in data["curves"]:
            if curve["label"] == "l2":
                curve["word"] = "x1 x2"
        data["certificates"] = []
        out.write_text(json.dumps(data))
        result = runner.invoke(cli, ["certify", str(out)])
        assert result.exit_code == 1
        assert "l2" in result.output


class TestZmin:
    def test_beta5_pass(self, runner, beta5_file):
        result = runner.invoke(cli, ["zmin", beta5_file])
        assert result.exit_code == 0
        assert "min degree: 5" in result.output
        assert "matched sign: +" in result.output
        assert result.output.strip().endswith("PASS")

    def test_oracle(self, runner, beta5_file):
        result = runner.invoke(cli, ["zmin", beta5_file, "--oracle", "--sign"])
        assert result.exit_code == 0
        assert "oracle agrees" in result.output
        assert "sign convention:" in result.output

    def test_json(self, runner, beta5_file):
        result = runner.invoke(cli, ["--json", "zmin", beta5_file])
        data = json.loads(result.output)
        assert data["schema"] == "v1"
        assert data["output"]["verdict"] == "PASS"
        assert [s["name"] for s in data["stages"]][0] == "build"
        assert data["certificates"][0]["granted"]

    def test_deterministic(self, runner, beta5_file):
        first = json.loads(runner.invoke(cli, ["--json", "zmin", beta5_file]).output)
        second = json.loads(runner.invoke(cli, ["--json", "zmin", beta5_file]).output)
        assert first["output"] == second["output"]

    def test_invalid_pattern(self, runner, write_json):
        path = write_json("y.json", {"text": "1-(2,3)"})
        assert runner.invoke(cli, ["zmin", path]).exit_code == 1


class TestDirectCommands:
    def test_dim(self, runner):
        result = runner.invoke(cli, ["dim", "--degree", "2", "--colors", "3"])
        assert result.exit_code == 0
        assert result.output.strip() == "1"

    def test_dim_guard(self, runner):
        result = runner.invoke(cli, ["--max-degree", "1", "dim", "--degree", "2", "--colors", "3"])
        assert result.exit_code == 1

    def test_magnus(self, runner):
        result = runner.invoke(cli, ["magnus", "--word", "[x1,x2]", "--cap", "2"])
        assert result.output.strip() == "1 + X1X2 - X2X1"

    def test_magnus_tree(self, runner):
        result = runner.invoke(cli, ["magnus", "--word", "[x1,x2]", "--cap", "2", "--tree"])
        assert result.exit_code == 0
        assert "root" in result.output

    def test_magnus_syntax_error(self, runner):
        result = runner.invoke(cli, ["magnus", "--word", "[x1", "--cap", "2"])
        assert result.exit_code == 2
        assert "position 3" in result.output

    def test_glue(self, runner, write_json):
        result = runner.invoke(cli, ["glue", write_json("s.json", SERIES)])
        assert result.exit_code == 0
        assert "min degree: 3" in result.output
        assert "-1 *" in result.output

    def test_glue_brute(self, runner, write_json):
        result = runner.invoke(cli, ["glue", write_json("s.json", SERIES), "--brute"])
        assert result.exit_code == 0

    def test_glue_singular(self, runner, write_json):
        singular = dict(SERIES, Q=[["0", "0"], ["0", "0"]])
        result = runner.invoke(cli, ["glue", write_json("s.json", singular)])
        assert result.exit_code == 1
        assert "singular strut matrix" in result.output

    def test_glue_bad_rational(self, runner, write_json):
        bad = {"labels": ["a"], "Q": [["1/0"]], "R": [], "cap": 3}
        result = runner.invoke(cli, ["glue", write_json("s.json", bad)])
        assert result.exit_code == 2
        assert "not an exact rational" in result.output
        assert not isinstance(result.exception, ValueError)

    def test_glue_too_many_legs(self, runner, write_json):
        result = runner.invoke(cli, ["--max-legs", "1", "glue", write_json("s.json", SERIES)])
        assert result.exit_code == 1

    def test_catalog(self, runner):
        result = runner.invoke(cli, ["catalog", "--degree", "5", "--colors", "3"])
        assert result.exit_code == 0
        assert result.output.strip()
