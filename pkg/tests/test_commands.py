import json

import pytest
from django.core import management
from django.core.management.base import CommandError


def call_json(capsys, *args):
    management.call_command(*args)
    return json.loads(capsys.readouterr().out)


@pytest.mark.django_db
def test_no_migrations(capsys: pytest.CaptureFixture):
    management.call_command("makemigrations", dry_run=True)

    captured = capsys.readouterr().out
    assert "No changes detected" in captured


def test_no_issues(capsys: pytest.CaptureFixture):
    management.call_command("check", fail_level="WARNING")

    captured: str = capsys.readouterr().out
    assert "System check identified no issues" in captured


def test_list_families(capsys: pytest.CaptureFixture):
    payload = call_json(capsys, "list_families")

    names = [family["name"] for family in payload["families"]]
    assert names == ["example1", "example2", "synthetic_as", "synthetic_lp", "constant"]
    example1 = payload["families"][0]
    assert example1["declared_modes"] == ["in-probability"]
    assert example1["horizon"] == 511
    assert payload["matrices"] == ["abel", "cesaro", "first_column_ones", "identity"]


class TestRegularity:
    def test_builtin(self, capsys: pytest.CaptureFixture):
        payload = call_json(capsys, "regularity", "--matrix", "cesaro", "--depth", "50")
        assert payload["overall"] == "regular"
        assert payload["norm_estimate_M"] == 1.0
        assert payload["conservative"] is True

    def test_not_regular(self, capsys: pytest.CaptureFixture):
        payload = call_json(capsys, "regularity", "--matrix", "first_column_ones", "--depth", "10")
        assert payload["overall"] == "not-regular"
        assert payload["condition2"]["status"] == "fails"
        assert payload["condition2"]["witness"]["j"] == 1

    def test_matrix_file(self, capsys: pytest.CaptureFixture, tmp_path):
        path = tmp_path / "matrix.json"
        path.write_text(json.dumps({"dense": [[1 / i] * i for i in range(1, 21)]}))
        payload = call_json(capsys, "regularity", "--matrix-file", str(path), "--depth", "20")
        assert payload["overall"] == "undetermined-at-depth"

    def test_inline_spec(self, capsys: pytest.CaptureFixture):
        spec = json.dumps({"dense": [[1], [0, 1]]})
        payload = call_json(capsys, "regularity", "--matrix", spec, "--depth", "2")
        assert payload["depth"] == 2

    @pytest.mark.parametrize(
        "args",
        [
            ("--matrix", "nope", "--depth", "5"),
            ("--matrix", "{broken", "--depth", "5"),
            ("--matrix", "cesaro", "--depth", "0"),
        ],
    )
    def test_config_errors(self, args):
        with pytest.raises(CommandError) as excinfo:
            management.call_command("regularity", *args)
        assert excinfo.value.returncode == 2


class TestApply:
    def test_example2_row(self, capsys: pytest.CaptureFixture):
        payload = call_json(
            capsys,
            "apply",
            "--matrix", "cesaro",
            "--family", "example2",
            "--epsilon", "1/4",
            "--row", "4",
        )
        assert payload["row"] == 4
        assert payload["breakpoints"] == ["0", "1/2^2", "1"]
        assert payload["values"][1] == "0"
        assert payload["values"][0].endswith("*inf")

    def test_guard_range(self):
        with pytest.raises(CommandError) as excinfo:
            management.call_command(
                "apply", "--matrix", "identity", "--family", "example1", "--row", "600"
            )
        assert excinfo.value.returncode == 3

    def test_uncertifiable_tail(self):
        with pytest.raises(CommandError) as excinfo:
            management.call_command(
                "apply", "--matrix", "abel", "--family", "constant", "--row", "1"
            )
        assert excinfo.value.returncode == 2


class TestProfile:
    def test_json(self, capsys: pytest.CaptureFixture):
        payload = call_json(
            capsys,
            "profile",
            "--family", "example1",
            "--mode", "in-probability",
            "--lambda", "1",
            "--start", "2",
            "--stop", "64",
        )
        assert payload["statistics"][:3] == ["1/2", "1/2", "1/4"]
        assert payload["certified"] is True
        assert payload["verdict"]["kind"] == "converges-below"
        assert payload["verdict"]["from_index"] == 32
        assert payload["mode"]["slug"] == "in-probability_lambda=1"

    def test_csv(self, capsys: pytest.CaptureFixture):
        management.call_command(
            "profile",
            "--family", "example1",
            "--mode", "in-probability",
            "--lambda", "1",
            "--start", "2",
            "--stop", "4",
            "--format", "csv",
        )
        assert capsys.readouterr().out.splitlines() == [
            "n,sequence,statistic,certified",
            "2,input,1/2,true",
            "3,input,1/2,true",
            "4,input,1/4,true",
        ]

    def test_transformed(self, capsys: pytest.CaptureFixture):
        management.call_command(
            "profile",
            "--matrix", "cesaro",
            "--family", "example2",
            "--mode", "in-probability",
            "--lambda", "1",
            "--stop", "3",
            "--format", "csv",
        )
        lines = capsys.readouterr().out.splitlines()
        assert lines[1:] == ["1,output,1/4,true", "2,output,1/4,true", "3,output,1/4,true"]

    def test_lp(self, capsys: pytest.CaptureFixture):
        payload = call_json(
            capsys,
            "profile",
            "--family", "synthetic_lp",
            "--family-param", "support_log2=3",
            "--family-param", "p=2",
            "--mode", "lp",
            "--p", "inf",
            "--stop", "4",
        )
        assert payload["mode"]["parameters"] == {"p": "inf"}
        assert payload["statistics"][0] == "2.8284271247461903"

    def test_pointwise(self, capsys: pytest.CaptureFixture):
        payload = call_json(
            capsys,
            "profile",
            "--family", "synthetic_as",
            "--decay-power", "1",
            "--mode", "ae-pointwise",
            "--omega", "1/2",
            "--stop", "100",
            "--tol", "0.02",
        )
        (report,) = payload
        assert report["omega"] == "1/2^1"
        assert report["cauchy"] is True
        assert report["converges"] is True

    def test_monte_carlo(self, capsys: pytest.CaptureFixture):
        payload = call_json(
            capsys,
            "profile",
            "--family", "example1",
            "--mode", "almost-sure",
            "--lambda", "1",
            "--window", "4",
            "--start", "2",
            "--stop", "20",
            "--monte-carlo",
            "--samples", "500",
            "--seed", "3",
        )
        assert payload["certified"] is False
        assert len(payload["half_widths"]) == 19

    @pytest.mark.parametrize(
        "args",
        [
            ("--family", "synthetic_lp", "--mode", "lp", "--p", "0.5", "--stop", "4"),
            ("--family", "example1", "--mode", "in-probability", "--stop", "4"),
            ("--family", "example1", "--family-param", "oops", "--mode", "lp", "--p", "1",
             "--stop", "4"),
        ],
    )
    def test_config_errors(self, args):
        with pytest.raises(CommandError) as excinfo:
            management.call_command("profile", *args)
        assert excinfo.value.returncode == 2

    def test_guard_range(self):
        with pytest.raises(CommandError) as excinfo:
            management.call_command(
                "profile", "--family", "example1", "--mode", "lp", "--p", "1", "--stop", "600"
            )
        assert excinfo.value.returncode == 3

    def test_almost_sure_past_dense_rows(self):
        with pytest.raises(CommandError) as excinfo:
            management.call_command(
                "profile",
                "--matrix", json.dumps({"dense": [[1], [0, 1], [0, 0, 1]]}),
                "--family", "example1",
                "--mode", "almost-sure",
                "--lambda", "1",
                "--window", "4",
                "--start", "2",
                "--stop", "6",
            )
        assert excinfo.value.returncode == 3

    def test_piece_cap(self, settings):
        settings.STOCHSUM_PIECE_CAP = 1
        with pytest.raises(CommandError) as excinfo:
            management.call_command(
                "profile",
                "--family", "example1",
                "--mode", "in-probability",
                "--lambda", "1",
                "--start", "2",
                "--stop", "4",
            )
        assert excinfo.value.returncode == 4


class TestExperiment:
    @pytest.fixture
    def config_path(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(
            json.dumps(
                {
                    "name": "example2-cesaro",
                    "matrix": {"builtin": "cesaro"},
                    "family": {"family": "example2", "epsilon": "1/4"},
                    "modes": [{"mode": "in-probability", "lambda": 1}],
                    "indices": {"start": 1, "stop": 20},
                }
            )
        )
        return path

    def test_writes_reports(self, capsys: pytest.CaptureFixture, config_path, tmp_path):
        out = tmp_path / "out"
        management.call_command("experiment", "--config", str(config_path), "--output-dir", str(out))

        written = capsys.readouterr().out.splitlines()
        assert written == [
            str(out / "report.json"),
            str(out / "profile_in-probability_lambda=1.csv"),
        ]
        payload = json.loads((out / "report.json").read_text())
        assert payload["results"][0]["preservation"] == "counterexample"

    def test_default_output_dir(self, capsys: pytest.CaptureFixture, config_path, settings):
        management.call_command("experiment", "--config", str(config_path), "--seed", "9")

        capsys.readouterr()
        payload = json.loads((settings.STOCHSUM_OUTPUT_DIR / "report.json").read_text())
        assert payload["config"]["seed"] == 9

    def test_bad_config(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"name": "empty"}))
        with pytest.raises(CommandError) as excinfo:
            management.call_command("experiment", "--config", str(path))
        assert excinfo.value.returncode == 2
