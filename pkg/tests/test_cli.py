import json

import pytest
from click.testing import CliRunner

from artifact import __version__
from artifact.cli import ConfigError, RunConfig, main, parse_config

REPORT_KEYS = {"command", "config", "scan_file", "fit", "verdict", "runtime_s", "version"}


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def test_minimal_coulomb_fills_documented_defaults(runner, tmp_path):
    res = invoke(runner, "coulomb", "--out", str(tmp_path))
    assert res.exit_code == 0
    report = json.loads((tmp_path / "coulomb.json").read_text())
    want = RunConfig("coulomb").to_dict()
    want["out"] = str(tmp_path)
    assert report["config"] == want
    assert REPORT_KEYS <= set(report)
    assert report["version"] == __version__
    assert report["fit"]["theory"] == pytest.approx(0.1061033, rel=1e-6)
    assert report["verdict"] == "pass"
    tf = report["test_functions"]
    assert tf["eta"]["kind"] == "profile" and tf["g"]["kind"] == "switching"
    help_text = invoke(runner, "coulomb", "--help").output
    assert "[default: 0.0001]" in help_text and "[default: 7]" in help_text


def test_csv_schema_and_byte_identical_reruns(runner, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    invoke(runner, "firstorder", "--out", str(a), "--points", "5")
    invoke(runner, "firstorder", "--out", str(b), "--points", "5")
    text = (a / "firstorder.csv").read_text()
    assert text.splitlines()[0] == "eps,re,im,abs"
    assert len(text.splitlines()) == 6
    assert text == (b / "firstorder.csv").read_text()


def test_round_trip():
    cfg = parse_config({"command": "selfenergy", "c1": 0.01, "translation": [0.1, 0, 0, 0]})
    again = parse_config(cfg.to_json())
    assert again == cfg and again.to_json() == cfg.to_json()


def test_validation_lists_every_offending_field():
    with pytest.raises(ConfigError) as err:
        parse_config({"command": "coulomb", "sigma": -1.0, "points": 2, "eps_min": 0.5})
    text = str(err.value)
    for name in ("sigma", "points", "eps_min"):
        assert name in text
    with pytest.raises(ConfigError, match="colour: unknown key"):
        parse_config({"command": "coulomb", "colour": "red"})
    with pytest.raises(ConfigError, match="model"):
        parse_config({"command": "coulomb", "model": "qed"})


def test_negative_sigma_on_command_line(runner, tmp_path):
    res = runner.invoke(main, ["coulomb", "--sigma", "-1", "--switch-width", "0",
                               "--out", str(tmp_path)])
    assert res.exit_code != 0
    assert "sigma" in res.output and "switch_width" in res.output


def test_check_flag_sets_exit_code(runner, tmp_path):
    ok = runner.invoke(main, ["coulomb", "--check", "--out", str(tmp_path)])
    bad = runner.invoke(main, ["coulomb", "--check", "--eps-max", "1.0", "--eps-min", "0.3",
                               "--points", "5", "--out", str(tmp_path)])
    assert ok.exit_code == 0 and bad.exit_code != 0
    assert json.loads((tmp_path / "coulomb.json").read_text())["verdict"] == "fail"


def test_config_file_and_flag_override(runner, tmp_path):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"command": "coulomb", "points": 5, "switch_width": 2.0}))
    invoke(runner, "coulomb", "--config", str(conf), "--points", "6", "--out", str(tmp_path))
    report = json.loads((tmp_path / "coulomb.json").read_text())
    assert report["config"]["points"] == 6 and report["config"]["switch_width"] == 2.0


def test_unwritable_output_is_reported(runner, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    res = runner.invoke(main, ["coulomb", "--out", str(blocker / "sub")])
    assert res.exit_code != 0 and "cannot write" in res.output


@pytest.mark.parametrize("command", ["identities", "lojasiewicz", "dirac-checks", "currents"])
def test_check_subcommands(runner, tmp_path, command):
    res = invoke(runner, command, "--check", "--out", str(tmp_path))
    assert res.exit_code == 0
    report = json.loads((tmp_path / f"{command}.json").read_text())
    assert report["verdict"] == "pass" and REPORT_KEYS <= set(report)
