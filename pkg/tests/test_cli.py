import json

import pytest

from spikelab import cli
from spikelab.errors import BracketError


def write_config(tmp_path, **fields):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(fields))
    return path


def test_ground_state_outputs_are_reproducible(tmp_path):
    config = write_config(tmp_path, N=1, p=3, task="ground-state")
    first, second = tmp_path / "run1", tmp_path / "run2"
    assert cli.run(["ground-state", "--config", str(config), "--out", str(first)]) == 0
    assert cli.run(["ground-state", "--config", str(config), "--out", str(second)]) == 0
    for name in ("profile.csv", "profile.json", "profile_summary.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    header = json.loads((first / "profile.json").read_text())
    summary = json.loads((first / "profile_summary.json").read_text())
    assert header["config_sha256"] == summary["config_sha256"]
    assert (first / "profile.csv").read_text().startswith(f"# config_sha256={header['config_sha256']}\n")
    assert summary["alpha"] == pytest.approx(2.0**0.5, abs=1e-8)


def test_seed_changes_hash(tmp_path):
    config = write_config(tmp_path, N=1, p=3, task="ground-state")
    cli.run(["ground-state", "--config", str(config), "--out", str(tmp_path / "a")])
    cli.run(["ground-state", "--config", str(config), "--out", str(tmp_path / "b"), "--seed", "9"])
    a = json.loads((tmp_path / "a" / "profile.json").read_text())["config_sha256"]
    b = json.loads((tmp_path / "b" / "profile.json").read_text())["config_sha256"]
    assert a != b


def test_supercritical_exponent_exits_2(tmp_path, capsys):
    config = write_config(tmp_path, N=3, p=5, task="ground-state")
    assert cli.run(["ground-state", "--config", str(config)]) == 2
    err = capsys.readouterr().err
    assert "p:" in err and "(N+2)/(N-2)" in err


@pytest.mark.parametrize(
    "fields,needle",
    [
        ({"N": 3, "p": 3, "task": "verify-expansion"}, "point"),
        ({"N": 3, "p": 3, "task": "constants", "colour": "red"}, "colour"),
        ({"N": 3, "p": 3, "task": "landscape"}, "task"),
    ],
)
def test_invalid_configs_exit_2(tmp_path, capsys, fields, needle):
    config = write_config(tmp_path, **fields)
    task = "verify-expansion" if fields["task"] == "verify-expansion" else "constants"
    assert cli.run([task, "--config", str(config), "--out", str(tmp_path)]) == 2
    assert needle in capsys.readouterr().err


def test_missing_and_malformed_files_exit_2(tmp_path):
    assert cli.run(["constants", "--config", str(tmp_path / "absent.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run(["constants", "--config", str(bad)]) == 2


def test_expression_errors_exit_2(tmp_path, capsys):
    config = write_config(tmp_path, N=1, p=3, task="constants", V="1 + * x1")
    assert cli.run(["constants", "--config", str(config), "--out", str(tmp_path)]) == 2
    assert "offset 4" in capsys.readouterr().err


@pytest.mark.parametrize("field,source", [("V", "1/0"), ("V", "sqrt(x1)"), ("J", "1/x1")])
def test_undefined_fields_exit_2(tmp_path, capsys, field, source):
    config = write_config(
        tmp_path, N=1, p=3, task="constants", point=[1.0], samples={"assumptions": 500}, **{field: source}
    )
    assert cli.run(["constants", "--config", str(config), "--out", str(tmp_path / "out")]) == 2
    assert source in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise BracketError("no bracket")

    monkeypatch.setattr(cli, "solve_ground_state", fail)
    config = write_config(tmp_path, N=1, p=3, task="ground-state")
    assert cli.run(["ground-state", "--config", str(config), "--out", str(tmp_path)]) == 3


def test_constants_task(tmp_path):
    config = write_config(tmp_path, N=1, p=3, task="constants", point=[1.0], samples={"assumptions": 500})
    assert cli.run(["constants", "--config", str(config), "--out", str(tmp_path / "out")]) == 0
    payload = json.loads((tmp_path / "out" / "constants.json").read_text())
    assert payload["constants"]["c0"] == pytest.approx(2.0 / 3.0, rel=1e-8)
    assert payload["Q"]["Q"] == [1.0]
    assert "sigma_bar" in payload


def test_landscape_task_writes_table(tmp_path):
    config = write_config(
        tmp_path, N=3, p=3, task="landscape", V="1+x1^2",
        samples={"boundary": 25, "assumptions": 2000},
    )
    out = tmp_path / "out"
    assert cli.run(["landscape", "--config", str(config), "--out", str(out)]) == 0
    lines = (out / "landscape.csv").read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1] == "x1,x2,x3,H,value,gamma,sigma_bar"
    assert len(lines) == 27


def test_predict_task_reports_two_maxima(tmp_path):
    config = write_config(
        tmp_path, N=3, p=3, task="predict", V="1+x1^2",
        samples={"seeds": 40, "assumptions": 2000}, workers=2,
    )
    out = tmp_path / "out"
    assert cli.run(["predict", "--config", str(config), "--out", str(out)]) == 0
    payload = json.loads((out / "predictions.json").read_text())
    assert payload["function"] == "GAMMA"
    counted = [r for r in payload["reports"] if r["counted"]]
    assert len(counted) == 2
    assert all("Thm1a" in r["theorems"] for r in counted)
