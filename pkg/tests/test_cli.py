"""Integration tests for the qpvlab command line."""

import json

import numpy as np
import pandas as pd
import pytest

from qpvlab.bloch import X_PLUS, Z_PLUS
from qpvlab.cli import EXIT_INPUT, EXIT_OK, EXIT_PROPERTY, main
from qpvlab.hmc import ChannelShape, HiddenMeasurementInstance, copy_isometry, dump_instance
from qpvlab.utils import canonical_payload


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def copy_files(tmp_path):
    """Instance files for the copy map checked against Z (hidden) and X (not hidden)."""
    paths = {}
    for name, P in (("z", Z_PLUS), ("x", X_PLUS)):
        instance = HiddenMeasurementInstance(U=copy_isometry(Z_PLUS), shape=ChannelShape(1, 2, 2), w=np.ones(1), P=P)
        paths[name] = write_json(tmp_path / f"copy_{name}.json", dump_instance(instance))
    return paths


def test_bound(capsys):
    """The bound command prints 4 * 7^(2n + 2)."""
    assert main(["bound", "1"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "9604"
    assert main(["bound", "0"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "196"


@pytest.mark.parametrize("argv", [["bound", "-1"], ["bound", "x"], ["simulate", "--bogus"], []])
def test_usage_errors_exit_with_one(argv):
    """Argument errors exit with the input-error status."""
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_INPUT


def test_check_hidden(copy_files, capsys):
    """check-hidden exits 0 for a hidden instance and 2 otherwise."""
    assert main(["check-hidden", copy_files["z"]]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "check-hidden"
    assert report["payload"]["is_hidden"] is True
    assert set(report["payload"]["verdicts"]) == {"definition1", "xy_equations", "block_equations"}

    assert main(["check-hidden", copy_files["x"]]) == EXIT_PROPERTY
    assert json.loads(capsys.readouterr().out)["payload"]["is_hidden"] is False


def test_check_hidden_bad_input(tmp_path, copy_files, capsys):
    """Truncated, incomplete and missing instance files are input errors."""
    truncated = tmp_path / "truncated.json"
    truncated.write_text(open(copy_files["z"]).read()[:40], encoding="utf-8")
    assert main(["check-hidden", str(truncated)]) == EXIT_INPUT

    data = json.loads(open(copy_files["z"]).read())
    del data["U"]
    assert main(["check-hidden", write_json(tmp_path / "no_u.json", data)]) == EXIT_INPUT
    assert "U" in capsys.readouterr().err

    assert main(["check-hidden", str(tmp_path / "missing.json")]) == EXIT_INPUT


def test_verify_attack(capsys):
    """The EPR attack is verified perfect for both values of z."""
    assert main(["verify-attack"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)["payload"]
    assert payload["verified"] is True
    for per_z in payload["acceptance_per_z"].values():
        assert min(per_z.values()) >= 1 - 1e-9


def test_verify_attack_outside_its_basis_set(capsys):
    """A basis the attack does not cover is named in the error."""
    argv = ["verify-attack", "--basis", "bloch:0,0,1", "--basis", "bloch:1,0,0", "--basis", "bloch:0,1,0"]
    assert main(argv) == EXIT_INPUT
    assert "bloch:0,1,0" in capsys.readouterr().err


def test_simulate_honest(capsys):
    """An honest prover is accepted on every run."""
    assert main(["simulate", "--runs", "100", "--seed", "3"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["payload"]["accepted"] == 100
    assert len(report["payload"]["runs"]) == 100
    assert report["config"]["adversary"] == "honest"


def test_simulate_bb84_adversary(capsys):
    """The built-in attack is accepted on every Z/X run."""
    assert main(["simulate", "--runs", "20", "--adversary", "bb84"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["payload"]["accepted"] == 20


def test_simulate_is_deterministic(tmp_path):
    """Same seed, same report apart from the timestamp."""
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", "--runs", "10", "--seed", "11", "-o", str(first)]) == EXIT_OK
    assert main(["simulate", "--runs", "10", "--seed", "11", "-o", str(second)]) == EXIT_OK
    assert canonical_payload(first.read_text()) == canonical_payload(second.read_text())


def rerun_from_embedded_config(tmp_path, argv, name):
    """Run ``argv``, then again with only the report's own config; return both reports."""
    first = tmp_path / f"{name}_first.json"
    code = main(argv + ["-o", str(first)])
    embedded = json.loads(first.read_text())["config"]
    second = tmp_path / f"{name}_second.json"
    config = write_json(tmp_path / f"{name}_config.json", embedded)
    assert main([argv[0], "--config", config, "-o", str(second)]) == code
    return first.read_text(), second.read_text()


def test_simulate_reproduces_from_embedded_config(tmp_path):
    """Seed, run count and adversary all travel in the embedded config."""
    first, second = rerun_from_embedded_config(
        tmp_path, ["simulate", "--runs", "7", "--seed", "9", "--adversary", "bb84"], "simulate"
    )
    assert canonical_payload(first) == canonical_payload(second)
    report = json.loads(second)
    assert report["seed"] == 9
    assert report["payload"]["accepted"] == 7
    assert report["config"]["adversary"] == "bb84"


def test_config_file_seed_used_when_flag_omitted(tmp_path):
    """A seed given only in the config file drives the run."""
    config = write_json(tmp_path / "config.json", {"seed": 13, "runs": 5})
    from_file, from_flags = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", "--config", config, "-o", str(from_file)]) == EXIT_OK
    assert main(["simulate", "--runs", "5", "--seed", "13", "-o", str(from_flags)]) == EXIT_OK
    assert canonical_payload(from_file.read_text()) == canonical_payload(from_flags.read_text())


def test_verify_attack_reproduces_from_embedded_config(tmp_path):
    """The timeline seed travels in the embedded config."""
    first, second = rerun_from_embedded_config(tmp_path, ["verify-attack", "--seed", "4"], "verify")
    assert canonical_payload(first) == canonical_payload(second)
    assert json.loads(second)["config"]["seed"] == 4


def test_search_reproduces_from_embedded_config(tmp_path):
    """Search settings and seed travel in the embedded config."""
    config = write_json(tmp_path / "search.json", {
        "basis_set": ["bloch:0,0,1", "bloch:1,0,0"],
        "dims": [2, 2, 2, 2],
        "restarts": 2,
        "max_iters": 3,
        "inject_known": False,
    })
    first, second = rerun_from_embedded_config(tmp_path, ["search", "--config", config, "--seed", "5"], "search")
    assert canonical_payload(first) == canonical_payload(second)
    assert json.loads(second)["config"]["seed"] == 5



def test_simulate_rejects_bad_config(tmp_path):
    """An adversary outside the verifiers is an input error."""
    path = write_json(tmp_path / "config.json", {"d": 1.0, "h": 3.0})
    assert main(["simulate", "--config", path]) == EXIT_INPUT


def test_search_writes_plot_data(tmp_path, capsys):
    """The search logs each restart and writes a monotone best-so-far CSV."""
    config = write_json(tmp_path / "search.json", {
        "basis_set": ["bloch:0,0,1"],
        "dims": [2, 2, 2, 2],
        "restarts": 2,
        "max_iters": 5,
    })
    csv_path = tmp_path / "trace.csv"
    assert main(["search", "--config", config, "--csv", str(csv_path)]) == EXIT_OK
    captured = capsys.readouterr()
    assert "restart 0 value" in captured.err
    assert json.loads(captured.out)["payload"]["certified_perfect"] is True

    df = pd.read_csv(csv_path)
    assert {"restart", "seed", "start", "value", "best_so_far"} <= set(df.columns)
    assert df["best_so_far"].is_monotonic_increasing


def test_lambda_scan_builtin_channels(capsys):
    """Built-in channels give Lambda pairs, no angle violations and the component bound."""
    assert main(["lambda-scan", "--channel", "bb84", "--attempts", "0"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)["payload"]
    assert len(payload["pairs"]) == 2
    assert payload["scan"]["violations"] == 0
    assert payload["census"] == 2

    assert main(["lambda-scan", "--channel", "copy", "--attempts", "2"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)["payload"]
    assert payload["component_bound"] == 9604


def test_lambda_scan_from_instance(copy_files, capsys):
    """An instance file supplies the channel for the Lambda scan."""
    assert main(["lambda-scan", "--instance", copy_files["z"], "--attempts", "0"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["payload"]["pairs"]) == 1


def test_lambda_scan_needs_a_source():
    """--channel and --instance are mutually exclusive."""
    with pytest.raises(SystemExit) as exc:
        main(["lambda-scan", "--channel", "copy", "--instance", "x.json"])
    assert exc.value.code == EXIT_INPUT


def test_dimension_cap_from_environment(monkeypatch):
    """QPVLAB_DIM_CAP below the attack's dimensions is an input error."""
    monkeypatch.setenv("QPVLAB_DIM_CAP", "8")
    assert main(["verify-attack"]) == EXIT_INPUT


def test_invalid_environment_is_an_input_error(monkeypatch, capsys):
    """A malformed setting is reported by name."""
    monkeypatch.setenv("QPVLAB_DIM_CAP", "lots")
    assert main(["bound", "1"]) == EXIT_INPUT
    assert "QPVLAB_DIM_CAP" in capsys.readouterr().err
