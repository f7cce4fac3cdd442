"""Tests for the manifest batch checker in scripts/."""

import importlib.util
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from qpvlab.bloch import X_PLUS, Z_PLUS
from qpvlab.hmc import ChannelShape, HiddenMeasurementInstance, copy_isometry, dump_instance

SCRIPT = Path(__file__).parent.parent / "scripts" / "batch_check_hidden.py"


@pytest.fixture(scope="module")
def batch():
    spec = importlib.util.spec_from_file_location("batch_check_hidden", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture
def manifest(tmp_path):
    (tmp_path / "instances").mkdir()
    for name, P in (("hidden", Z_PLUS), ("visible", X_PLUS)):
        instance = HiddenMeasurementInstance(U=copy_isometry(Z_PLUS), shape=ChannelShape(1, 2, 2), w=np.ones(1), P=P)
        (tmp_path / "instances" / f"{name}.json").write_text(json.dumps(dump_instance(instance)))
    (tmp_path / "instances" / "broken.json").write_text("{\"U\": ")

    path = tmp_path / "manifest.csv"
    pd.DataFrame({
        "id": ["a", "b", "c", "d"],
        "path": ["instances/hidden.json", "instances/visible.json", "instances/broken.json", "instances/absent.json"],
    }).to_csv(path, index=False)
    return path


def test_process_manifest(batch, manifest, tmp_path):
    """Each manifest row yields either a verdict or an error message."""
    output = tmp_path / "verdicts.csv"
    assert batch.process_manifest(str(manifest), str(output))

    df = pd.read_csv(output)
    assert list(df.columns) == batch.COLUMNS
    assert len(df) == 4
    rows = df.set_index("id")
    assert bool(rows.loc["a", "is_hidden"]) is True
    assert bool(rows.loc["a", "agree"]) is True
    assert rows.loc["a", "dist_v1"] == pytest.approx(1.0)
    assert bool(rows.loc["b", "is_hidden"]) is False
    assert pd.isna(rows.loc["a", "error"])
    for broken in ("c", "d"):
        assert pd.isna(rows.loc[broken, "is_hidden"])
        assert isinstance(rows.loc[broken, "error"], str)


def test_process_manifest_missing_input(batch, tmp_path):
    """A missing manifest fails without raising."""
    assert not batch.process_manifest(str(tmp_path / "nope.csv"), str(tmp_path / "out.csv"))


def test_process_manifest_missing_columns(batch, tmp_path):
    """A manifest without the required columns is rejected."""
    path = tmp_path / "manifest.csv"
    pd.DataFrame({"name": ["a"], "file": ["x.json"]}).to_csv(path, index=False)
    assert not batch.process_manifest(str(path), str(tmp_path / "out.csv"))
    assert not (tmp_path / "out.csv").exists()


def test_validate_files(batch, manifest, tmp_path):
    """The output directory must exist before a run."""
    assert batch.validate_files(str(manifest), str(tmp_path / "out.csv")) == (True, None)
    ok, error = batch.validate_files(str(manifest), str(tmp_path / "missing_dir" / "out.csv"))
    assert not ok and "Output directory" in error
