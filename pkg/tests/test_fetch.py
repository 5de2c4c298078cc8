from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from utils.fetch import (
    load_json,
    load_manifest,
    load_processed_csv,
    load_snapshot,
    save_field_csv,
    save_snapshot,
    scenario_summary,
    try_load_csv,
    write_csv,
    write_json,
    write_manifest,
)
from utils.grid import Geometry
from utils.radial_transform import schrodinger_flow


def test_csv_tables(tmp_path):
    df = pd.DataFrame({"t": [0.0, 0.5], "mass": [1.0, 1.0 + 1e-13]})
    path = write_csv(df, "diag.csv", tmp_path / "out")
    assert path.exists()
    back = load_processed_csv("diag.csv", tmp_path / "out")
    np.testing.assert_allclose(back["mass"], df["mass"], rtol=1e-11)
    with pytest.raises(FileNotFoundError):
        load_processed_csv("missing.csv", tmp_path)
    assert try_load_csv("missing.csv", tmp_path).empty


def test_json_handles_numpy_and_paths(tmp_path):
    payload = {"x": np.float64(1.5), "n": np.int64(3), "ok": np.bool_(True), "arr": np.arange(3),
               "path": Path("a/b"), "geometry": Geometry.EUCLIDEAN}
    body = load_json(write_json(payload, "s.json", tmp_path))
    assert body["schema_version"] == 1
    assert body["x"] == 1.5 and body["n"] == 3 and body["ok"] is True
    assert body["arr"] == [0, 1, 2] and body["path"] == "a/b" and body["geometry"] == "euclidean"


def test_snapshot_is_lossless(tmp_path, bump):
    f = schrodinger_flow(0.3, bump)
    g = load_snapshot(save_snapshot(f, tmp_path / "snap.npz"))
    assert g.grid.matches(f.grid) and g.geometry is f.geometry
    np.testing.assert_array_equal(g.h, f.h)


def test_field_csv(tmp_path, bump):
    df = pd.read_csv(save_field_csv(bump, "f.csv", tmp_path))
    assert list(df.columns) == ["r", "re_u", "im_u"]
    assert len(df) == bump.grid.n


def test_manifest(tmp_path, bump, euclid_bump):
    path = write_manifest([bump, euclid_bump], tmp_path / "seq" / "manifest.json")
    seq = load_manifest(path)
    assert [f.geometry for f in seq] == [Geometry.HYPERBOLIC, Geometry.EUCLIDEAN]
    np.testing.assert_array_equal(seq[1].h, euclid_bump.h)


def test_scenario_summary():
    checks = [{"check": "a", "pass": True}, {"check": "b", "pass": False}]
    body = scenario_summary("demo", checks, [Path("/x/z.csv"), "/y/a.json"], extra=1)
    assert body["pass"] is False
    assert body["outputs"] == ["a.json", "z.csv"]
    assert body["extra"] == 1
    assert scenario_summary("demo", [])["pass"] is True
