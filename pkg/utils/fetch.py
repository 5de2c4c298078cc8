"""
Reading and writing results under data/processed (or a run's output dir):
CSV tables, JSON summaries, and field snapshots.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd

from utils.config import DEFAULT_OUTPUT_DIR, SCHEMA_VERSION
from utils.grid import Geometry, RadialField, RadialGrid


def _dir(out_dir):
    path = Path(out_dir) if out_dir is not None else DEFAULT_OUTPUT_DIR
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------
# Tables
# ---------------------------------------------------------
def load_processed_csv(filename, out_dir=None):
    base = Path(out_dir) if out_dir is not None else DEFAULT_OUTPUT_DIR
    path = base / filename
    if not path.exists():
        raise FileNotFoundError(f"{filename} not found in {base}. Run the matching scenario first.")
    return pd.read_csv(path)


def try_load_csv(filename, out_dir=None):
    try:
        return load_processed_csv(filename, out_dir)
    except (OSError, pd.errors.ParserError) as e:
        print(f"Error loading {filename}: {e}")
        return pd.DataFrame()


def write_csv(df, filename, out_dir=None):
    path = _dir(out_dir) / filename
    # fixed float format keeps reruns byte-identical
    df.to_csv(path, index=False, float_format="%.12e")
    return path


# ---------------------------------------------------------
# JSON summaries
# ---------------------------------------------------------
def _to_builtin(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_to_builtin, allow_nan=True) + "\n"


def write_json(payload, filename, out_dir=None):
    body = {"schema_version": SCHEMA_VERSION}
    body.update(payload)
    path = _dir(out_dir) / filename
    path.write_text(dumps(body), encoding="utf-8")
    return path


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------
# Field snapshots
# ---------------------------------------------------------
def field_frame(f: RadialField) -> pd.DataFrame:
    u = f.u
    return pd.DataFrame({"r": f.r, "re_u": u.real, "im_u": u.imag})


def save_field_csv(f, filename, out_dir=None):
    return write_csv(field_frame(f), filename, out_dir)


def save_snapshot(f: RadialField, path):
    """Lossless .npz snapshot: the h-profile plus the grid and geometry tags."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, h=f.h, r_max=f.grid.r_max, n=f.grid.n, geometry=f.geometry.value)
    return path


def load_snapshot(path) -> RadialField:
    with np.load(Path(path), allow_pickle=False) as data:
        grid = RadialGrid(float(data["r_max"]), int(data["n"]))
        return RadialField(grid, Geometry(str(data["geometry"])), data["h"])


def load_manifest(path) -> list:
    """A sequence manifest is JSON {"snapshots": [...]} with paths relative to the manifest."""
    path = Path(path)
    manifest = load_json(path)
    return [load_snapshot(path.parent / p) for p in manifest["snapshots"]]


def write_manifest(fields, path, stem="element"):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = []
    for k, f in enumerate(fields):
        name = f"{stem}_{k:03d}.npz"
        save_snapshot(f, path.parent / name)
        names.append(name)
    path.write_text(dumps({"snapshots": names}), encoding="utf-8")
    return path


# ---------------------------------------------------------
# Scenario summaries
# ---------------------------------------------------------
def scenario_summary(scenario, checks, outputs=(), **extra):
    """The JSON body every scenario returns; pass is the conjunction of its checks."""
    body = {
        "scenario": scenario,
        "checks": list(checks),
        "outputs": sorted(Path(p).name for p in outputs),
        "pass": all(bool(c.get("pass", True)) for c in checks),
    }
    body.update(extra)
    return body
