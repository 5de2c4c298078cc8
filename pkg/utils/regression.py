import json
from pathlib import Path
from typing import Dict

from utils.config import SCHEMA_VERSION

# a fitted constant may grow at most this much against its baseline
GROWTH_FACTOR = 2.0


# ---------------------------------------------------------
# Baseline file
# ---------------------------------------------------------
def load_baseline(path) -> Dict[str, float]:
    """
    Read the frozen constants from a baseline JSON file.
    A missing file is an empty baseline.
    """
    path = Path(path)
    if not path.exists():
        return {}
    data = json.loads(path.read_text(encoding="utf-8"))
    return {k: float(v) for k, v in data.get("constants", {}).items()}


def save_baseline(path, constants) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"schema_version": SCHEMA_VERSION,
            "constants": {k: float(constants[k]) for k in sorted(constants)}}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def frozen_constant(path, name):
    return load_baseline(path).get(name)


# ---------------------------------------------------------
# Gate
# ---------------------------------------------------------
def regression_gate(constants, path, factor=GROWTH_FACTOR, freeze=True) -> dict:
    """
    Compare fitted constants against the baseline.

    Constants not yet in the baseline are frozen on this run (when freeze is set).
    A constant fails when it exceeds factor times its baseline value.
    """
    baseline = load_baseline(path)
    new = {k: float(v) for k, v in constants.items() if k not in baseline and v is not None}
    if freeze and new:
        merged = dict(baseline)
        merged.update(new)
        save_baseline(path, merged)

    failures = {}
    for name, value in constants.items():
        ref = baseline.get(name)
        if ref is None or value is None:
            continue
        if ref > 0 and value > factor * ref:
            failures[name] = {"value": float(value), "baseline": ref}

    return {
        "check": "regression",
        "frozen": sorted(new),
        "failures": failures,
        "factor": factor,
        "pass": not failures,
    }
