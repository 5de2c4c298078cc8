import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure project root is on sys.path so utils and pipelines import correctly
BASE_DIR = Path(__file__).resolve().parents[1]
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from utils.config import default_config
from utils.field import gaussian
from utils.grid import Geometry, RadialGrid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid():
    """Small hyperbolic grid: fast, and wide enough for unit bumps over t <= 1."""
    return RadialGrid(20.0, 512)


@pytest.fixture
def fine_grid():
    return RadialGrid(20.0, 2048)


@pytest.fixture
def bump(grid):
    return gaussian(grid, Geometry.HYPERBOLIC, amplitude=0.5)


@pytest.fixture
def euclid_bump(grid):
    return gaussian(grid, Geometry.EUCLIDEAN, amplitude=0.5)


@pytest.fixture
def small_config(tmp_path):
    """Factory for scenario configs on small grids writing into tmp_path."""
    def make(scenario, **changes):
        values = dict(r_max=20.0, n=512, output_dir=tmp_path, baseline=str(tmp_path / "baseline.json"))
        values.update(changes)
        return default_config(scenario, **values)
    return make
