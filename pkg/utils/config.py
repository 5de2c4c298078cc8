"""
Run configuration: INI files with [run], [grid], [time], [data],
[diagnostics] and [scenario] sections, overridable from the environment.

Environment overrides (a .env file is honoured through load_dotenv):
    HYPERLAB_<SECTION>__<KEY>   e.g. HYPERLAB_GRID__N=8192
    HYPERLAB_OUTPUT_DIR         output directory
"""

import configparser
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from dotenv import load_dotenv

from utils.errors import ConfigParseError, ScenarioUnknown
from utils.field import DATA_FAMILIES, initial_data
from utils.grid import Geometry, RadialField, RadialGrid
from utils.propagator import SolverConfig

load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_OUTPUT_DIR = PROJECT_ROOT / "data" / "processed"
ENV_PREFIX = "HYPERLAB_"
SCHEMA_VERSION = 1

# registry order is the listing order of the CLI
SCENARIOS = (
    "simulate",
    "transform-selftest",
    "dispersive-test",
    "morawetz-test",
    "sobolev-test",
    "euclid-compare",
    "profile-extract",
    "sweep",
)

_SCHEMA = {
    "run": {"scenario": str, "geometry": str, "seed": int, "output_dir": str, "threads": int},
    "grid": {"r_max": float, "n": int},
    "time": {"dt": float, "t_end": float, "record_every": int, "boundary_tolerance": float},
    "data": {"family": str, "amplitude": float, "scale": float, "width": float, "center": float},
    "diagnostics": {"energy": bool, "morawetz": bool, "strichartz": bool, "morawetz_n": float,
                    "baseline": str},
}

# configparser lowercases keys; RunConfig field names that differ
_FIELD_NAMES = {"morawetz_n": "morawetz_N"}

# [scenario] holds free-form keys typed by each scenario's defaults
FREE_SECTIONS = ("scenario",)


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    geometry: Geometry = Geometry.HYPERBOLIC
    seed: int = 0
    output_dir: Path = DEFAULT_OUTPUT_DIR
    threads: int = 1
    r_max: float = 30.0
    n: int = 2048
    dt: float = 1e-3
    t_end: float = 1.0
    record_every: int = 10
    boundary_tolerance: float = 1e-8
    family: str = "gaussian"
    amplitude: float = 1.0
    scale: float = 1.0
    width: float = 1.0
    center: float = 0.0
    energy: bool = True
    morawetz: bool = True
    strichartz: bool = True
    morawetz_N: float = 1.0
    baseline: str = "configs/baseline.json"
    params: Mapping[str, str] = field(default_factory=dict)
    source: Optional[Path] = None

    # -----------------------------------------------------
    # Derived objects
    # -----------------------------------------------------
    def grid(self) -> RadialGrid:
        return RadialGrid(self.r_max, self.n)

    def solver_config(self, **changes) -> SolverConfig:
        values = dict(dt=self.dt, t_end=self.t_end, geometry=self.geometry, r_max=self.r_max, n=self.n,
                      record_every=self.record_every, boundary_tolerance=self.boundary_tolerance,
                      morawetz_N=self.morawetz_N)
        values.update(changes)
        return SolverConfig(**values)

    def initial_data(self, geometry: Optional[Geometry] = None, grid: Optional[RadialGrid] = None) -> RadialField:
        return initial_data(grid or self.grid(), geometry or self.geometry, self.family,
                            self.amplitude, self.scale, self.width, self.center)

    def baseline_path(self) -> Path:
        p = Path(self.baseline)
        return p if p.is_absolute() else PROJECT_ROOT / p

    def scenario_params(self, defaults: Mapping[str, Any]) -> Dict[str, Any]:
        """Merge [scenario] over defaults, typed by the default values (keys match case-insensitively)."""
        names = {k.lower(): k for k in defaults}
        unknown = sorted(k for k in self.params if k.lower() not in names)
        if unknown:
            raise ConfigParseError(f"unknown [scenario] keys for {self.scenario}: {', '.join(unknown)}")
        out = dict(defaults)
        for key, raw in self.params.items():
            name = names[key.lower()]
            out[name] = _coerce_like(defaults[name], raw, f"scenario.{key}")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["geometry"] = self.geometry.value
        d["output_dir"] = str(self.output_dir)
        d["source"] = None if self.source is None else str(self.source)
        d["params"] = dict(self.params)
        return d


# ---------------------------------------------------------
# Parsing
# ---------------------------------------------------------
def _parse_bool(raw: str, where: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigParseError(f"{where}: expected a boolean, got '{raw}'")


def _coerce(kind: type, raw: str, where: str):
    try:
        if kind is bool:
            return _parse_bool(raw, where)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError as e:
        raise ConfigParseError(f"{where}: cannot read '{raw}' as {kind.__name__}") from e


def _coerce_like(default: Any, raw: Any, where: str):
    if not isinstance(raw, str):
        return raw
    if isinstance(default, bool):
        return _parse_bool(raw, where)
    if isinstance(default, (list, tuple)):
        item = type(default[0]) if default else float
        return [_coerce(item, part, where) for part in raw.replace(",", " ").split()]
    if isinstance(default, (int, float, str)):
        return _coerce(type(default), raw, where)
    return raw


def _env_overrides(env: Mapping[str, str]) -> Dict[str, Dict[str, str]]:
    out = {}
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        section, key = name[len(ENV_PREFIX):].split("__", 1)
        out.setdefault(section.lower(), {})[key.lower()] = value
    return out


def parse_config(text: str, env: Optional[Mapping[str, str]] = None, source: Optional[Path] = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigParseError(f"malformed config: {e}") from e

    env = os.environ if env is None else env
    sections = {s: dict(parser.items(s)) for s in parser.sections()}
    for section, values in _env_overrides(env).items():
        sections.setdefault(section, {}).update(values)

    values, params = {}, {}
    for section, items in sections.items():
        if section in FREE_SECTIONS:
            params.update(items)
            continue
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ConfigParseError(f"unknown section [{section}]")
        for key, raw in items.items():
            if key not in schema:
                raise ConfigParseError(f"unknown key '{key}' in [{section}]")
            values[_FIELD_NAMES.get(key, key)] = _coerce(schema[key], raw, f"{section}.{key}")

    if "scenario" not in values:
        raise ConfigParseError("[run] scenario is required")
    if env.get(ENV_PREFIX + "OUTPUT_DIR"):
        values["output_dir"] = env[ENV_PREFIX + "OUTPUT_DIR"]
    if "output_dir" in values:
        out = Path(values["output_dir"])
        values["output_dir"] = out if out.is_absolute() else PROJECT_ROOT / out
    if "geometry" in values:
        try:
            values["geometry"] = Geometry(values["geometry"].lower())
        except ValueError as e:
            raise ConfigParseError(f"run.geometry: unknown geometry '{values['geometry']}'") from e

    cfg = RunConfig(params=params, source=source, **values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.scenario not in SCENARIOS:
        raise ScenarioUnknown(f"unknown scenario '{cfg.scenario}' (known: {', '.join(SCENARIOS)})")
    checks = [
        (cfg.dt > 0, f"time.dt must be positive, got {cfg.dt}"),
        (cfg.t_end >= 0, f"time.t_end must be non-negative, got {cfg.t_end}"),
        (cfg.n >= 16, f"grid.n must be >= 16, got {cfg.n}"),
        (cfg.r_max > 0, f"grid.r_max must be positive, got {cfg.r_max}"),
        (cfg.record_every >= 1, f"time.record_every must be >= 1, got {cfg.record_every}"),
        (cfg.boundary_tolerance > 0, "time.boundary_tolerance must be positive"),
        (cfg.threads >= 1, f"run.threads must be >= 1, got {cfg.threads}"),
        (cfg.morawetz_N >= 1, f"diagnostics.morawetz_N must be >= 1, got {cfg.morawetz_N}"),
        (cfg.family in DATA_FAMILIES, f"data.family must be one of {DATA_FAMILIES}, got '{cfg.family}'"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigParseError(message)


def load_config(path, env: Optional[Mapping[str, str]] = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(f"cannot read config {path}: {e}") from e
    return parse_config(text, env=env, source=path)


def default_config(scenario: str, **changes) -> RunConfig:
    """Built-in defaults for a scenario (used by the pipelines' __main__ blocks)."""
    if "geometry" in changes:
        changes["geometry"] = Geometry(changes["geometry"])
    if "output_dir" in changes:
        changes["output_dir"] = Path(changes["output_dir"])
    cfg = RunConfig(scenario=scenario, **changes)
    validate(cfg)
    return cfg
