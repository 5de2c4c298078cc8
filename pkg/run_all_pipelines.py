# run_all_pipelines.py

"""
Run one scenario from a config file, or every checked-in config under configs/.

    python run_all_pipelines.py --config configs/simulate.ini [--out DIR] [--threads K] [--verbose]
    python run_all_pipelines.py --list
    python run_all_pipelines.py            # all configs/*.ini in registry order

Exit codes: 0 all checks passed, 2 a check failed, 1 configuration or runtime error.
"""

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

BASE_DIR = Path(__file__).resolve().parent
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from pipelines.sweep import resolve_runner
from utils.config import SCENARIOS, load_config
from utils.errors import HyperlabError
from utils.fetch import write_json

CONFIG_DIR = BASE_DIR / "configs"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2


def list_scenarios() -> str:
    return "\n".join(SCENARIOS)


def run(config_path, out: Optional[str] = None, threads: Optional[int] = None, env=None) -> int:
    """Execute the scenario named in config_path and write run_summary.json."""
    try:
        cfg = load_config(config_path, env=env)
        if out is not None:
            cfg = replace(cfg, output_dir=Path(out).resolve())
        if threads is not None:
            cfg = replace(cfg, threads=int(threads))
        runner = resolve_runner(cfg.scenario)
        started = time.perf_counter()
        summary = runner(cfg)
        elapsed = time.perf_counter() - started
        body = dict(summary)
        body["config"] = cfg.to_dict()
        body["timing"] = {"seconds": round(elapsed, 3)}
        write_json(body, "run_summary.json", cfg.output_dir)
    except (HyperlabError, OSError, ValueError) as e:
        print(f"✖ {config_path}: {type(e).__name__}: {e}")
        return EXIT_ERROR

    failed = [c.get("check", "?") for c in summary["checks"] if not c.get("pass", True)]
    if failed:
        print(f"✖ {cfg.scenario} failed {len(failed)} check(s): {', '.join(failed)}")
        return EXIT_FAILED
    print(f"✔ {cfg.scenario} completed in {elapsed:.1f}s ({len(summary['checks'])} checks).")
    return EXIT_OK


def checked_in_configs() -> List[Path]:
    """configs/<scenario>.ini for each registered scenario that has one."""
    names = [s.replace("-", "_") + ".ini" for s in SCENARIOS]
    return [CONFIG_DIR / n for n in names if (CONFIG_DIR / n).exists()]


def run_all(out: Optional[str] = None, threads: Optional[int] = None) -> int:
    print("=" * 60)
    print(" Radial NLS laboratory – scenario run")
    print("=" * 60)
    worst = EXIT_OK
    for path in checked_in_configs():
        print(f"\n=== Running {path.relative_to(BASE_DIR)} ===")
        rc = run(path, out=out, threads=threads)
        # an error outranks a failed check
        worst = EXIT_ERROR if EXIT_ERROR in (rc, worst) else max(worst, rc)
    if worst == EXIT_OK:
        print("\nAll scenarios finished successfully.")
    else:
        print(f"\nCompleted with exit code {worst}.")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Radial NLS laboratory on hyperbolic 3-space")
    parser.add_argument("--config", type=str, default=None, help="INI config naming the scenario to run")
    parser.add_argument("--out", type=str, default=None, help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for sweep fan-out")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--list", action="store_true", help="print the scenario registry and exit")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list:
        print(list_scenarios())
        return EXIT_OK
    if args.threads is not None and args.threads < 1:
        print("✖ --threads must be >= 1")
        return EXIT_ERROR
    if args.config is None:
        return run_all(args.out, args.threads)
    return run(args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
