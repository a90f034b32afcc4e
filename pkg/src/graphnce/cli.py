"""Command line entry point: ``graphnce run``."""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import PRESETS, RunConfig, config_hash, load_config, parse_config, preset
from .diagnostics import verify_trajectory
from .errors import ConvergenceError, GraphNCEError, NumericalError, ValidationError
from .solver import solve_ncl

OUTPUT_ENV = "GRAPHNCE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_DIAGNOSTICS = 4


def _fail(code: int, message: str) -> int:
    print(f"graphnce: {message}", file=sys.stderr)
    return code


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _resolve_document(args) -> tuple[dict, Path | None]:
    if args.preset and args.config:
        raise ValidationError("give either a config file or --preset, not both")
    if args.preset:
        doc = preset(args.preset, args.seed)
        base = None
    elif args.config:
        doc = load_config(args.config)
        base = Path(args.config).resolve().parent
    else:
        raise ValidationError("a config file or --preset is required")
    if not isinstance(doc, dict):
        raise ValidationError("configuration must be a JSON object")
    if args.seed is not None:
        doc["seed"] = int(args.seed)
    if args.substeps is not None:
        doc.setdefault("solver", {})["substeps_per_window"] = int(args.substeps)
    return doc, base


def _output_dir(args, cfg: RunConfig) -> Path:
    out = args.out or os.environ.get(OUTPUT_ENV) or cfg.output_dir
    if not out:
        out = Path("runs") / (cfg.name or "run")
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"output directory {path} is not writable ({exc})") from exc
    if not os.access(path, os.W_OK):
        raise ValidationError(f"output directory {path} is not writable")
    return path


def run(args) -> int:
    started = time.perf_counter()
    try:
        doc, base = _resolve_document(args)
        cfg = parse_config(doc, base)
        out = _output_dir(args, cfg)
    except (GraphNCEError, ValueError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        traj = solve_ncl(cfg.graph, cfg.interpolation, cfg.velocity, cfg.rho0, cfg.solver)
    except (ConvergenceError, NumericalError) as exc:
        return _fail(EXIT_SOLVER, f"solver failed: {exc}")
    except GraphNCEError as exc:
        return _fail(EXIT_CONFIG, str(exc))

    report = verify_trajectory(
        traj, cfg.graph, cfg.interpolation,
        p_list=cfg.diagnostics.p_list,
        tolerances=cfg.diagnostics.tolerances,
        lp_constants=cfg.diagnostics.lp_constants,
    )
    hard = {k: v for k, v in cfg.diagnostics.hard.items() if v}
    failed = sorted(k for k in hard if not report.flags.get(k, True))

    (out / "trajectory.csv").write_text(traj.to_csv())
    meta = traj.metadata()
    meta.update({
        "graph": {"n": cfg.graph.n, "d": cfg.graph.d, "edges": cfg.graph.m, "fingerprint": cfg.graph.fingerprint()},
        "interpolation": cfg.interpolation.to_json(),
        "velocity": cfg.velocity.kind,
        "solver": cfg.solver.to_json(),
    })
    _write_json(out / "metadata.json", meta)
    diag = report.to_json()
    diag["hard"] = sorted(hard)
    diag["hard_failures"] = failed
    _write_json(out / "diagnostics.json", diag)
    _write_json(out / "manifest.json", {
        "config_hash": config_hash(doc),
        "preset": args.preset,
        "versions": {
            "graphnce": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_seconds": time.perf_counter() - started,
        "files": ["trajectory.csv", "metadata.json", "diagnostics.json"],
    })
    if failed:
        return _fail(EXIT_DIAGNOSTICS, f"hard diagnostics failed: {', '.join(failed)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphnce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="solve one configuration and verify it")
    p.add_argument("config", nargs="?", help="path to a JSON run configuration")
    p.add_argument("--out", help=f"output directory (overrides ${OUTPUT_ENV} and the config)")
    p.add_argument("--preset", help=f"named scenario: {', '.join(PRESETS)}")
    p.add_argument("--substeps", type=int, help="trapezoid substeps per Picard window")
    p.add_argument("--seed", type=int, help="seed for generated graphs and densities")
    sub.add_parser("presets", help="list the named scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(PRESETS))
        return EXIT_OK
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
