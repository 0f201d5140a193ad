"""Command line front end: run verification suites from a JSON config.

Exit codes: 0 all checks passed, 1 a check failed or a solver gave up,
2 the config could not be read or validated.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .bundle import ModelParams
from .experiments import EXPERIMENT_KINDS, REGISTRY, run_experiment

__all__ = ["main", "load_config", "run_from_config", "ConfigError"]


class ConfigError(Exception):
    """Invalid experiment configuration."""


_RANDOMIZED = set(REGISTRY)  # every suite draws probes


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "model" not in cfg:
        raise ConfigError("config needs a 'model' section")
    try:
        ModelParams.from_dict(cfg["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model section: {exc}") from exc
    kind = cfg.get("experiment", "all")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"unknown experiment {kind!r}; choose from {', '.join(EXPERIMENT_KINDS)}")
    wanted = list(REGISTRY) if kind == "all" else [kind]
    if any(name in _RANDOMIZED for name in wanted) and "seed" not in cfg:
        raise ConfigError("randomized suites require a 'seed'")
    if "seed" in cfg and not isinstance(cfg["seed"], int):
        raise ConfigError("'seed' must be an integer")
    if "tol_scale" in cfg:
        ts = cfg["tol_scale"]
        if not isinstance(ts, (int, float)) or ts <= 0:
            raise ConfigError("'tol_scale' must be a positive number")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object keyed by experiment")
    for name, sub in params.items():
        if not isinstance(sub, dict):
            raise ConfigError(f"params for {name!r} must be an object")
        for key, val in sub.items():
            if key.startswith("tol") and not (isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"tolerance {name}.{key} must be positive")


def run_from_config(cfg: dict, out_dir: Path | None, seed: int | None = None,
                    tol_scale: float | None = None) -> dict:
    """Execute the configured suites and assemble the report structure."""
    model_params = ModelParams.from_dict(cfg["model"])
    kind = cfg.get("experiment", "all")
    names = list(REGISTRY) if kind == "all" else [kind]
    seed = cfg.get("seed", 0) if seed is None else seed
    tol_scale = float(cfg.get("tol_scale", 1.0)) if tol_scale is None else tol_scale
    params = cfg.get("params", {})

    report = {
        "version": __version__,
        "seed": seed,
        "tol_scale": tol_scale,
        "experiments": {},
        "passed": True,
        "timing": {},
    }
    total0 = time.perf_counter()
    for name in names:
        sub_out = (out_dir / name) if out_dir is not None else None
        t0 = time.perf_counter()
        checks = run_experiment(name, model_params, params.get(name, {}),
                                seed, sub_out)
        report["timing"][name] = time.perf_counter() - t0
        scaled = []
        exp_passed = True
        for c in checks:
            tol = float(c.tol * tol_scale)
            entry = {"name": c.name, "law": c.law, "residual": float(c.residual),
                     "tol": tol, "passed": bool(c.residual < tol)}
            exp_passed = exp_passed and entry["passed"]
            scaled.append(entry)
        report["experiments"][name] = {
            "laws": list(REGISTRY[name].laws),
            "checks": scaled,
            "passed": exp_passed,
        }
        report["passed"] = report["passed"] and exp_passed
    report["timing"]["total"] = time.perf_counter() - total0
    return report


def _write_report(report: dict, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.tol_scale is not None:
            if args.tol_scale <= 0:
                raise ConfigError("--tol-scale must be positive")
            cfg["tol_scale"] = args.tol_scale
        validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out if args.out is not None else cfg.get("out_dir", "results"))
    try:
        report = run_from_config(cfg, out_dir)
    except Exception as exc:  # solver failures are reported, not swallowed
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    path = _write_report(report, out_dir)
    n_checks = sum(len(e["checks"]) for e in report["experiments"].values())
    n_fail = sum(1 for e in report["experiments"].values()
                 for c in e["checks"] if not c["passed"])
    print(f"{n_checks - n_fail}/{n_checks} checks passed; report: {path}")
    for ename, e in report["experiments"].items():
        for c in e["checks"]:
            if not c["passed"]:
                print(f"  FAIL {ename}/{c['name']}: residual {c['residual']:.3e} "
                      f"vs tol {c['tol']:.1e}")
    return 0 if report["passed"] else 1


def _cmd_list(_args) -> int:
    for name, exp in REGISTRY.items():
        print(f"{name}: {exp.description}")
        print(f"    laws: {', '.join(exp.laws)}")
    print("all: every suite above")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cqm", description="verification suites for bundle mechanics")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run suites from a JSON config")
    p_run.add_argument("config", help="path to the experiment config")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--tol-scale", type=float, default=None,
                       help="uniform tolerance multiplier")
    p_run.set_defaults(fn=_cmd_run)
    p_list = sub.add_parser("list", help="list registered experiments")
    p_list.set_defaults(fn=_cmd_list)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
