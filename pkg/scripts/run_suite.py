#!/usr/bin/env python3
"""Run the full verification suite with a generated default config.

Writes the config next to the output directory and invokes the same entry
point as the ``cqm`` command.  Usage:

    python scripts/run_suite.py [outdir] [--seed N]
"""
import argparse
import json
import sys
from pathlib import Path

from cqm.cli import main as cqm_main


def build_config(seed: int) -> dict:
    return {
        "model": {"n_particles": 2, "spatial_dim": 1,
                  "masses": [1.0, 2.0], "hbar": 1.0},
        "experiment": "all",
        "seed": seed,
    }


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="results")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(build_config(args.seed), indent=2) + "\n")
    return cqm_main(["run", str(cfg_path), "--out", str(out)])


if __name__ == "__main__":
    sys.exit(main())
