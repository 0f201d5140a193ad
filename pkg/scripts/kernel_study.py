#!/usr/bin/env python3
"""Convergence study of the sliced free propagator.

Sweeps slice counts and grid resolutions against the closed-form kernel and
writes a CSV of central-half-box errors plus modulus-uniformity figures.

    python scripts/kernel_study.py [out.csv]
"""
import sys

import numpy as np

from cqm.bundle import ModelParams
from cqm.cocycle import LagrangianModel
from cqm.pathint import SliceScheme, free_kernel_exact, sliced_propagator
from cqm.qgrid import GridSpec


def main() -> int:
    out = sys.argv[1] if len(sys.argv) > 1 else "kernel_study.csv"
    free1 = LagrangianModel(ModelParams(1, 1, np.array([1.0])))
    rows = ["n_points,n_slices,rel_l2_central,modulus_std_over_mean"]
    for n in (256, 512, 1024):
        grid = GridSpec(((-15.0, 15.0, n),))
        x = grid.coords(0)
        cen = np.abs(x) <= 7.5
        exact = free_kernel_exact(grid, 1.0, 1.0, 1.0)
        ec = exact[np.ix_(cen, cen)]
        for M in (1, 2, 4, 8, 16):
            K = sliced_propagator(free1, SliceScheme(M, grid, 0.0, 1.0))
            kc = K.matrix[np.ix_(cen, cen)]
            rel = float(np.linalg.norm(kc - ec) / np.linalg.norm(ec))
            mod = np.abs(kc)
            rows.append(f"{n},{M},{rel!r},{float(mod.std() / mod.mean())!r}")
            print(rows[-1])
    with open(out, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
