#!/usr/bin/env python3
"""Boost-covariance error under grid refinement.

Evolve-then-boost against boost-then-evolve for a free Gaussian packet,
sweeping the grid resolution.  Writes a CSV of relative L2 discrepancies.

    python scripts/boost_refinement.py [out.csv]
"""
import sys

from cqm.qgrid import GridSpec, HamiltonianSpec, boost_covariance_check, gaussian_packet


def main() -> int:
    out = sys.argv[1] if len(sys.argv) > 1 else "boost_refinement.csv"
    H = HamiltonianSpec((1.0,))
    rows = ["n_points,rel_l2_error"]
    for n in (256, 512, 1024, 2048, 4096):
        spec = GridSpec(((-20.0, 20.0, n),))
        err = boost_covariance_check(gaussian_packet(spec, 0.0, 1.0), 1.0, 1.0, H)
        rows.append(f"{n},{err!r}")
        print(rows[-1])
    with open(out, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
