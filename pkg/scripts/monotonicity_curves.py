"""Monotonicity curves m(r) for the standard families, one CSV per family.

The k = 3 cap is slow (about 100 s for 100 radii) and is opt-in.
"""
import argparse
import math
from pathlib import Path

import numpy as np

from hypiso.ball import mobius_translate
from hypiso.families import catenoid, flat_disk, geodesic_cap, mobius_image
from hypiso.measure import monotonicity_curve
from hypiso.verify import check_monotonicity


def families(with_k3: bool):
    disk = flat_disk(2, 3)
    out = {
        "disk": disk,
        "cap_pi6": geodesic_cap(2, 3, math.pi / 6),
        "cap_pi4": geodesic_cap(2, 3, math.pi / 4),
        "mobius_disk": mobius_image(disk, mobius_translate(np.array([0.3, -0.2, 0.4]))),
        "catenoid_0.5": catenoid(0.5),
    }
    if with_k3:
        out["cap3_pi4"] = geodesic_cap(3, 4, math.pi / 4)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=100)
    ap.add_argument("--k3", action="store_true", help="include the slow k = 3 cap")
    ap.add_argument("--out", type=Path, default=Path("out/monotonicity"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, sigma in families(args.k3).items():
        curve = monotonicity_curve(sigma, args.grid)
        v = check_monotonicity(curve)
        (args.out / f"{name}.csv").write_text(curve.to_csv())
        print(f"{name:14s} final ratio {curve.ratios[-1]:.10f}  largest drop {v.lhs:.2e}  "
              f"{'pass' if v.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
