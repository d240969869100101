"""Traversal-time reduction versus plaque extension for several channel lengths."""

import argparse
from pathlib import Path

from plaquemc.channel import venturi_reduction_curve
from plaquemc.geometry import VesselGeometry
from plaquemc.output import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lc-mm", type=float, nargs="+", default=[25, 50, 75, 100])
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    curves = venturi_reduction_curve(VesselGeometry(), [v * 1e-3 for v in args.lc_mm], args.samples)
    rows = [(c.l_c, p, red, inc) for c in curves for p, red, inc in zip(c.r_p_rel, c.reduction, c.speed_increase)]
    write_csv(["l_c_m", "r_p_rel", "reduction", "speed_increase"], rows, args.out / "venturi.csv")

    probes = [i * args.samples // 4 for i in (1, 2, 3)]
    print("l_c [mm] | " + " | ".join(f"r_p/r_c={curves[0].r_p_rel[i]:.2f}: reduction, speed-up" for i in probes))
    for c in curves:
        cells = " | ".join(f"{c.reduction[i]:.3f}, {c.speed_increase[i]:.3f}" for i in probes)
        print(f"{c.l_c * 1e3:8.0f} | {cells}")


if __name__ == "__main__":
    main()
