"""Monte-Carlo arrival statistics for growing plaque (constant flow)."""

import argparse
from pathlib import Path

import numpy as np

from plaquemc.channel import venturi_traversal_time
from plaquemc.geometry import VesselGeometry
from plaquemc.output import write_csv
from plaquemc.transport import SimulationConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rp-rel", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75])
    ap.add_argument("--particles", type=int, default=10_000)
    ap.add_argument("--t-end", type=float, default=0.6)
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rows = []
    print("r_p/r_c  first [s]  median [s]  centreline Venturi [s]")
    for p in args.rp_rel:
        g = VesselGeometry().with_plaque(p)
        cir = run(SimulationConfig(geometry=g, N=args.particles, t_end=args.t_end, seed=args.seed))
        first, median = np.nanmin(cir.arrival_times), np.nanmedian(cir.arrival_times)
        venturi = venturi_traversal_time(g, 2 * 0.342)
        rows.append((p, first, median, venturi, cir.counts[-1]))
        print(f"{p:7.2f}  {first:9.5f}  {median:10.5f}  {venturi:10.5f}")
    write_csv(
        ["r_p_rel", "first_arrival_s", "median_arrival_s", "venturi_time_s", "n_received"],
        rows,
        args.out / "plaque_sweep.csv",
    )


if __name__ == "__main__":
    main()
