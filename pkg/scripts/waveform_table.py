"""Tabulate the shipped carotid waveform and its release landmarks."""

import argparse
from pathlib import Path

from plaquemc.output import write_csv
from plaquemc.pulsatile import (
    cycle_mean_flow,
    default_waveform,
    flow_rate_at,
    mean_velocity_at,
    normalize_mean,
    sample_waveform,
)

R_C = 3e-3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--u-avg", type=float, default=0.342, help="cycle-mean speed to normalise to")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    raw = default_waveform()
    w = normalize_mean(raw, args.u_avg, R_C)
    t, q = sample_waveform(w, 0.005, cycles=2)
    write_csv(
        ["t_s", "flow_rate_ml_per_s", "u_avg_m_s"], zip(t, q, mean_velocity_at(w, t, R_C)), args.out / "waveform.csv"
    )
    scale = w.flow_rates[0] / raw.flow_rates[0]
    print(f"digitised cycle mean {cycle_mean_flow(raw):.3f} mL/s, scale to {args.u_avg} m/s: x{scale:.4f}")
    for name in ("ps", "ed", "ld"):
        t_rel = w.landmark(name)
        q_rel, u_rel = flow_rate_at(w, t_rel), mean_velocity_at(w, t_rel, R_C)
        print(f"{name}: t={t_rel:.2f} s  Q={q_rel:6.2f} mL/s  u_avg={u_rel:.3f} m/s")


if __name__ == "__main__":
    main()
