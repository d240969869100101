"""Command-line entry point: ``plaquemc <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 invalid configuration, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .channel import AnalyticalCIR, venturi_reduction_curve
from .config import ConfigError, load_config, resolve_overrides, serialize_config
from .geometry import GeometryError, VesselGeometry
from .output import RunManifest, write_csv
from .pulsatile import (
    DEFAULT_PERIOD,
    WaveformError,
    default_waveform,
    mean_velocity_at,
    normalize_mean,
    read_waveform,
    sample_waveform,
)
from .rheology import (
    DEFAULT_ZETA,
    FluidModel,
    RheologyError,
    axial_velocity,
    centerline_ratio,
)
from .transport import run

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _models(zeta: float):
    return (
        FluidModel.newtonian(),
        FluidModel.power_law(),
        FluidModel.herschel_bulkley(zeta=zeta),
    )


def _open_out(path):
    return sys.stdout if path in (None, "-") else path


def cmd_profile(args) -> int:
    cfg = load_config(args.config)
    r_c = cfg.geometry.r_c
    u_avg = args.u_avg
    rho = np.linspace(-r_c, r_c, args.samples)
    cols = [rho]
    for model in _models(args.zeta):
        u0 = centerline_ratio(model) * u_avg
        cols.append(axial_velocity(model, u0, r_c, np.minimum(np.abs(rho), r_c)))
    write_csv(
        ["rho_m", "u_newtonian_m_s", "u_power_law_m_s", "u_herschel_bulkley_m_s"],
        zip(*cols),
        _open_out(args.out),
    )
    return EXIT_OK


def cmd_cir(args) -> int:
    cfg = load_config(args.config)
    l_c = cfg.geometry.l_c
    models = _models(args.zeta)
    cirs = [AnalyticalCIR(m, centerline_ratio(m) * args.u_avg, l_c) for m in models]
    n = int(round(args.t_max / args.dt))
    # each model's first-arrival instant is put on the grid explicitly
    t = np.union1d(np.arange(n + 1) * args.dt, [c.first_arrival for c in cirs if c.first_arrival <= args.t_max])
    cols = [t] + [c(t) for c in cirs]
    write_csv(["t_s", "h_newtonian", "h_power_law", "h_herschel_bulkley"], zip(*cols), _open_out(args.out))
    return EXIT_OK


def cmd_venturi(args) -> int:
    template = VesselGeometry(r_c=args.rc, l_c=max(args.lc), l_p_outer=args.lp_outer, l_p_inner=args.lp_inner)
    rows = []
    for curve in venturi_reduction_curve(template, args.lc, args.samples):
        for p, red, inc in zip(curve.r_p_rel, curve.reduction, curve.speed_increase):
            rows.append((curve.l_c, p, red, inc))
    write_csv(["l_c_m", "r_p_rel", "reduction", "speed_increase"], rows, _open_out(args.out))
    return EXIT_OK


def cmd_waveform(args) -> int:
    if args.waveform:
        w = read_waveform(args.waveform, period=args.period)
    else:
        w = default_waveform()
    if args.normalize is not None:
        w = normalize_mean(w, args.normalize, args.rc)
    t, q = sample_waveform(w, args.resolution)
    u = mean_velocity_at(w, t, args.rc)
    write_csv(["t_s", "flow_rate_ml_per_s", "u_avg_m_s"], zip(t, q, u), _open_out(args.out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    cfg = resolve_overrides(cfg, seed=args.seed, release=args.release, r_p_rel=args.rp_rel, particles=args.particles)
    out = Path(args.out)
    start = time.perf_counter()
    try:
        cir = run(cfg, workers=args.threads)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    elapsed = time.perf_counter() - start

    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "cir.csv"
    cfg_path = out / "config.ini"
    write_csv(["t_release_s", "n_received"], zip(cir.times, cir.counts), csv_path)
    config_text = serialize_config(cfg)
    cfg_path.write_bytes(config_text.encode())
    manifest = RunManifest(
        config=cfg.to_dict(),
        config_text=config_text,
        config_hash=cfg.digest(),
        seed=cfg.seed,
        tool_version=__version__,
        outputs=[csv_path.name, cfg_path.name],
        wall_clock_s=round(elapsed, 3),
    )
    manifest.write(out / "manifest.json")
    if not args.quiet:
        print(f"{cir.counts[-1]} of {cfg.N} particles received; wrote {csv_path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plaquemc", description="Molecular-communication channel models for a plaque-obstructed vessel.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("profile", help="velocity profiles of the three fluid models")
    s.add_argument("--config", help="configuration file (channel radius)")
    s.add_argument("--u-avg", type=float, default=0.342, help="mean speed in m/s")
    s.add_argument("--zeta", type=float, default=DEFAULT_ZETA, help="Herschel-Bulkley yield-surface position")
    s.add_argument("--samples", type=int, default=201)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("cir", help="channel impulse responses")
    s.add_argument("kind", choices=["analytic"])
    s.add_argument("--config", help="configuration file (channel length)")
    s.add_argument("--u-avg", type=float, default=0.342)
    s.add_argument("--zeta", type=float, default=DEFAULT_ZETA)
    s.add_argument("--t-max", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_cir)

    s = sub.add_parser("venturi", help="traversal-time reduction versus plaque size")
    s.add_argument("--lc", type=float, nargs="+", default=[25e-3, 50e-3, 75e-3, 100e-3], help="channel lengths in m")
    s.add_argument("--rc", type=float, default=3e-3)
    s.add_argument("--lp-outer", type=float, default=20e-3)
    s.add_argument("--lp-inner", type=float, default=10e-3)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--out")
    s.set_defaults(func=cmd_venturi)

    s = sub.add_parser("waveform", help="sample the inlet flow waveform")
    s.add_argument("--waveform", help="two-column CSV (time_s, flow_rate_ml_per_s); default: shipped carotid cycle")
    s.add_argument("--period", type=float, default=DEFAULT_PERIOD)
    s.add_argument("--resolution", type=float, default=0.01, help="sample spacing in s")
    s.add_argument("--normalize", type=float, metavar="U_AVG", help="rescale to this cycle-mean speed (m/s)")
    s.add_argument("--rc", type=float, default=3e-3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_waveform)

    s = sub.add_parser("simulate", help="Monte-Carlo transport run")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--release", help="ps, ed, ld or t=<seconds>; implies pulsatile flow")
    s.add_argument("--rp-rel", type=float, help="plaque extension as a fraction of r_c")
    s.add_argument("--particles", type=int)
    s.add_argument("--threads", type=int, help="worker count (default: $MC_PLAQUE_THREADS or all cores)")
    s.add_argument("--out", default="run")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, GeometryError, RheologyError, WaveformError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
