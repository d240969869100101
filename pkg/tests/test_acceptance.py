"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate

from plaquemc.channel import (
    AnalyticalCIR,
    DiffusionSpec,
    cir_herschel_bulkley,
    cir_newtonian,
    cir_power_law,
    dispersion_factor,
    stokes_einstein_diffusion,
    venturi_speed_increase,
    venturi_traversal_time,
)
from plaquemc.geometry import VesselGeometry, lumen_radius
from plaquemc.pulsatile import default_waveform, normalize_mean
from plaquemc.rheology import FluidKind, FluidModel, axial_velocity, centerline_ratio, mean_velocity_check
from plaquemc.transport import ConstantFlow, ParticleEnsemble, PulsatileFlow, SimulationConfig, run

pytestmark = pytest.mark.acceptance

U_AVG = 0.342
L_C, R_C = 50e-3, 3e-3
MODELS = {
    "newtonian": FluidModel.newtonian(),
    "power_law": FluidModel.power_law(),
    "herschel_bulkley": FluidModel.herschel_bulkley(zeta=0.05),
}


def test_criterion_1_venturi_speed_increase(report):
    g = VesselGeometry()
    quoted = {0.25: 15, 0.5: 30, 0.75: 43}
    expected = {0.25: 15.4, 0.5: 30.4, 0.75: 42.9}
    values, ok = {}, True
    for p in quoted:
        gp = g.with_plaque(p)
        pct = 100 * venturi_speed_increase(gp)
        values[p] = pct
        ok &= round(pct, 1) == expected[p] and abs(round(pct) - quoted[p]) <= 1
        pts = list(gp.breakpoints)
        quad, _ = integrate.quad(
            lambda x: (lumen_radius(gp, x) / R_C) ** 2, 0, L_C, points=pts, epsrel=1e-13, limit=200
        )
        ok &= math.isclose(venturi_traversal_time(gp, 1.0), quad, rel_tol=1e-9)
    detail = ", ".join(f"r_p/r_c={p}: {v:.2f}%" for p, v in values.items())
    assert report("criterion 1 (Venturi 15/30/43%)", ok, detail)


def test_criterion_2_diffusion_constants(report):
    d = stokes_einstein_diffusion(DiffusionSpec(T=300.0, eta=4e-3, r_particle=50e-9))
    alpha, flow_dominated = dispersion_factor(d, L_C, U_AVG, R_C)
    ok = abs(d / 1.1e-12 - 1) <= 0.02 and abs(alpha / 1.8e-8 - 1) <= 0.05 and flow_dominated
    assert report("criterion 2 (D and alpha)", ok, f"D={d:.4e} m^2/s, alpha={alpha:.3e}")


@pytest.mark.slow
@pytest.mark.parametrize("name", list(MODELS))
def test_criterion_3_analytic_vs_monte_carlo(report, name):
    model = MODELS[name]
    cfg = SimulationConfig(fluid=model, N=100_000, dt=1e-4, t_end=1.0, seed=2024)
    cir = run(cfg)
    exact = AnalyticalCIR(model, centerline_ratio(model) * U_AVG, L_C)
    sup = float(np.max(np.abs(cir.fraction - exact(cir.times))))
    assert report(f"criterion 3 (MC vs analytic CIR, {name})", sup <= 0.02, f"sup-norm {sup:.4f} (limit 0.02)")


def test_criterion_4_degeneration(report):
    rng = np.random.default_rng(4)
    m = 1 / 0.708
    rho = rng.uniform(0, R_C, 1000)
    t = rng.uniform(0, 1.0, 1000)
    u0 = 0.684

    def close(a, b):
        return np.allclose(a, b, rtol=1e-12, atol=0)

    pl1 = FluidModel.power_law(n=1.0)
    hb0 = FluidModel.herschel_bulkley(zeta=0.0)
    pl = FluidModel.power_law()
    profile_ok = close(axial_velocity(pl1, u0, R_C, rho), axial_velocity(FluidModel.newtonian(), u0, R_C, rho))
    profile_ok &= close(axial_velocity(hb0, u0, R_C, rho), axial_velocity(pl, u0, R_C, rho))
    cir_ok = close(cir_power_law(t, u0, L_C, 1.0), cir_newtonian(t, u0, L_C))
    cir_ok &= close(cir_herschel_bulkley(t, u0, L_C, m, 0.0), cir_power_law(t, u0, L_C, m))
    ok = bool(profile_ok and cir_ok)
    assert report("criterion 4 (degeneration identities)", ok, f"profiles {profile_ok}, CIRs {cir_ok}")


@pytest.mark.slow
def test_criterion_5_hb_front(report):
    zeta = 0.05
    model = FluidModel.herschel_bulkley(zeta=zeta)
    u0 = centerline_ratio(model) * U_AVG
    t_min = L_C / u0
    analytic = cir_herschel_bulkley(t_min * (1 + 1e-9), u0, L_C, model.m, zeta)
    analytic_ok = abs(analytic - zeta**2) <= 1e-6

    n = 100_000
    cfg = SimulationConfig(fluid=model, diffusion=DiffusionSpec(D_override=0.0), N=n, t_end=0.1, seed=5)
    cir = run(cfg)
    frac = float(np.mean(np.abs(cir.arrival_times - t_min) <= 2 * cfg.dt))
    sigma = math.sqrt(zeta**2 * (1 - zeta**2) / n)
    mc_ok = abs(frac - zeta**2) <= 3 * sigma
    detail = (
        f"h(t_min(1+1e-9))-zeta^2 = {analytic - zeta**2:.3e} (limit 1e-6); "
        f"fraction within 2 steps = {frac:.5f} vs {zeta**2:.4f} +/- {3 * sigma:.5f}"
    )
    assert report("criterion 5 (HB front jump)", analytic_ok and mc_ok, detail)


@pytest.mark.slow
def test_hb_front_is_the_plug_share(report):
    # companion check: the particles that arrive exactly at t_min are the plug
    zeta = 0.05
    model = FluidModel.herschel_bulkley(zeta=zeta)
    t_min = L_C / (centerline_ratio(model) * U_AVG)
    n = 100_000
    cfg = SimulationConfig(fluid=model, diffusion=DiffusionSpec(D_override=0.0), N=n, t_end=0.1, seed=5)
    arrivals = run(cfg).arrival_times
    frac = float(np.mean(np.abs(arrivals - t_min) <= 1e-9 * t_min))
    sigma = math.sqrt(zeta**2 * (1 - zeta**2) / n)
    ok = abs(frac - zeta**2) <= 3 * sigma and np.nanmin(arrivals) >= t_min * (1 - 1e-12)
    assert report(
        "criterion 5, companion (front share at t_min)", ok, f"{frac:.5f} vs {zeta**2:.4f} +/- {3 * sigma:.5f}"
    )


@pytest.mark.slow
def test_criterion_6_plaque_speeds_arrival(report):
    medians, centre_ok, lines = [], True, []
    for p in (0.0, 0.25, 0.5, 0.75):
        g = VesselGeometry().with_plaque(p)
        cfg = SimulationConfig(geometry=g, N=10_000, t_end=0.6, seed=6)
        cir = run(cfg)
        medians.append(float(np.nanmedian(cir.arrival_times)) if cir.counts[-1] * 2 > cfg.N else math.inf)

        dry = SimulationConfig(geometry=g, diffusion=DiffusionSpec(D_override=0.0), N=1, t_end=0.2)
        ens = ParticleEnsemble(np.zeros((1, 3)), np.ones(1, bool), np.full(1, np.nan), np.zeros(1, np.uint64), 0)
        t_arr = float(run(dry, ensemble=ens).arrival_times[0])
        t_ref = venturi_traversal_time(g, 2 * U_AVG)
        centre_ok &= abs(t_arr - t_ref) <= 2 * dry.dt
        lines.append(f"{p}: median {medians[-1]:.5f} s, centreline {t_arr:.6f} vs {t_ref:.6f} s")
    decreasing = all(a > b for a, b in zip(medians, medians[1:]))
    assert report("criterion 6 (plaque shortens arrival)", decreasing and centre_ok, "; ".join(lines))


@pytest.mark.slow
def test_criterion_7_pulsatile_orderings(report):
    w = normalize_mean(default_waveform(), U_AVG, R_C)
    base = dict(N=10_000, t_end=1.0, seed=7)
    runs = {"constant": run(SimulationConfig(flow=ConstantFlow(U_AVG), **base))}
    for name in ("ps", "ed", "ld"):
        runs[name] = run(SimulationConfig(flow=PulsatileFlow(w, release_time=w.landmark(name)), **base))
    t10 = {k: c.time_to_fraction(0.1) for k, c in runs.items()}
    order_ok = t10["ps"] < t10["constant"] < t10["ld"] < t10["ed"]
    const, ld = runs["constant"], runs["ld"]
    i_early = int(np.searchsorted(const.times, t10["constant"]))
    crossing_ok = ld.counts[i_early] < const.counts[i_early] and ld.counts[-1] > const.counts[-1]
    detail = (
        "t10 "
        + ", ".join(f"{k}={v:.4f}" for k, v in t10.items())
        + f"; at {const.times[i_early]:.4f} s LD {ld.counts[i_early]} vs const {const.counts[i_early]}"
        + f"; at 1 s LD {ld.counts[-1]} vs const {const.counts[-1]}"
    )
    assert report("criterion 7 (pulsatile orderings)", order_ok and crossing_ok, detail)


def test_criterion_8_cli_determinism(report, tmp_path):
    outputs = []
    for threads in ("1", "3"):
        out = tmp_path / f"run{threads}"
        env = dict(os.environ, MC_PLAQUE_THREADS=threads)
        cmd = [
            sys.executable,
            "-m",
            "plaquemc",
            "simulate",
            "--seed",
            "8",
            "--rp-rel",
            "0.5",
            "--out",
            str(out),
            "--quiet",
        ]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append((out / "cir.csv").read_bytes())
    same = outputs[0] == outputs[1]
    assert report("criterion 8 (determinism across workers)", same, f"{len(outputs[0])} bytes, identical={same}")


def test_criterion_9_mean_velocity_quadrature(report):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        kind = FluidKind(rng.choice([k.value for k in FluidKind]))
        n = rng.uniform(0.3, 1.5)
        if kind is FluidKind.NEWTONIAN:
            model = FluidModel.newtonian(rng.uniform(1e-3, 1e-2))
        elif kind is FluidKind.POWER_LAW:
            model = FluidModel.power_law(K=rng.uniform(1e-3, 1e-1), n=n)
        else:
            model = FluidModel.herschel_bulkley(n=n, zeta=rng.uniform(0, 0.9))
        u0 = rng.uniform(0.05, 2.0)
        r = rng.uniform(1e-3, 1e-2)
        worst = max(worst, abs(mean_velocity_check(model, u0, r) / (u0 / centerline_ratio(model)) - 1))
    assert report("criterion 9 (mean-velocity quadrature)", worst <= 1e-6, f"worst relative error {worst:.2e}")
