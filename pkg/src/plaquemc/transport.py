"""Monte-Carlo Lagrangian particle transport through the plaque channel.

Particles are advected by a quasi-steady streamtube velocity field and
diffuse with Euler-Maruyama increments.  The field is the fully developed
profile of the chosen fluid, rescaled by continuity to the local lumen
radius, plus a radial term that keeps ``rho / r(x)`` constant along
streamlines through the converging and diverging ramps.

Every random draw is keyed by (seed, particle index, step), so a run is
bit-reproducible for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import _kernels
from .channel import DiffusionSpec
from .geometry import VesselGeometry, lumen_radius, lumen_slope, validate
from .pulsatile import PulsatileWaveform, mean_velocity_at
from .rheology import FluidKind, FluidModel, axial_velocity, centerline_ratio
from .rng import RELEASE_DOMAIN, uniforms

THREADS_ENV = "MC_PLAQUE_THREADS"
DEFAULT_DT = 1e-4
FINE_DT = 1e-5  # severe stenosis, r_p >= 0.75 r_c


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ConstantFlow:
    u_avg: float = 0.342


@dataclass(frozen=True)
class PulsatileFlow:
    """Waveform-driven inlet flow.

    ``source`` and ``target_u_avg`` only record how the waveform was obtained
    (file path or ``"default"``, and the mean speed it was scaled to) so a
    configuration can be written back out.
    """

    waveform: PulsatileWaveform
    release_time: float = 0.0
    source: str = "default"
    target_u_avg: Optional[float] = None

    def __post_init__(self):
        # a release at the end of the cycle is the start of the next one
        object.__setattr__(self, "release_time", float(self.release_time) % self.waveform.period)


FlowMode = Union[ConstantFlow, PulsatileFlow]


def default_dt(geom: VesselGeometry) -> float:
    return FINE_DT if geom.r_p >= 0.75 * geom.r_c - 1e-15 else DEFAULT_DT


@dataclass(frozen=True)
class SimulationConfig:
    geometry: VesselGeometry = field(default_factory=VesselGeometry)
    fluid: FluidModel = field(default_factory=FluidModel)
    diffusion: DiffusionSpec = field(default_factory=DiffusionSpec)
    flow: FlowMode = field(default_factory=ConstantFlow)
    N: int = 1000
    dt: Optional[float] = None
    t_end: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", default_dt(self.geometry))
        problems = validate(self.geometry)
        if int(self.N) != self.N or self.N < 1:
            problems.append(f"particle count must be a positive integer, got {self.N}")
        if not self.dt > 0:
            problems.append(f"time step must be positive, got {self.dt}")
        if not self.t_end > 0:
            problems.append(f"duration must be positive, got {self.t_end}")
        if not 0 <= int(self.seed) < 2**64:
            problems.append("seed must fit in 64 unsigned bits")
        if isinstance(self.flow, ConstantFlow) and not self.flow.u_avg > 0:
            problems.append(f"u_avg must be positive, got {self.flow.u_avg}")
        if problems:
            raise ConfigError("; ".join(problems))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    @property
    def release_time(self) -> float:
        return self.flow.release_time if isinstance(self.flow, PulsatileFlow) else 0.0

    def u_avg_at(self, t_since_release):
        """Cross-section mean speed at ``t_since_release`` after the release."""
        if isinstance(self.flow, ConstantFlow):
            return np.full(np.shape(t_since_release), self.flow.u_avg)[()]
        t_abs = self.flow.release_time + np.asarray(t_since_release, dtype=float)
        return mean_velocity_at(self.flow.waveform, t_abs, self.geometry.r_c)

    def to_dict(self) -> dict:
        """Plain, JSON-serialisable description; the basis of :meth:`digest`."""
        g, f, d = self.geometry, self.fluid, self.diffusion
        out = {
            "channel": {
                "r_c": g.r_c,
                "l_c": g.l_c,
                "r_p": g.r_p,
                "l_p_outer": g.l_p_outer,
                "l_p_inner": g.l_p_inner,
                "x_center": g.center,
            },
            "fluid": {
                "model": f.kind.value,
                "K": f.K,
                "n": f.n,
                "tau_y": f.tau_y,
                "zeta": f.zeta,
                "density": f.density,
            },
            "particles": {
                "N": self.N,
                "radius": d.r_particle,
                "temperature": d.T,
                "viscosity": d.eta,
                "k_B": d.k_B,
                "D": d.D,
            },
            "sim": {"dt": self.dt, "t_end": self.t_end, "seed": self.seed},
        }
        if isinstance(self.flow, ConstantFlow):
            out["flow"] = {"mode": "constant", "u_avg": self.flow.u_avg}
        else:
            w = self.flow.waveform
            out["flow"] = {
                "mode": "pulsatile",
                "period": w.period,
                "release_time": self.flow.release_time,
                "waveform_times": w.times.tolist(),
                "waveform_flow_rates": w.flow_rates.tolist(),
            }
        return out

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ParticleEnsemble:
    positions: np.ndarray  # (N, 3) x, y, z
    alive: np.ndarray
    arrival_times: np.ndarray  # NaN until arrival, relative to release
    particle_ids: np.ndarray
    seed: int
    steps_taken: int = 0

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    @property
    def n_arrived(self) -> int:
        return int(np.count_nonzero(~self.alive))

    def copy(self) -> "ParticleEnsemble":
        return replace(
            self,
            positions=self.positions.copy(),
            alive=self.alive.copy(),
            arrival_times=self.arrival_times.copy(),
            particle_ids=self.particle_ids.copy(),
        )


@dataclass
class EmpiricalCIR:
    times: np.ndarray
    counts: np.ndarray
    N: int
    metadata: dict = field(default_factory=dict)
    arrival_times: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def fraction(self) -> np.ndarray:
        return self.counts / self.N

    def time_to_fraction(self, q: float) -> float:
        """First grid time at which at least ``q`` of the particles arrived."""
        idx = np.searchsorted(self.counts, q * self.N, side="left")
        return float(self.times[idx]) if idx < self.times.size else math.inf


def _packed(cfg: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    g, f = cfg.geometry, cfg.fluid
    a, b, c, d = g.breakpoints
    geo = np.array([g.r_c, g.l_c, g.r_p, g.ramp_length, a, b, c, d])
    p_exp = 2.0 if f.kind is FluidKind.NEWTONIAN else f.m + 1
    zeta = f.zeta if f.kind is FluidKind.HERSCHEL_BULKLEY else 0.0
    flu = np.array([centerline_ratio(f), p_exp, zeta])
    return geo, flu


def _seed_key(seed: int) -> np.uint64:
    return np.uint64(seed)


def release_ensemble(cfg: SimulationConfig) -> ParticleEnsemble:
    """Place ``cfg.N`` particles uniformly on the transmitter disc at x = 0."""
    n = cfg.N
    ids = np.arange(n, dtype=np.uint64)
    u_rho = uniforms(cfg.seed, ids, RELEASE_DOMAIN)
    u_phi = uniforms(cfg.seed, ids, RELEASE_DOMAIN + 1)
    r0 = lumen_radius(cfg.geometry, 0.0)
    rho = r0 * np.sqrt(u_rho)
    phi = 2.0 * math.pi * u_phi
    pos = np.column_stack([np.zeros(n), rho * np.cos(phi), rho * np.sin(phi)])
    return ParticleEnsemble(
        positions=pos,
        alive=np.ones(n, dtype=bool),
        arrival_times=np.full(n, np.nan),
        particle_ids=ids,
        seed=cfg.seed,
    )


def local_velocity(cfg: SimulationConfig, x, y, z, t=0.0):
    """Streamtube velocity ``(u_x, u_y, u_z)`` at a point, ``t`` after release.

    Accepts scalars or equally shaped arrays; raises for points outside the
    lumen.
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    g = cfg.geometry
    r = lumen_radius(g, x)
    rho = np.hypot(y, z)
    if np.any(rho > r * (1 + 1e-12)):
        raise ValueError("point outside the lumen")
    u0 = centerline_ratio(cfg.fluid) * cfg.u_avg_at(t) * (g.r_c / r) ** 2
    ux = np.vectorize(lambda u0_, r_, rho_: axial_velocity(cfg.fluid, u0_, r_, min(rho_, r_)))(u0, r, rho)
    follow = ux * lumen_slope(g, x) / r
    return ux[()], (y * follow)[()], (z * follow)[()]


def step(ensemble: ParticleEnsemble, cfg: SimulationConfig, t: float, dt: Optional[float] = None) -> ParticleEnsemble:
    """Advance all alive particles by one step starting ``t`` after release.

    The ensemble is updated in place and returned.
    """
    dt = cfg.dt if dt is None else dt
    if not dt > 0:
        raise ValueError("dt must be positive")
    geo, flu = _packed(cfg)
    sigma = math.sqrt(2.0 * cfg.diffusion.D * dt)
    _kernels.step_block(
        ensemble.positions,
        ensemble.particle_ids,
        ensemble.alive,
        ensemble.arrival_times,
        float(t),
        float(dt),
        float(cfg.u_avg_at(t)),
        sigma,
        _seed_key(ensemble.seed),
        ensemble.steps_taken,
        geo,
        flu,
    )
    ensemble.steps_taken += 1
    return ensemble


def containment_violations(ensemble: ParticleEnsemble, geom: VesselGeometry, rtol: float = 1e-12) -> int:
    """Number of alive particles outside the lumen or the [0, l_c) span."""
    pos = ensemble.positions[ensemble.alive]
    if pos.size == 0:
        return 0
    x = pos[:, 0]
    outside_span = (x < 0) | (x >= geom.l_c)
    r = lumen_radius(geom, np.clip(x, 0.0, geom.l_c))
    outside_wall = np.hypot(pos[:, 1], pos[:, 2]) > r * (1 + rtol)
    return int(np.count_nonzero(outside_span | outside_wall))


def empirical_cir(arrival_times, N: int, grid) -> EmpiricalCIR:
    """Cumulative count of arrivals at or before each grid time."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    arr = np.asarray(arrival_times, dtype=float)
    arr = np.sort(arr[~np.isnan(arr)])
    counts = np.searchsorted(arr, grid, side="right")
    return EmpiricalCIR(times=grid, counts=counts, N=int(N))


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def run(
    cfg: SimulationConfig, workers: Optional[int] = None, ensemble: Optional[ParticleEnsemble] = None
) -> EmpiricalCIR:
    """Release, propagate for ``cfg.t_end`` and return the cumulative CIR.

    ``ensemble`` replaces the uniform disc release (it is copied, not
    modified); its particle count overrides ``cfg.N``.

    Particles are split into contiguous chunks advanced concurrently; since
    no state is shared between particles the result does not depend on
    ``workers``.
    """
    ens = release_ensemble(cfg) if ensemble is None else ensemble.copy()
    workers = min(worker_count(workers), ens.N)
    geo, flu = _packed(cfg)
    n_steps = cfg.n_steps
    u_steps = np.ascontiguousarray(cfg.u_avg_at(np.arange(n_steps) * cfg.dt), dtype=float)
    sigma = math.sqrt(2.0 * cfg.diffusion.D * cfg.dt)
    seed = _seed_key(ens.seed)
    bounds = np.linspace(0, ens.N, workers + 1).astype(int)

    def work(lo_hi):
        lo, hi = lo_hi
        _kernels.run_block(
            ens.positions[lo:hi],
            ens.particle_ids[lo:hi],
            ens.alive[lo:hi],
            ens.arrival_times[lo:hi],
            u_steps,
            0,
            cfg.dt,
            sigma,
            seed,
            geo,
            flu,
        )

    chunks = list(zip(bounds[:-1], bounds[1:]))
    if workers == 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    ens.steps_taken = n_steps

    grid = np.arange(1, n_steps + 1) * cfg.dt
    cir = empirical_cir(ens.arrival_times, ens.N, grid)
    cir.arrival_times = ens.arrival_times
    cir.metadata = {"config_hash": cfg.digest(), "seed": cfg.seed, "workers": workers}
    return cir
