"""Closed-form channel impulse responses and Venturi traversal times.

The CIRs here are cumulative: ``h(t)`` is the fraction of an instantaneous,
cross-sectionally uniform release that has crossed the receiver plane at
distance ``l_c`` by time ``t``.  They hold in the flow-dominated regime,
where every particle keeps its initial radial position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .geometry import GeometryError, VesselGeometry, check
from .rheology import FluidKind, FluidModel

BOLTZMANN = 1.38e-23  # J/K
FLOW_DOMINATED_THRESHOLD = 1e-2


def _arrival_gap(t, u0: float, l_c: float):
    """Return ``(t, 1 - l_c/(u0 t))`` with the gap clipped to [0, 1]."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        gap = 1.0 - l_c / (u0 * t)
    gap = np.where(t > 0, gap, -1.0)
    return t, gap


def cir_newtonian(t, u0: float, l_c: float):
    t, gap = _arrival_gap(t, u0, l_c)
    h = np.where(gap >= 0, np.clip(gap, 0.0, 1.0), 0.0)
    return h if h.ndim else float(h)


def cir_power_law(t, u0: float, l_c: float, m: float):
    t, gap = _arrival_gap(t, u0, l_c)
    h = np.where(gap >= 0, np.clip(gap, 0.0, 1.0) ** (2.0 / (m + 1)), 0.0)
    return h if h.ndim else float(h)


def cir_herschel_bulkley(t, u0: float, l_c: float, m: float, zeta: float):
    """CIR with a rigid plug; the plug's share ``zeta**2`` arrives as a front."""
    t, gap = _arrival_gap(t, u0, l_c)
    shell = np.clip(gap, 0.0, 1.0) ** (1.0 / (m + 1))
    h = np.where(gap >= 0, (zeta + (1.0 - zeta) * shell) ** 2, 0.0)
    return h if h.ndim else float(h)


@dataclass(frozen=True)
class AnalyticalCIR:
    """Closed-form CIR bound to a fluid, a centreline speed and a distance."""

    model: FluidModel
    u0: float
    l_c: float

    def __post_init__(self):
        if not (self.u0 > 0 and self.l_c > 0):
            raise ValueError("u0 and l_c must be positive")

    @property
    def first_arrival(self) -> float:
        return self.l_c / self.u0

    def __call__(self, t):
        kind = self.model.kind
        if kind is FluidKind.NEWTONIAN:
            return cir_newtonian(t, self.u0, self.l_c)
        if kind is FluidKind.POWER_LAW:
            return cir_power_law(t, self.u0, self.l_c, self.model.m)
        return cir_herschel_bulkley(t, self.u0, self.l_c, self.model.m, self.model.zeta)


@dataclass(frozen=True)
class DiffusionSpec:
    """Brownian particle description; ``D_override`` bypasses Stokes-Einstein."""

    k_B: float = BOLTZMANN
    T: float = 300.0
    eta: float = 4e-3
    r_particle: float = 50e-9
    D_override: Optional[float] = None

    def __post_init__(self):
        for name in ("k_B", "T", "eta", "r_particle"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.D_override is not None and self.D_override < 0:
            raise ValueError("diffusion coefficient must be non-negative")

    @property
    def D(self) -> float:
        if self.D_override is not None:
            return self.D_override
        return stokes_einstein_diffusion(self)


def stokes_einstein_diffusion(spec: DiffusionSpec) -> float:
    return spec.k_B * spec.T / (6 * math.pi * spec.eta * spec.r_particle)


def dispersion_factor(D: float, l_c: float, u_avg: float, r_c: float) -> tuple[float, bool]:
    """Dispersion factor and whether transport counts as flow-dominated."""
    alpha = D * l_c / (u_avg * r_c**2)
    return alpha, alpha < FLOW_DOMINATED_THRESHOLD


def _ramp_integral(length: float, r_a: float, r_b: float) -> float:
    # exact integral of r(x)^2 over a linear segment from r_a to r_b
    return length * (r_a * r_a + r_a * r_b + r_b * r_b) / 3.0


def venturi_traversal_time(geom: VesselGeometry, u0: float) -> float:
    """Centreline traversal time when the speed scales as ``(r_c / r(x))**2``.

    Returns ``(1/u0) * integral_0^l_c (r(x)/r_c)**2 dx``, which never exceeds
    the plaque-free value ``l_c / u0``.
    """
    check(geom)
    if not u0 > 0:
        raise ValueError("u0 must be positive")
    r_c, r_min = geom.r_c, geom.min_radius
    # area deficit relative to the open channel; exactly zero without plaque
    deficit = 2 * (geom.ramp_length * r_c**2 - _ramp_integral(geom.ramp_length, r_c, r_min))
    deficit += geom.l_p_inner * (r_c**2 - r_min**2)
    return (geom.l_c - deficit / r_c**2) / u0


def venturi_time_reduction(geom: VesselGeometry) -> float:
    """``(T_ideal - T) / T_ideal``; independent of ``u0``."""
    return 1.0 - venturi_traversal_time(geom, 1.0) / geom.l_c


def venturi_speed_increase(geom: VesselGeometry) -> float:
    """``T_ideal / T - 1``, the relative gain in mean traversal speed."""
    return geom.l_c / venturi_traversal_time(geom, 1.0) - 1.0


@dataclass
class VenturiCurve:
    l_c: float
    r_p_rel: np.ndarray
    reduction: np.ndarray
    speed_increase: np.ndarray = field(repr=False)


def venturi_reduction_curve(
    template: VesselGeometry, l_c_values: Iterable[float], samples: int = 100
) -> list[VenturiCurve]:
    """Sweep ``r_p / r_c`` over ``[0, 1)`` for each channel length.

    The plaque keeps the template's lengths.  It is centred in each channel
    unless the template pins ``x_center``, in which case it stays put and the
    receiver moves.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rel = np.arange(samples) / samples
    curves = []
    for l_c in l_c_values:
        base = VesselGeometry(
            r_c=template.r_c,
            l_c=float(l_c),
            r_p=0.0,
            l_p_outer=template.l_p_outer,
            l_p_inner=template.l_p_inner,
            x_center=template.x_center,
        )
        try:
            check(base)
        except GeometryError as exc:
            raise GeometryError(f"l_c={l_c}: {exc}") from None
        reduction = np.empty(samples)
        speed = np.empty(samples)
        for i, p in enumerate(rel):
            g = base.with_plaque(p)
            reduction[i] = venturi_time_reduction(g)
            speed[i] = venturi_speed_increase(g)
        curves.append(VenturiCurve(float(l_c), rel, reduction, speed))
    return curves
