"""Constitutive laws and fully developed pipe-flow profiles.

Three fluids are supported: Newtonian, power-law and Herschel-Bulkley.
Profiles are parameterised by the centreline speed ``u0`` and are valid for
laminar flow in a straight circular pipe of radius ``r_lumen``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import integrate

BLOOD_DENSITY = 1050.0  # kg/m^3
BLOOD_VISCOSITY = 4e-3  # Pa s, average dynamic viscosity
POWER_LAW_K = 17e-3  # Pa s^n
POWER_LAW_N = 0.708
YIELD_STRESS = 5e-3  # Pa
DEFAULT_ZETA = 0.05


class RheologyError(ValueError):
    pass


class FluidKind(str, enum.Enum):
    NEWTONIAN = "newtonian"
    POWER_LAW = "power_law"
    HERSCHEL_BULKLEY = "herschel_bulkley"


@dataclass(frozen=True)
class FluidModel:
    kind: FluidKind = FluidKind.NEWTONIAN
    K: float = BLOOD_VISCOSITY
    n: float = 1.0
    tau_y: float = 0.0
    zeta: float = 0.0
    density: float = BLOOD_DENSITY

    def __post_init__(self):
        object.__setattr__(self, "kind", FluidKind(self.kind))
        problems = []
        if not self.K > 0:
            problems.append(f"K must be positive, got {self.K}")
        if not 0 < self.n <= 1.5:
            problems.append(f"n must lie in (0, 1.5], got {self.n}")
        if self.tau_y < 0:
            problems.append(f"tau_y must be non-negative, got {self.tau_y}")
        if not 0 <= self.zeta < 1:
            problems.append(f"zeta must lie in [0, 1), got {self.zeta}")
        if not self.density > 0:
            problems.append(f"density must be positive, got {self.density}")
        if self.kind is FluidKind.NEWTONIAN and (self.n != 1 or self.tau_y or self.zeta):
            problems.append("a Newtonian fluid needs n=1, tau_y=0, zeta=0")
        if self.kind is FluidKind.POWER_LAW and (self.tau_y or self.zeta):
            problems.append("a power-law fluid needs tau_y=0, zeta=0")
        if problems:
            raise RheologyError("; ".join(problems))

    @property
    def m(self) -> float:
        """Inverse flow-behaviour index 1/n."""
        return 1.0 / self.n

    @classmethod
    def newtonian(cls, viscosity: float = BLOOD_VISCOSITY, density: float = BLOOD_DENSITY):
        return cls(FluidKind.NEWTONIAN, K=viscosity, density=density)

    @classmethod
    def power_law(cls, K: float = POWER_LAW_K, n: float = POWER_LAW_N, density: float = BLOOD_DENSITY):
        return cls(FluidKind.POWER_LAW, K=K, n=n, density=density)

    @classmethod
    def herschel_bulkley(
        cls,
        K: float = POWER_LAW_K,
        n: float = POWER_LAW_N,
        tau_y: float = YIELD_STRESS,
        zeta: float = DEFAULT_ZETA,
        density: float = BLOOD_DENSITY,
    ):
        return cls(FluidKind.HERSCHEL_BULKLEY, K=K, n=n, tau_y=tau_y, zeta=zeta, density=density)


@dataclass(frozen=True)
class FlowConditions:
    """Mean and centreline speed of a fully developed flow."""

    model: FluidModel
    u_avg: float

    def __post_init__(self):
        if not self.u_avg > 0:
            raise RheologyError(f"u_avg must be positive, got {self.u_avg}")

    @property
    def u0(self) -> float:
        return centerline_ratio(self.model) * self.u_avg


def shear_stress(model: FluidModel, gamma_dot):
    """Shear stress for shear rate ``gamma_dot`` (1/s).

    For Herschel-Bulkley fluids a zero shear rate maps to the yield stress.
    """
    g = np.asarray(gamma_dot, dtype=float)
    if np.any(g < 0):
        raise RheologyError("shear rate must be non-negative")
    tau = model.K * g**model.n + model.tau_y
    return tau if tau.ndim else float(tau)


def centerline_ratio(model: FluidModel) -> float:
    """u0 / u_avg for the fully developed profile of ``model``."""
    if model.kind is FluidKind.NEWTONIAN:
        return 2.0
    m = model.m
    if model.kind is FluidKind.POWER_LAW:
        return (m + 3) / (m + 1)
    z = model.zeta
    return (m + 2) * (m + 3) / (2 * z**2 + 2 * (m + 1) * z + (m + 2) * (m + 1))


def plug_radius(model: FluidModel, r_lumen: float) -> tuple[float, bool]:
    """Plug radius and whether the model has a plug at all.

    Non-yield-stress models return ``(0.0, False)``.
    """
    if model.kind is not FluidKind.HERSCHEL_BULKLEY:
        return 0.0, False
    return model.zeta * r_lumen, True


def _profile_exponent(model: FluidModel) -> float:
    return 2.0 if model.kind is FluidKind.NEWTONIAN else model.m + 1


def axial_velocity(model: FluidModel, u0: float, r_lumen: float, rho):
    """Axial speed at radial distance ``rho`` from the axis."""
    if not r_lumen > 0:
        raise RheologyError(f"lumen radius must be positive, got {r_lumen}")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > r_lumen):
        raise RheologyError("radial position outside the lumen")
    p = _profile_exponent(model)
    rho_p, _ = plug_radius(model, r_lumen)
    if rho_p > 0:
        xi = np.clip((rho - rho_p) / (r_lumen - rho_p), 0.0, None)
    else:
        xi = rho / r_lumen
    u = u0 * (1.0 - xi**p)
    return u if u.ndim else float(u)


def zeta_from_wall_stress(tau_y: float, tau_w: float) -> float:
    """Yield-surface position from the yield and wall shear stresses.

    In pipe flow the shear stress grows linearly from the axis to the wall,
    so the plug ends where it drops to the yield stress.
    """
    if tau_y < 0:
        raise RheologyError("yield stress must be non-negative")
    if not tau_w > tau_y:
        raise RheologyError(f"unyielded channel: wall stress {tau_w} <= yield stress {tau_y}")
    return tau_y / tau_w


def mean_velocity_check(model: FluidModel, u0: float, r_lumen: float) -> float:
    """Disc-averaged axial speed by adaptive quadrature."""
    rho_p, _ = plug_radius(model, r_lumen)
    points = [rho_p] if 0 < rho_p < r_lumen else None

    def integrand(rho):
        return axial_velocity(model, u0, r_lumen, min(rho, r_lumen)) * rho

    flux, _ = integrate.quad(integrand, 0.0, r_lumen, points=points, epsabs=0.0, epsrel=1e-12, limit=200)
    return 2.0 * flux / r_lumen**2
