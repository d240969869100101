"""Vessel-with-plaque geometry.

The vessel is a straight cylinder of radius ``r_c`` running from the
transmitter plane (x = 0) to the receiver plane (x = l_c).  An axisymmetric
plaque narrows the lumen over a trapezoidal footprint::

    region 1 | region 2 | region 3 | region 4 | region 1
      r_c      ramp down   r_c - r_p   ramp up     r_c

All lengths are in metres.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np


class GeometryError(ValueError):
    """Raised for invalid geometries or out-of-range axial positions."""


@dataclass(frozen=True)
class VesselGeometry:
    r_c: float = 3.0e-3
    l_c: float = 50.0e-3
    r_p: float = 0.0
    l_p_outer: float = 20.0e-3
    l_p_inner: float = 10.0e-3
    x_center: Optional[float] = None
    _center: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        center = self.l_c / 2 if self.x_center is None else self.x_center
        object.__setattr__(self, "_center", float(center))

    @property
    def center(self) -> float:
        return self._center

    @property
    def breakpoints(self) -> tuple[float, float, float, float]:
        """Axial positions where the lumen radius changes slope.

        Returns ``(start, plateau_start, plateau_end, end)`` of the plaque.
        """
        half_out = self.l_p_outer / 2
        half_in = self.l_p_inner / 2
        c = self._center
        return (c - half_out, c - half_in, c + half_in, c + half_out)

    @property
    def min_radius(self) -> float:
        return self.r_c - self.r_p

    @property
    def ramp_length(self) -> float:
        return (self.l_p_outer - self.l_p_inner) / 2

    def with_plaque(self, r_p_rel: float) -> "VesselGeometry":
        """Copy of this geometry with ``r_p = r_p_rel * r_c``."""
        return replace(self, r_p=r_p_rel * self.r_c)


def validate(geom: VesselGeometry) -> list[str]:
    """Return every invariant violation of ``geom`` (empty list when valid)."""
    problems = []
    if not geom.r_c > 0:
        problems.append(f"channel radius must be positive, got r_c={geom.r_c}")
    if not geom.l_c > 0:
        problems.append(f"channel length must be positive, got l_c={geom.l_c}")
    if geom.r_p < 0:
        problems.append(f"plaque extension must be non-negative, got r_p={geom.r_p}")
    if geom.r_c > 0 and geom.r_p >= geom.r_c:
        problems.append(f"full occlusion: r_p={geom.r_p} >= r_c={geom.r_c}")
    if not geom.l_p_inner > 0:
        problems.append(f"plaque plateau length must be positive, got l_p_inner={geom.l_p_inner}")
    if geom.l_p_inner > geom.l_p_outer:
        problems.append(f"plateau longer than footprint: l_p_inner={geom.l_p_inner} > l_p_outer={geom.l_p_outer}")
    start, _, _, end = geom.breakpoints
    # relative slack so centred plaques that exactly fill the channel pass
    slack = 1e-12 * max(geom.l_c, 1.0)
    if start < -slack or end > geom.l_c + slack:
        problems.append(f"plaque footprint [{start:.6g}, {end:.6g}] m lies outside the channel [0, {geom.l_c:.6g}] m")
    return problems


def check(geom: VesselGeometry) -> VesselGeometry:
    """Raise :class:`GeometryError` listing all violations, else return ``geom``."""
    problems = validate(geom)
    if problems:
        raise GeometryError("; ".join(problems))
    return geom


def _check_range(geom: VesselGeometry, x: np.ndarray) -> None:
    if np.any(x < 0) or np.any(x > geom.l_c) or np.any(np.isnan(x)):
        raise GeometryError(f"axial position outside [0, {geom.l_c}] m")


def lumen_radius(geom: VesselGeometry, x):
    """Local lumen radius r(x) for scalar or array ``x``."""
    xa = np.asarray(x, dtype=float)
    _check_range(geom, xa)
    r = np.full(xa.shape, geom.r_c)
    if geom.r_p > 0:
        a, b, c, d = geom.breakpoints
        ramp = geom.ramp_length
        if ramp > 0:
            down = (xa >= a) & (xa < b)
            r[down] = geom.r_c - geom.r_p * (xa[down] - a) / ramp
            up = (xa >= c) & (xa < d)
            r[up] = geom.r_c - geom.r_p * (d - xa[up]) / ramp
        r[(xa >= b) & (xa < c)] = geom.min_radius
    return r if r.ndim else float(r)


def lumen_slope(geom: VesselGeometry, x):
    """dr/dx, using the downstream one-sided value at breakpoints."""
    xa = np.asarray(x, dtype=float)
    _check_range(geom, xa)
    s = np.zeros(xa.shape)
    if geom.r_p > 0 and geom.ramp_length > 0:
        a, b, c, d = geom.breakpoints
        slope = geom.r_p / geom.ramp_length
        s[(xa >= a) & (xa < b)] = -slope
        s[(xa >= c) & (xa < d)] = slope
    return s if s.ndim else float(s)


def region_of(geom: VesselGeometry, x):
    """Region id (1 to 4) containing ``x``; boundaries belong downstream."""
    xa = np.asarray(x, dtype=float)
    _check_range(geom, xa)
    a, b, c, d = geom.breakpoints
    region = np.ones(xa.shape, dtype=int)
    region[(xa >= a) & (xa < b)] = 2
    region[(xa >= b) & (xa < c)] = 3
    region[(xa >= c) & (xa < d)] = 4
    return region if region.ndim else int(region)
