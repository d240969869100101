"""Compiled per-particle update used by :mod:`plaquemc.transport`.

The scalar radius and profile helpers mirror :mod:`plaquemc.geometry` and
:mod:`plaquemc.rheology`; the test suite cross-checks them.
"""

import math

import numba as nb
import numpy as np

from .rng import draw_normal_pair

MAX_REFLECTIONS = 8

# fluid kind codes
NEWTONIAN, POWER_LAW, HERSCHEL_BULKLEY = 0, 1, 2


@nb.njit(cache=True, nogil=True)
def radius_slope(x, r_c, r_p, ramp, a, b, c, d):
    if r_p <= 0.0 or x < a or x >= d:
        return r_c, 0.0
    if x < b:
        return r_c - r_p * (x - a) / ramp, -(r_p / ramp)
    if x < c:
        return r_c - r_p, 0.0
    return r_c - r_p * (d - x) / ramp, r_p / ramp


@nb.njit(cache=True, nogil=True)
def axial_speed(p_exp, zeta, u0, r, rho):
    if rho >= r:
        return 0.0
    if zeta > 0.0:
        rho_p = zeta * r
        if rho < rho_p:
            return u0
        xi = (rho - rho_p) / (r - rho_p)
    else:
        xi = rho / r
    return u0 * (1.0 - xi**p_exp)


@nb.njit(cache=True, nogil=True)
def velocity(x, y, z, u_avg, geo, flu):
    """Streamtube velocity; ``geo`` and ``flu`` are packed parameter arrays."""
    r_c = geo[0]
    r, slope = radius_slope(x, r_c, geo[2], geo[3], geo[4], geo[5], geo[6], geo[7])
    rho = math.sqrt(y * y + z * z)
    scale = r_c / r
    u0 = flu[0] * u_avg * scale * scale
    ux = axial_speed(flu[1], flu[2], u0, r, min(rho, r))
    follow = ux * slope / r
    return ux, y * follow, z * follow


@nb.njit(cache=True, nogil=True)
def advance(x, y, z, t, dt, u_avg, sigma, seed, pid, k, geo, flu):
    """One Euler-Maruyama step.

    The axial drift is explicit.  The radial drift is applied as the exact
    streamtube map ``rho -> rho * r(x_new) / r(x)``, which agrees with the
    radial velocity to first order in ``dt`` but keeps ``rho / r`` constant
    through the ramps at any step size.

    Returns ``(x, y, z, arrived, arrival_time)``; an arrived particle keeps
    its pre-step position.
    """
    l_c = geo[1]
    r_c = geo[0]
    ux, _, _ = velocity(x, y, z, u_avg, geo, flu)
    xn = x + ux * dt
    r_old, _ = radius_slope(x, r_c, geo[2], geo[3], geo[4], geo[5], geo[6], geo[7])
    r_new, _ = radius_slope(xn, r_c, geo[2], geo[3], geo[4], geo[5], geo[6], geo[7])
    f = r_new / r_old
    yn = y * f
    zn = z * f
    if sigma > 0.0:
        counter = np.uint64(2) * np.uint64(k)
        n1, n2 = draw_normal_pair(seed, pid, counter)
        n3, _ = draw_normal_pair(seed, pid, counter + np.uint64(1))
        xn += sigma * n1
        yn += sigma * n2
        zn += sigma * n3
    if xn >= l_c:
        frac = (l_c - x) / (xn - x)
        return x, y, z, True, t + frac * dt
    if xn < 0.0:
        xn = -xn
    r_wall, _ = radius_slope(xn, r_c, geo[2], geo[3], geo[4], geo[5], geo[6], geo[7])
    rho = math.sqrt(yn * yn + zn * zn)
    if rho > r_wall:
        # signed coordinate along the original radial direction
        s = rho
        for _ in range(MAX_REFLECTIONS):
            if s > r_wall:
                s = 2.0 * r_wall - s
            elif s < -r_wall:
                s = -2.0 * r_wall - s
            else:
                break
        if s > r_wall:
            s = r_wall
        elif s < -r_wall:
            s = -r_wall
        f = s / rho
        yn *= f
        zn *= f
    return xn, yn, zn, False, 0.0


@nb.njit(cache=True, nogil=True)
def step_block(pos, pids, alive, arrival, t, dt, u_avg, sigma, seed, k, geo, flu):
    for i in range(pos.shape[0]):
        if not alive[i]:
            continue
        x, y, z, hit, t_hit = advance(
            pos[i, 0], pos[i, 1], pos[i, 2], t, dt, u_avg, sigma, seed, np.uint64(pids[i]), k, geo, flu
        )
        if hit:
            alive[i] = False
            arrival[i] = t_hit
        else:
            pos[i, 0] = x
            pos[i, 1] = y
            pos[i, 2] = z


@nb.njit(cache=True, nogil=True)
def run_block(pos, pids, alive, arrival, u_avg_steps, k0, dt, sigma, seed, geo, flu):
    """Advance each particle through steps ``k0 .. len(u_avg_steps) - 1``."""
    nsteps = u_avg_steps.shape[0]
    for i in range(pos.shape[0]):
        if not alive[i]:
            continue
        pid = np.uint64(pids[i])
        x = pos[i, 0]
        y = pos[i, 1]
        z = pos[i, 2]
        for k in range(k0, nsteps):
            t = k * dt
            x, y, z, hit, t_hit = advance(x, y, z, t, dt, u_avg_steps[k], sigma, seed, pid, k, geo, flu)
            if hit:
                alive[i] = False
                arrival[i] = t_hit
                break
        pos[i, 0] = x
        pos[i, 1] = y
        pos[i, 2] = z
