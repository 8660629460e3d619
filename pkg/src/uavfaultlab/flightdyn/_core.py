"""Jitted inner loop: force build-up and fixed-step RK4 advance.

Everything here works on the flat 13-state vector
``[pn pe pd u v w q0 q1 q2 q3 p q r]`` and the packed parameter tuple
produced by ``AircraftConfig.packed()``.  Keep the public dataclass API in
``dynamics.py``; this module is deliberately branch-light so numba emits
tight code.
"""

import numpy as np
from numba import njit

# Packed-parameter tuple indices (see AircraftConfig.packed()).
ALPHA_GRID, CL_TAB, CD_TAB, CM_TAB = 0, 1, 2, 3
BETA_GRID, CY_TAB, CLR_TAB, CN_TAB = 4, 5, 6, 7
SDERIV = 8
THR_X, THR_Y, THR_V, THR_H, THR_MAP = 9, 10, 11, 12, 13
MASS, IXX, IYY, IZZ, SREF, BSPAN, CHORD, GRAV = 14, 15, 16, 17, 18, 19, 20, 21

# Scalar derivative indices (see aircraft.DERIV_NAMES).
D_CL_Q, D_CL_DE = 0, 1
D_CY_P, D_CY_R, D_CY_DA, D_CY_DR = 2, 3, 4, 5
D_CLP, D_CLR, D_CL_DA, D_CL_DR = 6, 7, 8, 9
D_CM_Q, D_CM_DE = 10, 11
D_CN_P, D_CN_R, D_CN_DA, D_CN_DR = 12, 13, 14, 15


@njit(cache=True)
def _air_density_sound(alt):
    # ISA troposphere, altitude clamped to the table range so crash
    # trajectories below the origin plane stay finite.
    h = min(max(alt, -500.0), 11000.0)
    t = 288.15 - 0.0065 * h
    p = 101325.0 * (t / 288.15) ** 5.255879622
    rho = p / (287.05287 * t)
    a = np.sqrt(1.4 * 287.05287 * t)
    return rho, a


@njit(cache=True)
def _bilinear(x, y, xg, yg, z):
    # Clamped bilinear lookup; exact at nodes.
    if x < xg[0]:
        x = xg[0]
    elif x > xg[-1]:
        x = xg[-1]
    if y < yg[0]:
        y = yg[0]
    elif y > yg[-1]:
        y = yg[-1]
    i = np.searchsorted(xg, x) - 1
    if i < 0:
        i = 0
    elif i > len(xg) - 2:
        i = len(xg) - 2
    j = np.searchsorted(yg, y) - 1
    if j < 0:
        j = 0
    elif j > len(yg) - 2:
        j = len(yg) - 2
    tx = (x - xg[i]) / (xg[i + 1] - xg[i])
    ty = (y - yg[j]) / (yg[j + 1] - yg[j])
    z00 = z[i, j]
    z01 = z[i, j + 1]
    z10 = z[i + 1, j]
    z11 = z[i + 1, j + 1]
    return (z00 * (1 - tx) * (1 - ty) + z10 * tx * (1 - ty)
            + z01 * (1 - tx) * ty + z11 * tx * ty)


@njit(cache=True)
def aero_coefficients(alpha, beta, phat, qhat, rhat, de, da, dr, mp):
    """Six dimensionless coefficients from the table build-up."""
    sd = mp[SDERIV]
    cl = np.interp(alpha, mp[ALPHA_GRID], mp[CL_TAB]) + sd[D_CL_Q] * qhat + sd[D_CL_DE] * de
    cd = np.interp(alpha, mp[ALPHA_GRID], mp[CD_TAB])
    cy = (np.interp(beta, mp[BETA_GRID], mp[CY_TAB])
          + sd[D_CY_P] * phat + sd[D_CY_R] * rhat + sd[D_CY_DA] * da + sd[D_CY_DR] * dr)
    croll = (np.interp(beta, mp[BETA_GRID], mp[CLR_TAB])
             + sd[D_CLP] * phat + sd[D_CLR] * rhat + sd[D_CL_DA] * da + sd[D_CL_DR] * dr)
    cm = np.interp(alpha, mp[ALPHA_GRID], mp[CM_TAB]) + sd[D_CM_Q] * qhat + sd[D_CM_DE] * de
    cn = (np.interp(beta, mp[BETA_GRID], mp[CN_TAB])
          + sd[D_CN_P] * phat + sd[D_CN_R] * rhat + sd[D_CN_DA] * da + sd[D_CN_DR] * dr)
    return cl, cd, cy, croll, cm, cn


@njit(cache=True)
def forces_moments(y, de, da, dr, throttle, wind, mp):
    """Applied (non-gravitational) body force and moment.

    Returns a 6-vector [fx fy fz mx my mz]: aerodynamic force from the
    clamped table build-up rotated wind->body, plus thrust along +x.
    """
    u = y[3]
    v = y[4]
    w = y[5]
    q0, q1, q2, q3 = y[6], y[7], y[8], y[9]
    p = y[10]
    q = y[11]
    r = y[12]

    # Wind-relative velocity in body axes (constant NED wind).
    wn, we, wd = wind[0], wind[1], wind[2]
    uw = u - ((q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3) * wn
              + 2 * (q1 * q2 + q0 * q3) * we + 2 * (q1 * q3 - q0 * q2) * wd)
    vw = v - (2 * (q1 * q2 - q0 * q3) * wn
              + (q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3) * we
              + 2 * (q2 * q3 + q0 * q1) * wd)
    ww = w - (2 * (q1 * q3 + q0 * q2) * wn + 2 * (q2 * q3 - q0 * q1) * we
              + (q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3) * wd)

    vmag = np.sqrt(uw * uw + vw * vw + ww * ww)
    if vmag > 1e-9:
        alpha = np.arctan2(ww, uw)
        sinb = vw / vmag
        if sinb > 1.0:
            sinb = 1.0
        elif sinb < -1.0:
            sinb = -1.0
        beta = np.arcsin(sinb)
    else:
        alpha = 0.0
        beta = 0.0

    rho, _ = _air_density_sound(-y[2])
    qbar = 0.5 * rho * vmag * vmag
    vnorm = vmag if vmag > 1.0 else 1.0
    bspan = mp[BSPAN]
    chord = mp[CHORD]
    phat = p * bspan / (2.0 * vnorm)
    qhat = q * chord / (2.0 * vnorm)
    rhat = r * bspan / (2.0 * vnorm)

    cl, cd, cy, croll, cm, cn = aero_coefficients(
        alpha, beta, phat, qhat, rhat, de, da, dr, mp)

    sref = mp[SREF]
    lift = qbar * sref * cl
    drag = qbar * sref * cd
    side = qbar * sref * cy

    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    fx = -ca * cb * drag - ca * sb * side + sa * lift
    fy = -sb * drag + cb * side
    fz = -sa * cb * drag - sa * sb * side - ca * lift

    thrust = (np.interp(throttle, mp[THR_X], mp[THR_Y])
              * _bilinear(vmag, -y[2], mp[THR_V], mp[THR_H], mp[THR_MAP]))
    fx += thrust

    out = np.empty(6)
    out[0] = fx
    out[1] = fy
    out[2] = fz
    out[3] = qbar * sref * bspan * croll
    out[4] = qbar * sref * chord * cm
    out[5] = qbar * sref * bspan * cn
    return out


@njit(cache=True)
def state_derivative(y, fm, mp):
    """Newton-Euler 13-state derivative; gravity added here (+down)."""
    u = y[3]
    v = y[4]
    w = y[5]
    q0, q1, q2, q3 = y[6], y[7], y[8], y[9]
    p = y[10]
    q = y[11]
    r = y[12]
    mass = mp[MASS]
    g = mp[GRAV]

    fx = fm[0] + 2 * (q1 * q3 - q0 * q2) * g * mass
    fy = fm[1] + 2 * (q2 * q3 + q0 * q1) * g * mass
    fz = fm[2] + (q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3) * g * mass

    out = np.empty(13)
    out[0] = ((q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3) * u
              + 2 * (q1 * q2 - q0 * q3) * v + 2 * (q1 * q3 + q0 * q2) * w)
    out[1] = (2 * (q1 * q2 + q0 * q3) * u
              + (q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3) * v
              + 2 * (q2 * q3 - q0 * q1) * w)
    out[2] = (2 * (q1 * q3 - q0 * q2) * u + 2 * (q2 * q3 + q0 * q1) * v
              + (q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3) * w)
    out[3] = r * v - q * w + fx / mass
    out[4] = p * w - r * u + fy / mass
    out[5] = q * u - p * v + fz / mass
    out[6] = 0.5 * (-q1 * p - q2 * q - q3 * r)
    out[7] = 0.5 * (q0 * p + q2 * r - q3 * q)
    out[8] = 0.5 * (q0 * q + q3 * p - q1 * r)
    out[9] = 0.5 * (q0 * r + q1 * q - q2 * p)
    ixx, iyy, izz = mp[IXX], mp[IYY], mp[IZZ]
    out[10] = ((iyy - izz) * q * r + fm[3]) / ixx
    out[11] = ((izz - ixx) * p * r + fm[4]) / iyy
    out[12] = ((ixx - iyy) * p * q + fm[5]) / izz
    return out


@njit(cache=True)
def _full_derivative(y, de, da, dr, throttle, wind, mp):
    return state_derivative(y, forces_moments(y, de, da, dr, throttle, wind, mp), mp)


@njit(cache=True)
def advance(y, de, da, dr, throttle, wind, mp, dt, nsteps):
    """RK4-advance nsteps with surfaces/throttle frozen; aero re-evaluated
    at every stage.  Quaternion renormalized each step.

    Returns (state, ok); ok=False means a non-finite value appeared and
    ``state`` is the last finite one.
    """
    for _ in range(nsteps):
        k1 = _full_derivative(y, de, da, dr, throttle, wind, mp)
        k2 = _full_derivative(y + 0.5 * dt * k1, de, da, dr, throttle, wind, mp)
        k3 = _full_derivative(y + 0.5 * dt * k2, de, da, dr, throttle, wind, mp)
        k4 = _full_derivative(y + dt * k3, de, da, dr, throttle, wind, mp)
        ynew = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        qn = np.sqrt(ynew[6] ** 2 + ynew[7] ** 2 + ynew[8] ** 2 + ynew[9] ** 2)
        if not np.isfinite(qn) or qn < 1e-12:
            return y, False
        ynew[6] /= qn
        ynew[7] /= qn
        ynew[8] /= qn
        ynew[9] /= qn
        ok = True
        for i in range(13):
            if not np.isfinite(ynew[i]):
                ok = False
                break
        if not ok:
            return y, False
        y = ynew
    return y, True


@njit(cache=True)
def advance_constant_wrench(y, fm, mp, dt, nsteps):
    """RK4-advance with a frozen applied force/moment 6-vector."""
    for _ in range(nsteps):
        k1 = state_derivative(y, fm, mp)
        k2 = state_derivative(y + 0.5 * dt * k1, fm, mp)
        k3 = state_derivative(y + 0.5 * dt * k2, fm, mp)
        k4 = state_derivative(y + dt * k3, fm, mp)
        ynew = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        qn = np.sqrt(ynew[6] ** 2 + ynew[7] ** 2 + ynew[8] ** 2 + ynew[9] ** 2)
        if not np.isfinite(qn) or qn < 1e-12:
            return y, False
        ynew[6] /= qn
        ynew[7] /= qn
        ynew[8] /= qn
        ynew[9] /= qn
        ok = True
        for i in range(13):
            if not np.isfinite(ynew[i]):
                ok = False
                break
        if not ok:
            return y, False
        y = ynew
    return y, True
