"""Straight-and-level trim solver.

Finds (alpha, elevator, throttle) so the full nonlinear model has zero
body-axis force and moment derivatives at a given altitude/airspeed, with
pitch = alpha (zero flight-path angle) and wings level.
"""

import numpy as np
from scipy.optimize import least_squares

from ..errors import TrimError
from .aircraft import AircraftConfig
from .dynamics import applied_forces, derivatives
from .state import RigidBodyState, quat_from_euler

RESIDUAL_TOL = 1e-6


def _level_state(alpha: float, altitude: float, airspeed: float,
                 heading: float) -> RigidBodyState:
    return RigidBodyState(
        time=0.0,
        position=np.array([0.0, 0.0, -altitude]),
        velocity_body=np.array([airspeed * np.cos(alpha), 0.0,
                                airspeed * np.sin(alpha)]),
        quaternion=quat_from_euler(0.0, alpha, heading),
        rates=np.zeros(3),
    )


def _residual(x, altitude, airspeed, heading, config):
    alpha, elevator, throttle = x
    state = _level_state(alpha, altitude, airspeed, heading)
    force, moment = applied_forces(state, (elevator, 0.0, 0.0),
                                   float(np.clip(throttle, 0.0, 1.0)), config)
    ydot = derivatives(state, force, moment, config)
    # udot, vdot, wdot, pdot, qdot, rdot
    return np.concatenate([ydot[3:6], ydot[10:13]])


def trim(config: AircraftConfig, altitude: float, airspeed: float,
         heading: float = 0.0):
    """Solve for a level-flight equilibrium.

    Returns (state, command) where command is a ControlCommand with the
    trim elevator and throttle.  Raises TrimError (with the best residual)
    when no equilibrium exists within the table envelope.
    """
    from ..autopilot.controller import ControlCommand

    if airspeed <= 0:
        raise TrimError(f"airspeed {airspeed} m/s not flyable")
    lim = config.surface_limit
    x0 = np.array([0.02, 0.0, 0.5])
    try:
        sol = least_squares(
            _residual, x0, args=(altitude, airspeed, heading, config),
            bounds=([-0.35, -lim, 0.0], [0.40, lim, 1.0]),
            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400)
    except ValueError as exc:
        raise TrimError(f"trim solver failed: {exc}") from exc
    residual = float(np.linalg.norm(
        _residual(sol.x, altitude, airspeed, heading, config)))
    if residual > RESIDUAL_TOL:
        raise TrimError(
            f"no trim at {altitude:.0f} m / {airspeed:.1f} m/s "
            f"(residual {residual:.2e})", residual=residual)
    alpha, elevator, throttle = sol.x
    state = _level_state(alpha, altitude, airspeed, heading)
    command = ControlCommand(elevator=float(elevator), aileron=0.0, rudder=0.0,
                             throttle=float(throttle),
                             limit=config.surface_limit)
    return state, command
