"""Public dynamics API over the jitted kernels."""

from dataclasses import dataclass

import numpy as np

from ..errors import CommandError, SimulationDiverged
from . import _core
from .aircraft import AircraftConfig
from .state import RigidBodyState

DT_DEFAULT = 0.001  # s, fixed physics step

_ZERO_WIND = np.zeros(3)


@dataclass(frozen=True)
class FlowState:
    """Wind-relative flow quantities derived from a truth state."""

    airspeed: float   # m/s
    alpha: float      # rad
    beta: float       # rad


def flow_state(state: RigidBodyState, wind_ned=None) -> FlowState:
    from .state import quat_to_dcm

    v_rel = state.velocity_body.copy()
    if wind_ned is not None:
        v_rel -= quat_to_dcm(state.quaternion).T @ np.asarray(wind_ned, dtype=float)
    vmag = float(np.linalg.norm(v_rel))
    if vmag > 1e-9:
        alpha = float(np.arctan2(v_rel[2], v_rel[0]))
        beta = float(np.arcsin(np.clip(v_rel[1] / vmag, -1.0, 1.0)))
    else:
        alpha = beta = 0.0
    return FlowState(airspeed=vmag, alpha=alpha, beta=beta)


def aero_force_moment(state: RigidBodyState, surfaces, config: AircraftConfig,
                      wind_ned=None):
    """Aerodynamic body force (N) and moment (N m) for given deflections.

    ``surfaces`` is anything with elevator/aileron/rudder in rad (a
    SurfaceActual, a ControlCommand, or a 3-sequence).
    """
    de, da, dr = _unpack_surfaces(surfaces)
    wind = _ZERO_WIND if wind_ned is None else np.asarray(wind_ned, dtype=float)
    fm = _core.forces_moments(state.as_vector(), de, da, dr, 0.0, wind,
                              config.packed())
    # forces_moments folds thrust into fx; throttle 0 contributes exactly 0.
    return fm[:3].copy(), fm[3:].copy()


def propulsion_thrust(throttle: float, airspeed: float, altitude: float,
                      config: AircraftConfig) -> float:
    """Installed thrust along body x, from the bench-test tables."""
    if not (0.0 <= throttle <= 1.0):
        raise CommandError(f"throttle {throttle} outside [0, 1]")
    frac = config.thrust.throttle_curve(throttle)
    return float(frac * config.thrust.max_thrust(airspeed, altitude))


def derivatives(state: RigidBodyState, force_body, moment_body,
                config: AircraftConfig) -> np.ndarray:
    """13-state time derivative for an applied force/moment.

    ``force_body`` excludes gravity; gravity (config.gravity, +down) is
    added internally so zero applied force means free fall.
    """
    fm = np.concatenate([np.asarray(force_body, dtype=float),
                         np.asarray(moment_body, dtype=float)])
    return _core.state_derivative(state.as_vector(), fm, config.packed())


def integrate_step(state: RigidBodyState, force_body, moment_body,
                   config: AircraftConfig, dt: float = DT_DEFAULT,
                   substeps: int = 1) -> RigidBodyState:
    """RK4 advance under a frozen applied force/moment.

    Raises SimulationDiverged (carrying the last finite state) if the
    integration leaves the finite domain.
    """
    if dt <= 0:
        raise CommandError(f"dt must be positive, got {dt}")
    fm = np.concatenate([np.asarray(force_body, dtype=float),
                         np.asarray(moment_body, dtype=float)])
    if not np.all(np.isfinite(fm)):
        raise SimulationDiverged("non-finite force/moment input", last_state=state)
    y, ok = _core.advance_constant_wrench(state.as_vector(), fm, config.packed(),
                                          dt, substeps)
    t_new = state.time + dt * substeps
    if not ok:
        raise SimulationDiverged(
            "integration diverged",
            last_state=RigidBodyState.from_vector(y, state.time))
    return RigidBodyState.from_vector(y, t_new)


def step_closed_loop(state: RigidBodyState, surfaces, throttle: float,
                     config: AircraftConfig, dt: float, substeps: int,
                     wind_ned=None) -> RigidBodyState:
    """RK4 advance with the full force model (aero re-evaluated per stage)
    and frozen surface deflections/throttle.  Used by the simulation loop.
    """
    de, da, dr = _unpack_surfaces(surfaces)
    wind = _ZERO_WIND if wind_ned is None else np.asarray(wind_ned, dtype=float)
    y, ok = _core.advance(state.as_vector(), de, da, dr, float(throttle), wind,
                          config.packed(), dt, substeps)
    t_new = state.time + dt * substeps
    if not ok:
        raise SimulationDiverged(
            "integration diverged",
            last_state=RigidBodyState.from_vector(y, state.time))
    return RigidBodyState.from_vector(y, t_new)


def applied_forces(state: RigidBodyState, surfaces, throttle: float,
                   config: AircraftConfig, wind_ned=None):
    """(force, moment) including thrust, excluding gravity.

    force/mass is the specific force an ideal accelerometer reads.
    """
    de, da, dr = _unpack_surfaces(surfaces)
    wind = _ZERO_WIND if wind_ned is None else np.asarray(wind_ned, dtype=float)
    fm = _core.forces_moments(state.as_vector(), de, da, dr, float(throttle),
                              wind, config.packed())
    return fm[:3].copy(), fm[3:].copy()


def total_energy(state: RigidBodyState, config: AircraftConfig) -> float:
    """Mechanical energy: translational + rotational KE + potential."""
    m = config.mass
    v2 = float(np.dot(state.velocity_body, state.velocity_body))
    p, q, r = state.rates
    rot = 0.5 * (config.inertia.ixx * p * p + config.inertia.iyy * q * q
                 + config.inertia.izz * r * r)
    return 0.5 * m * v2 + rot + m * config.gravity * state.altitude


def _unpack_surfaces(surfaces):
    if hasattr(surfaces, "elevator"):
        return float(surfaces.elevator), float(surfaces.aileron), float(surfaces.rudder)
    de, da, dr = surfaces
    return float(de), float(da), float(dr)
