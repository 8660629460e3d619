"""Truth-to-measurement sensor models, dead reckoning, and servo dynamics.

All randomness flows through explicit numpy Generators so measurement
streams are reproducible from (seed, scenario) alone.  With every sigma
at zero the measurement chain is the identity on truth up to unit/frame
conversion.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .autopilot.controller import ControlCommand
from .flightdyn.state import RigidBodyState, quat_to_dcm

DEG = np.pi / 180.0
METERS_PER_DEG = 111320.0


# --- readings ---------------------------------------------------------------

@dataclass
class ImuReading:
    """Attitude/rate/specific-force measurement at one instant.

    health=False marks the stream invalid (communication loss); values are
    then whatever the fault model left on the wire.
    """

    attitude: np.ndarray      # roll, pitch, yaw rad
    rates: np.ndarray         # p, q, r rad/s
    accel: np.ndarray         # specific force, body m/s^2
    health: bool
    timestamp: float

    def copy(self):
        return ImuReading(self.attitude.copy(), self.rates.copy(),
                          self.accel.copy(), self.health, self.timestamp)


@dataclass
class GpsReading:
    latitude: float           # deg
    longitude: float          # deg
    altitude: float           # m
    ground_speed: float       # m/s
    satellites: int
    fix_valid: bool
    timestamp: float

    def copy(self):
        return GpsReading(self.latitude, self.longitude, self.altitude,
                          self.ground_speed, self.satellites, self.fix_valid,
                          self.timestamp)


class NavSource(enum.Enum):
    GPS = "gps"
    DEAD_RECKONING = "dead_reckoning"


@dataclass
class NavSolution:
    """Fused navigation state consumed by the control laws."""

    position: np.ndarray      # local NED, m
    velocity_ned: np.ndarray  # m/s
    attitude: tuple           # roll, pitch, yaw rad
    rates: np.ndarray         # p, q, r rad/s
    airspeed: float           # m/s (ground speed stands in: zero-wind default)
    source: NavSource
    timestamp: float

    def copy(self):
        return NavSolution(self.position.copy(), self.velocity_ned.copy(),
                           tuple(self.attitude), self.rates.copy(),
                           self.airspeed, self.source, self.timestamp)


# --- noise models ------------------------------------------------------------

@dataclass
class ImuNoise:
    """1-sigma noise levels, sized from typical flight-computer accuracy
    figures (attitude 0.1 deg, rates 0.1 deg/s, accel 0.05 m/s^2)."""

    attitude_sigma: float = 0.1 * DEG
    rate_sigma: float = 0.1 * DEG
    accel_sigma: float = 0.05

    def scale(self, factor):
        return ImuNoise(self.attitude_sigma * factor, self.rate_sigma * factor,
                        self.accel_sigma * factor)


@dataclass
class GpsNoise:
    """RTK-grade defaults: 0.01 m horizontal, 0.02 m vertical, 0.03 m/s."""

    horizontal_sigma: float = 0.01
    vertical_sigma: float = 0.02
    speed_sigma: float = 0.03


@dataclass(frozen=True)
class GeoOrigin:
    latitude: float = 34.0    # deg
    longitude: float = 108.0  # deg

    def to_latlon(self, north, east):
        lat = self.latitude + north / METERS_PER_DEG
        lon = self.longitude + east / (METERS_PER_DEG * np.cos(np.radians(self.latitude)))
        return lat, lon

    def to_local(self, lat, lon):
        north = (lat - self.latitude) * METERS_PER_DEG
        east = (lon - self.longitude) * METERS_PER_DEG * np.cos(np.radians(self.latitude))
        return north, east


# --- measurement functions ----------------------------------------------------

DEFAULT_SATELLITES = 15


def imu_measure(truth: RigidBodyState, noise: ImuNoise, rng: np.random.Generator,
                specific_force_body=None) -> ImuReading:
    """IMU sample: truth plus zero-mean Gaussian noise.

    ``specific_force_body`` is (applied force)/mass from the dynamics; when
    omitted, steady coordinated flight is assumed (accelerometer reads
    exactly the reaction to gravity).
    """
    if specific_force_body is None:
        g_body = quat_to_dcm(truth.quaternion).T @ np.array([0.0, 0.0, 9.81])
        specific_force_body = -g_body
    att = np.array(truth.euler)
    rates = truth.rates.copy()
    accel = np.asarray(specific_force_body, dtype=float).copy()
    if noise.attitude_sigma > 0:
        att += rng.normal(0.0, noise.attitude_sigma, 3)
    if noise.rate_sigma > 0:
        rates += rng.normal(0.0, noise.rate_sigma, 3)
    if noise.accel_sigma > 0:
        accel += rng.normal(0.0, noise.accel_sigma, 3)
    return ImuReading(attitude=att, rates=rates, accel=accel, health=True,
                      timestamp=truth.time)


def gps_measure(truth: RigidBodyState, origin: GeoOrigin, noise: GpsNoise,
                rng: np.random.Generator) -> GpsReading:
    """GPS epoch: flat-Earth lat/lon about the scenario origin."""
    pos = truth.position.copy()
    v_ned = truth.velocity_ned
    gs = float(np.hypot(v_ned[0], v_ned[1]))
    if noise.horizontal_sigma > 0:
        pos[0] += rng.normal(0.0, noise.horizontal_sigma)
        pos[1] += rng.normal(0.0, noise.horizontal_sigma)
    if noise.vertical_sigma > 0:
        pos[2] += rng.normal(0.0, noise.vertical_sigma)
    if noise.speed_sigma > 0:
        gs += rng.normal(0.0, noise.speed_sigma)
    lat, lon = origin.to_latlon(pos[0], pos[1])
    return GpsReading(latitude=lat, longitude=lon, altitude=-float(pos[2]),
                      ground_speed=gs, satellites=DEFAULT_SATELLITES,
                      fix_valid=True, timestamp=truth.time)


def nav_from_gps_imu(gps: GpsReading, imu: ImuReading, origin: GeoOrigin,
                     prev: NavSolution = None) -> NavSolution:
    """Blend the position fix with inertial attitude/rates.

    NED velocity comes from differencing GPS epochs (10 Hz fixes make this
    quiet at RTK noise levels); the first solution starts at zero velocity.
    """
    north, east = origin.to_local(gps.latitude, gps.longitude)
    pos = np.array([north, east, -gps.altitude])
    if prev is not None and gps.timestamp > prev.timestamp:
        vel = (pos - prev.position) / (gps.timestamp - prev.timestamp)
    elif prev is not None:
        vel = prev.velocity_ned.copy()
    else:
        vel = np.zeros(3)
    speed = float(np.hypot(vel[0], vel[1])) if prev is not None else gps.ground_speed
    return NavSolution(position=pos, velocity_ned=vel,
                       attitude=tuple(imu.attitude), rates=imu.rates.copy(),
                       airspeed=speed, source=NavSource.GPS,
                       timestamp=gps.timestamp)


def nav_from_truth(truth: RigidBodyState) -> NavSolution:
    """Perfect navigation solution (experiments / zero-noise checks)."""
    return NavSolution(position=truth.position.copy(),
                       velocity_ned=truth.velocity_ned,
                       attitude=truth.euler, rates=truth.rates.copy(),
                       airspeed=truth.airspeed, source=NavSource.GPS,
                       timestamp=truth.time)


def dead_reckon(previous: NavSolution, imu: ImuReading, dt: float,
                gravity: float = 9.81) -> NavSolution:
    """Propagate position from inertial measurements alone.

    Specific force is rotated through the measured attitude, gravity is
    restored, and velocity/position integrate forward.  Unaided, the error
    grows without bound; that is the point.
    """
    from .flightdyn.state import quat_from_euler

    roll, pitch, yaw = imu.attitude
    dcm = quat_to_dcm(quat_from_euler(roll, pitch, yaw))
    accel_ned = dcm @ imu.accel + np.array([0.0, 0.0, gravity])
    vel = previous.velocity_ned + accel_ned * dt
    pos = previous.position + vel * dt
    return NavSolution(position=pos, velocity_ned=vel,
                       attitude=tuple(imu.attitude), rates=imu.rates.copy(),
                       airspeed=float(np.hypot(vel[0], vel[1])),
                       source=NavSource.DEAD_RECKONING, timestamp=imu.timestamp)


# --- servo dynamics ------------------------------------------------------------

@dataclass
class SurfaceActual:
    """Post-servo surface deflections (rad) and achieved throttle."""

    elevator: float = 0.0
    aileron: float = 0.0
    rudder: float = 0.0
    throttle: float = 0.0


@dataclass
class ServoConfig:
    time_constant: float = 0.05        # s, first-order lag
    rate_limit: float = 200.0 * DEG    # rad/s slew
    throttle_time_constant: float = 0.2


class ServoBank:
    """First-order lag + rate limit + position limit on each channel.

    The lag uses the exact discrete solution, so a step settles along
    1 - exp(-t/tau) whenever the slew limit is not active.
    """

    def __init__(self, position_limit: float, config: ServoConfig = None,
                 initial: ControlCommand = None):
        self.config = config or ServoConfig()
        self.position_limit = position_limit
        init = initial or ControlCommand(limit=position_limit)
        self._pos = np.array([init.elevator, init.aileron, init.rudder])
        self._throttle = init.throttle

    @property
    def state(self) -> SurfaceActual:
        return SurfaceActual(elevator=float(self._pos[0]), aileron=float(self._pos[1]),
                             rudder=float(self._pos[2]), throttle=self._throttle)

    def update(self, command: ControlCommand, dt: float) -> SurfaceActual:
        cfg = self.config
        target = np.array([command.elevator, command.aileron, command.rudder])
        alpha = 1.0 - np.exp(-dt / cfg.time_constant)
        delta = (target - self._pos) * alpha
        max_step = cfg.rate_limit * dt
        delta = np.clip(delta, -max_step, max_step)
        self._pos = np.clip(self._pos + delta, -self.position_limit,
                            self.position_limit)
        ta = 1.0 - np.exp(-dt / cfg.throttle_time_constant)
        self._throttle = float(np.clip(
            self._throttle + (command.throttle - self._throttle) * ta, 0.0, 1.0))
        return self.state

    def force(self, actual: SurfaceActual):
        """Override the physical state (stuck/loose faults act here)."""
        self._pos = np.array([actual.elevator, actual.aileron, actual.rudder])
        self._throttle = actual.throttle
