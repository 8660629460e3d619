"""Rigid-body truth state and quaternion/Euler conversions.

Frames: flat-Earth local NED (north/east/down) for position, body axes
(x forward, y right, z down) for velocity and rates.  The attitude
quaternion is scalar-first and rotates body vectors into NED.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError

QUAT_NORM_TOL = 1e-9


def quat_from_euler(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Aerospace ZYX (yaw-pitch-roll) Euler angles to quaternion."""
    cr, sr = np.cos(roll / 2), np.sin(roll / 2)
    cp, sp = np.cos(pitch / 2), np.sin(pitch / 2)
    cy, sy = np.cos(yaw / 2), np.sin(yaw / 2)
    return np.array([
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ])


def quat_to_euler(q: np.ndarray):
    """Quaternion to (roll, pitch, yaw), pitch clamped at +/-90 deg."""
    q0, q1, q2, q3 = q
    roll = np.arctan2(2 * (q0 * q1 + q2 * q3), 1 - 2 * (q1 * q1 + q2 * q2))
    s = np.clip(2 * (q0 * q2 - q3 * q1), -1.0, 1.0)
    pitch = np.arcsin(s)
    yaw = np.arctan2(2 * (q0 * q3 + q1 * q2), 1 - 2 * (q2 * q2 + q3 * q3))
    return float(roll), float(pitch), float(yaw)


def quat_to_dcm(q: np.ndarray) -> np.ndarray:
    """Rotation matrix taking body-frame vectors to NED."""
    q0, q1, q2, q3 = q
    return np.array([
        [q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2)],
        [2 * (q1 * q2 + q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2 * (q2 * q3 - q0 * q1)],
        [2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3],
    ])


@dataclass
class RigidBodyState:
    """Full 6-DOF truth state at one instant."""

    time: float = 0.0
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))       # NED, m
    velocity_body: np.ndarray = field(default_factory=lambda: np.zeros(3))  # u,v,w m/s
    quaternion: np.ndarray = field(default_factory=lambda: np.array([1.0, 0, 0, 0]))
    rates: np.ndarray = field(default_factory=lambda: np.zeros(3))          # p,q,r rad/s

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity_body = np.asarray(self.velocity_body, dtype=float)
        self.quaternion = np.asarray(self.quaternion, dtype=float)
        self.rates = np.asarray(self.rates, dtype=float)
        self.validate()

    def validate(self):
        vec = self.as_vector()
        if not np.all(np.isfinite(vec)):
            raise ConfigurationError("state contains non-finite values")
        n = float(np.linalg.norm(self.quaternion))
        if abs(n - 1.0) > 1e-6:
            raise ConfigurationError(f"quaternion norm {n} too far from 1")

    # -- accessors ---------------------------------------------------------

    @property
    def roll(self) -> float:
        return quat_to_euler(self.quaternion)[0]

    @property
    def pitch(self) -> float:
        return quat_to_euler(self.quaternion)[1]

    @property
    def yaw(self) -> float:
        return quat_to_euler(self.quaternion)[2]

    @property
    def euler(self):
        return quat_to_euler(self.quaternion)

    @property
    def altitude(self) -> float:
        """Geometric altitude above the NED origin plane, m."""
        return -float(self.position[2])

    @property
    def airspeed(self) -> float:
        """Still-air airspeed (|velocity_body|), m/s."""
        return float(np.linalg.norm(self.velocity_body))

    @property
    def velocity_ned(self) -> np.ndarray:
        return quat_to_dcm(self.quaternion) @ self.velocity_body

    # -- flat packing for the integrator kernels ---------------------------

    def as_vector(self) -> np.ndarray:
        """13-vector [pn pe pd u v w q0 q1 q2 q3 p q r]."""
        return np.concatenate(
            [self.position, self.velocity_body, self.quaternion, self.rates])

    @classmethod
    def from_vector(cls, y: np.ndarray, time: float) -> "RigidBodyState":
        return cls(time=time, position=y[0:3].copy(), velocity_body=y[3:6].copy(),
                   quaternion=y[6:10].copy(), rates=y[10:13].copy())
