"""Cascaded flight control laws.

Structure (conventional fixed-wing cascade):

* altitude error -> pitch command -> elevator (pitch-rate damped)
* airspeed error -> throttle
* course error   -> roll command  -> aileron (roll-rate damped)
* yaw damper     -> rudder (washed-out yaw rate)

All loops carry the trim command as a feed-forward so that zero tracking
error reproduces the trim command exactly, and every output is clamped to
the configured surface/throttle limits.

Surface sign conventions (standard, matching the default derivative set):
positive elevator pitches down (Cm_de < 0), positive aileron rolls right
(Cl_da > 0), positive rudder yaws left (Cn_dr < 0).  Gains are positive
magnitudes; the loop code carries the signs.
"""

from dataclasses import dataclass, field

import numpy as np

from .pid import PD, PI, Washout

DEG = np.pi / 180.0


@dataclass
class ControlCommand:
    """Autopilot output: logical surface deflections (rad) + throttle.

    Channels are logical elevator/aileron/rudder; mixing into a physical
    V-tail happens downstream of the command if a servo layout needs it.
    Construction clamps to the limit so a command object is always valid.
    """

    elevator: float = 0.0
    aileron: float = 0.0
    rudder: float = 0.0
    throttle: float = 0.0
    limit: float = 25.0 * DEG

    def __post_init__(self):
        lim = float(self.limit)
        self.elevator = float(np.clip(self.elevator, -lim, lim))
        self.aileron = float(np.clip(self.aileron, -lim, lim))
        self.rudder = float(np.clip(self.rudder, -lim, lim))
        self.throttle = float(np.clip(self.throttle, 0.0, 1.0))

    def surfaces(self):
        return self.elevator, self.aileron, self.rudder


@dataclass
class AutopilotGains:
    """Loop gains; defaults tuned once against the altitude step-response
    acceptance band (overshoot 10-35%, settle < 120 s)."""

    alt_kp: float = 0.008      # rad pitch per m
    alt_ki: float = 0.0035
    pitch_limit: float = 15.0 * DEG
    pitch_kp: float = 1.4      # rad elevator per rad
    pitch_kd: float = 0.22     # per rad/s
    speed_kp: float = 0.035    # throttle per m/s
    speed_ki: float = 0.012
    course_kp: float = 1.4     # rad roll per rad course error
    course_ki: float = 0.05
    roll_limit: float = 35.0 * DEG
    roll_kp: float = 0.55
    roll_kd: float = 0.07
    yaw_damper_gain: float = 0.25
    yaw_washout_tau: float = 1.0


FALLBACK_PITCH = 3.0 * DEG   # pitch-hold value in level-flight fallback


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return float((a + np.pi) % (2 * np.pi) - np.pi)


class Autopilot:
    """Stateful cascade advanced once per control tick."""

    def __init__(self, gains: AutopilotGains = None, trim_command: ControlCommand = None,
                 trim_pitch: float = 0.0, surface_limit: float = 25.0 * DEG):
        self.gains = gains or AutopilotGains()
        self.trim_command = trim_command or ControlCommand(limit=surface_limit)
        self.trim_pitch = trim_pitch
        self.surface_limit = surface_limit
        g = self.gains
        self._alt_pi = PI(g.alt_kp, g.alt_ki, g.pitch_limit, offset=trim_pitch)
        # negative sense: raising the nose takes negative elevator
        self._pitch_pd = PD(-g.pitch_kp, -g.pitch_kd, surface_limit,
                            offset=self.trim_command.elevator)
        self._speed_pi = PI(g.speed_kp, g.speed_ki, 1.0,
                            offset=self.trim_command.throttle)
        self._course_pi = PI(g.course_kp, g.course_ki, g.roll_limit)
        self._roll_pd = PD(g.roll_kp, g.roll_kd, surface_limit)
        self._yaw_washout = Washout(g.yaw_washout_tau)
        self.last_pitch_cmd = trim_pitch
        self.last_roll_cmd = 0.0

    def update(self, nav, alt_cmd: float, speed_cmd: float, course_cmd: float,
               dt: float) -> ControlCommand:
        """Nominal control laws on a navigation solution.

        ``nav`` needs .position (NED, m), .attitude (roll, pitch, yaw rad),
        .rates (p, q, r rad/s) and .airspeed (m/s).
        """
        roll, pitch, yaw = nav.attitude
        p, q, r = nav.rates
        altitude = -float(nav.position[2])

        pitch_cmd = self._alt_pi.update(alt_cmd - altitude, dt)
        elevator = self._pitch_pd.update(pitch_cmd - pitch, q)

        # Throttle lives in [0, 1], not symmetric around 0: clamp after PI.
        throttle = self._speed_pi.update(speed_cmd - float(nav.airspeed), dt)
        throttle = min(max(throttle, 0.0), 1.0)

        roll_cmd = self._course_pi.update(wrap_angle(course_cmd - yaw), dt)
        aileron = self._roll_pd.update(roll_cmd - roll, p)

        # Cn_dr < 0: positive rudder opposes positive yaw rate.
        rudder = self.gains.yaw_damper_gain * self._yaw_washout.update(r, dt)

        self.last_pitch_cmd = pitch_cmd
        self.last_roll_cmd = roll_cmd
        return ControlCommand(elevator=elevator, aileron=aileron, rudder=rudder,
                              throttle=throttle, limit=self.surface_limit)

    def fallback_command(self, nav, hold_heading: float, dt: float) -> ControlCommand:
        """Level-flight fallback: pitch-hold +3 deg, heading-hold, engine off."""
        roll, pitch, yaw = nav.attitude
        p, q, r = nav.rates
        pitch_cmd = FALLBACK_PITCH
        elevator = self._pitch_pd.update(pitch_cmd - pitch, q)
        roll_cmd = self._course_pi.update(wrap_angle(hold_heading - yaw), dt)
        aileron = self._roll_pd.update(roll_cmd - roll, p)
        rudder = self.gains.yaw_damper_gain * self._yaw_washout.update(r, dt)
        self.last_pitch_cmd = pitch_cmd
        self.last_roll_cmd = roll_cmd
        return ControlCommand(elevator=elevator, aileron=aileron, rudder=rudder,
                              throttle=0.0, limit=self.surface_limit)
