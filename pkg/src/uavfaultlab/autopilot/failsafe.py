"""GPS/IMU failsafe manager.

Degradation chain for a lost GPS fix (interruption, spoof detection, or
too few satellites): nominal -> inertial positioning (dead reckoning) ->
after the divergence window, level-flight fallback (pitch-hold +3 deg,
heading-hold, engine off).  A failed IMU freezes the last nominal command
("hold last rudder").  Fallback and hold states are latched: no recovery
path within a flight.
"""

import enum
from dataclasses import dataclass, replace

import numpy as np

from .controller import ControlCommand

METERS_PER_DEG = 111320.0


class FailsafeMode(enum.Enum):
    NOMINAL = "nominal"
    IMU_POSITIONING = "imu_positioning"
    LEVEL_FLIGHT_FALLBACK = "level_flight_fallback"
    HOLD_LAST_RUDDER = "hold_last_rudder"


@dataclass(frozen=True)
class FailsafeState:
    mode: FailsafeMode = FailsafeMode.NOMINAL
    entered_at: float = 0.0


@dataclass
class FailsafeConfig:
    satellite_threshold: int = 8      # fix usable when satellites >= this
    divergence_window: float = 30.0   # s of dead reckoning before fallback
    deception_jump_m: float = 1000.0  # position jump that marks a spoof
    deception_latency: float = 1.0    # s for the ground station to react
    hold_keeps_throttle: bool = False  # alternative reading: keep speed loop


class FailsafeManager:
    """Advance once per control tick with the current GPS epoch and IMU
    health; remembers everything needed by the degraded modes."""

    def __init__(self, config: FailsafeConfig = None, t0: float = 0.0):
        self.config = config or FailsafeConfig()
        self.state = FailsafeState(FailsafeMode.NOMINAL, t0)
        self.hold_command = None        # frozen ControlCommand for HOLD mode
        self.hold_pitch_cmd = 0.0
        self.hold_heading = 0.0         # rad, captured entering fallback
        self._last_cmd = None
        self._last_pitch_cmd = 0.0
        self._last_heading = 0.0
        self._prev_fix = None           # (lat, lon, timestamp) of last epoch
        self._jump_at = None
        self.transitions = []           # [(t, mode)] for the run summary

    # -- GPS validity ------------------------------------------------------

    def gps_usable(self, gps, t: float) -> bool:
        """Fix validity as the flight computer sees it, including the
        ground-station spoof monitor."""
        if gps is None or not gps.fix_valid:
            return False
        if gps.satellites < self.config.satellite_threshold:
            return False
        self._watch_for_jump(gps)
        if self._jump_at is not None and t >= self._jump_at + self.config.deception_latency:
            return False
        return True

    def _watch_for_jump(self, gps):
        if self._prev_fix is not None and gps.timestamp != self._prev_fix[2]:
            dlat = (gps.latitude - self._prev_fix[0]) * METERS_PER_DEG
            dlon = ((gps.longitude - self._prev_fix[1]) * METERS_PER_DEG
                    * np.cos(np.radians(self._prev_fix[0])))
            if np.hypot(dlat, dlon) > self.config.deception_jump_m \
                    and self._jump_at is None:
                self._jump_at = gps.timestamp
        if self._prev_fix is None or gps.timestamp != self._prev_fix[2]:
            self._prev_fix = (gps.latitude, gps.longitude, gps.timestamp)

    # -- state machine -----------------------------------------------------

    def step(self, gps, imu_healthy: bool, t: float) -> FailsafeState:
        mode = self.state.mode
        if mode is FailsafeMode.LEVEL_FLIGHT_FALLBACK:
            return self.state  # latched
        if mode is FailsafeMode.HOLD_LAST_RUDDER:
            return self.state  # latched
        if not imu_healthy:
            self._freeze_command()
            self._enter(FailsafeMode.HOLD_LAST_RUDDER, t)
            return self.state
        gps_ok = self.gps_usable(gps, t)
        if mode is FailsafeMode.NOMINAL:
            if not gps_ok:
                self._enter(FailsafeMode.IMU_POSITIONING, t)
        elif mode is FailsafeMode.IMU_POSITIONING:
            if t - self.state.entered_at >= self.config.divergence_window:
                self.hold_heading = self._last_heading
                self._enter(FailsafeMode.LEVEL_FLIGHT_FALLBACK, t)
        return self.state

    def note_nominal(self, command: ControlCommand, pitch_cmd: float,
                     heading: float):
        """Record the latest nominal-law output; this is what HOLD freezes
        and where the fallback heading comes from."""
        self._last_cmd = command
        self._last_pitch_cmd = pitch_cmd
        self._last_heading = heading

    def _freeze_command(self):
        cmd = self._last_cmd or ControlCommand()
        if not self.config.hold_keeps_throttle:
            cmd = replace(cmd, throttle=0.0)
        self.hold_command = cmd
        self.hold_pitch_cmd = self._last_pitch_cmd

    def _enter(self, mode: FailsafeMode, t: float):
        self.state = FailsafeState(mode, t)
        self.transitions.append((t, mode.value))


class ImuHealthMonitor:
    """Measurement-only IMU plausibility check.

    Compares the slope of the measured roll/pitch angles over a sliding
    window against the Euler-rate prediction from the measured body rates.
    A sustained mismatch (a drifting vertical gyro) trips the monitor; the
    health bit of the reading itself (communication loss) trips it
    immediately.  Yaw is excluded: gain faults during steady turns would
    false-alarm there, and heading consistency is the GPS course's job.
    """

    def __init__(self, window: float = 2.0, threshold: float = 0.25 * np.pi / 180.0,
                 hold: float = 5.0, rate_hz: float = 100.0,
                 slope_gate: float = 0.35 * np.pi / 180.0):
        self.window = window
        self.threshold = threshold   # rad/s sustained slope mismatch
        self.hold = hold
        self.slope_gate = slope_gate  # rad/s; judge only near-still channels
        n = max(2, int(round(window * rate_hz)))
        self._buf_t = np.zeros(n)
        self._buf_att = np.zeros((n, 2))    # roll, pitch
        self._buf_pred = np.zeros((n, 2))   # predicted Euler rates
        self._count = 0
        self._head = 0
        self._bad_since = None
        self.healthy = True               # latched false once tripped

    def update(self, imu, t: float) -> bool:
        if not self.healthy:
            return False
        if not imu.health:
            self.healthy = False
            return False
        roll, pitch, yaw = imu.attitude
        p, q, r = imu.rates
        cphi, sphi = np.cos(roll), np.sin(roll)
        tth = np.tan(np.clip(pitch, -1.45, 1.45))
        pred_roll = p + tth * (q * sphi + r * cphi)
        pred_pitch = q * cphi - r * sphi

        n = len(self._buf_t)
        self._buf_t[self._head] = t
        self._buf_att[self._head] = (roll, pitch)
        self._buf_pred[self._head] = (pred_roll, pred_pitch)
        self._head = (self._head + 1) % n
        self._count += 1
        if self._count < n:
            return True

        oldest = self._head  # ring: head now points at the oldest sample
        dt_win = t - self._buf_t[oldest]
        if dt_win <= 0:
            return True
        # Violent motion (tumble, near-vertical pitch) makes Euler slopes
        # meaningless; hold judgement rather than false-alarm.
        if np.max(np.abs(imu.rates)) > 2.0 or abs(pitch) > 1.0:
            return self.healthy
        diff = self._buf_att[(self._head - 1) % n] - self._buf_att[oldest]
        diff = (diff + np.pi) % (2 * np.pi) - np.pi  # wrap-safe
        slope = diff / dt_win
        pred = self._buf_pred.mean(axis=0)
        # Judge only channels whose measured angle is quiet: a drifting gyro
        # shows a rate-vs-slope gap at zero slope (the loop holds the reading
        # still while the rate says otherwise), whereas gain-type faults only
        # disagree while the angle is actually moving.
        quiet = np.abs(slope) < self.slope_gate
        if not np.any(quiet):
            return self.healthy
        mismatch = np.max(np.abs(slope[quiet] - pred[quiet]))
        if mismatch > self.threshold:
            if self._bad_since is None:
                self._bad_since = t
            elif t - self._bad_since >= self.hold:
                self.healthy = False
        else:
            self._bad_since = None
        return self.healthy


def failsafe_command(state: FailsafeState, manager: FailsafeManager,
                     autopilot, nav, dt: float) -> ControlCommand:
    """Command for a degraded mode (mode must not be NOMINAL).

    IMU_POSITIONING runs the nominal laws on the dead-reckoned solution,
    so the caller passes that nav in; this helper only covers the two
    override modes and asserts on misuse.
    """
    mode = state.mode
    if mode is FailsafeMode.HOLD_LAST_RUDDER:
        return manager.hold_command or ControlCommand()
    if mode is FailsafeMode.LEVEL_FLIGHT_FALLBACK:
        return autopilot.fallback_command(nav, manager.hold_heading, dt)
    raise ValueError(f"failsafe_command called in mode {mode}")
