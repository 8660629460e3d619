"""Mission plan, flight-phase state machine, and waypoint guidance."""

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ScenarioError


class FlightPhase(enum.Enum):
    CLIMB = "climb"
    LEVEL_FLIGHT = "level_flight"
    GLIDE_SLOPE = "glide_slope"
    ATTACK = "attack"


@dataclass
class MissionPlan:
    """Waypoints plus the altitude/time triggers that sequence the phases."""

    waypoints: list = field(default_factory=lambda: [np.array([20000.0, 0.0, 400.0])])
    cruise_altitude: float = 400.0   # m
    cruise_speed: float = 40.0       # m/s
    glide_start_time: float = None   # s since start; None = never
    glide_sink_rate: float = 2.5     # m/s commanded descent in glide
    attack_altitude: float = 60.0    # m, glide -> attack transition
    attack_sink_rate: float = 8.0    # m/s commanded descent in attack
    capture_band: float = 5.0        # m, climb -> level altitude capture
    capture_hold: float = 2.0        # s the band must hold
    waypoint_radius: float = 200.0   # m, switch distance

    def __post_init__(self):
        self.waypoints = [np.asarray(w, dtype=float) for w in self.waypoints]
        if not self.waypoints:
            raise ScenarioError("mission needs at least one waypoint")
        for w in self.waypoints:
            if w.shape != (3,) or w[2] < 0:
                raise ScenarioError(
                    "waypoints are (north_m, east_m, altitude_m) with altitude >= 0")
        if self.cruise_altitude < 0 or self.cruise_speed <= 0:
            raise ScenarioError("cruise altitude/speed must be positive")


class PhaseMachine:
    """Sequences climb -> level flight -> glide slope -> attack.

    Tracks entry times (used by phase-anchored fault schedules) and the
    glide-path altitude command.
    """

    def __init__(self, plan: MissionPlan, start_time: float = 0.0,
                 start_phase: FlightPhase = FlightPhase.CLIMB):
        self.plan = plan
        self.phase = start_phase
        self.entry_time = {start_phase: start_time}
        self._band_since = None
        self._glide_entry_alt = None

    def step(self, t: float, altitude: float) -> FlightPhase:
        plan = self.plan
        if self.phase is FlightPhase.CLIMB:
            if abs(altitude - plan.cruise_altitude) <= plan.capture_band:
                if self._band_since is None:
                    self._band_since = t
                elif t - self._band_since >= plan.capture_hold:
                    self._enter(FlightPhase.LEVEL_FLIGHT, t)
            else:
                self._band_since = None
        elif self.phase is FlightPhase.LEVEL_FLIGHT:
            if plan.glide_start_time is not None and t >= plan.glide_start_time:
                self._glide_entry_alt = altitude
                self._enter(FlightPhase.GLIDE_SLOPE, t)
        elif self.phase is FlightPhase.GLIDE_SLOPE:
            if altitude <= plan.attack_altitude:
                self._enter(FlightPhase.ATTACK, t)
        return self.phase

    def altitude_command(self, t: float) -> float:
        plan = self.plan
        if self.phase in (FlightPhase.CLIMB, FlightPhase.LEVEL_FLIGHT):
            return plan.cruise_altitude
        if self.phase is FlightPhase.GLIDE_SLOPE:
            h0 = self._glide_entry_alt if self._glide_entry_alt is not None \
                else plan.cruise_altitude
            cmd = h0 - plan.glide_sink_rate * (t - self.entry_time[self.phase])
            return max(cmd, plan.attack_altitude)
        # attack: drive to the deck
        h0 = plan.attack_altitude
        t0 = self.entry_time.get(FlightPhase.ATTACK, t)
        return max(h0 - plan.attack_sink_rate * (t - t0), 0.0)

    def _enter(self, phase: FlightPhase, t: float):
        self.phase = phase
        self.entry_time[phase] = t
        self._band_since = None


class WaypointTracker:
    """Course-to-waypoint guidance with switch-on-arrival."""

    def __init__(self, plan: MissionPlan):
        self.plan = plan
        self.index = 0

    def course_command(self, north: float, east: float) -> float:
        wps = self.plan.waypoints
        while self.index < len(wps) - 1:
            d = np.hypot(wps[self.index][0] - north, wps[self.index][1] - east)
            if d < self.plan.waypoint_radius:
                self.index += 1
            else:
                break
        tgt = wps[self.index]
        return float(np.arctan2(tgt[1] - east, tgt[0] - north))
