"""Scenario files: everything one closed-loop run needs, validated at load."""

import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..autopilot import AutopilotGains, MissionPlan
from ..autopilot.failsafe import FailsafeConfig
from ..avionics import GeoOrigin, GpsNoise, ImuNoise, ServoConfig
from ..errors import FaultSpecError, ScenarioError
from ..faultlab import FaultSchedule, FaultSpec
from ..flightdyn import AircraftConfig, aircraft_from_dict

DEG = np.pi / 180.0


@dataclass
class Scenario:
    """One run: aircraft, initial condition, mission, faults, rates, seed."""

    name: str = "run"
    seed: int = 0
    duration: float = 200.0        # s
    physics_dt: float = 0.001      # s
    control_hz: float = 100.0
    gps_hz: float = 10.0
    log_hz: float = 50.0
    trim_altitude: float = 400.0   # m
    trim_airspeed: float = 40.0    # m/s
    trim_heading: float = 90.0 * DEG
    origin: GeoOrigin = field(default_factory=GeoOrigin)
    wind_ned: np.ndarray = field(default_factory=lambda: np.zeros(3))
    aircraft: AircraftConfig = field(default_factory=AircraftConfig)
    mission: MissionPlan = None
    imu_noise: ImuNoise = field(default_factory=ImuNoise)
    gps_noise: GpsNoise = field(default_factory=GpsNoise)
    servo: ServoConfig = field(default_factory=ServoConfig)
    failsafe: FailsafeConfig = field(default_factory=FailsafeConfig)
    gains: AutopilotGains = field(default_factory=AutopilotGains)
    fault_specs: list = field(default_factory=list)

    def __post_init__(self):
        if not self.duration > 0:
            raise ScenarioError(f"duration must be positive, got {self.duration}")
        if not self.physics_dt > 0:
            raise ScenarioError(f"physics_dt must be positive, got {self.physics_dt}")
        for hz in (self.control_hz, self.gps_hz, self.log_hz):
            if not hz > 0:
                raise ScenarioError("all rates must be positive")
        self.wind_ned = np.asarray(self.wind_ned, dtype=float)
        if self.mission is None:
            self.mission = MissionPlan(
                waypoints=[np.array([0.0, 20000.0, self.trim_altitude])],
                cruise_altitude=self.trim_altitude,
                cruise_speed=self.trim_airspeed)
        # Fault validation happens in FaultSpec/FaultSchedule constructors.
        self.schedule = FaultSchedule(self.fault_specs)

    def control_dt(self) -> float:
        return 1.0 / self.control_hz

    def substeps(self) -> int:
        n = int(round(self.control_dt() / self.physics_dt))
        if n < 1 or abs(n * self.physics_dt - self.control_dt()) > 1e-9:
            raise ScenarioError(
                f"control period {self.control_dt()} must be an integer "
                f"multiple of physics_dt {self.physics_dt}")
        return n


def scenario_from_dict(doc: dict, base_dir: str = "") -> Scenario:
    """Build a validated Scenario from a parsed YAML/JSON document."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    known = {"name", "seed", "duration_s", "physics_dt", "control_hz", "gps_hz",
             "log_hz", "origin", "wind_ned", "aircraft", "trim", "mission",
             "noise", "servo", "failsafe", "gains", "faults"}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")

    kwargs = {}
    for src, dst in (("name", "name"), ("seed", "seed"), ("duration_s", "duration"),
                     ("physics_dt", "physics_dt"), ("control_hz", "control_hz"),
                     ("gps_hz", "gps_hz"), ("log_hz", "log_hz")):
        if src in doc:
            kwargs[dst] = doc[src]

    if "origin" in doc:
        o = doc["origin"]
        kwargs["origin"] = GeoOrigin(latitude=float(o.get("lat_deg", 34.0)),
                                     longitude=float(o.get("lon_deg", 108.0)))
    if "wind_ned" in doc:
        kwargs["wind_ned"] = np.asarray(doc["wind_ned"], dtype=float)

    if "aircraft" in doc:
        ac = doc["aircraft"]
        if isinstance(ac, str):
            path = ac if os.path.isabs(ac) else os.path.join(base_dir, ac)
            from ..flightdyn import load_aircraft
            kwargs["aircraft"] = load_aircraft(path)
        elif isinstance(ac, dict):
            kwargs["aircraft"] = aircraft_from_dict(ac, base_dir=base_dir)
        elif ac is not None:
            raise ScenarioError("aircraft must be a path or a mapping")

    if "trim" in doc:
        tr = doc["trim"]
        kwargs["trim_altitude"] = float(tr.get("altitude_m", 400.0))
        kwargs["trim_airspeed"] = float(tr.get("airspeed_mps", 40.0))
        kwargs["trim_heading"] = float(tr.get("heading_deg", 90.0)) * DEG

    if "mission" in doc:
        m = dict(doc["mission"])
        wps = m.pop("waypoints", None)
        plan_kwargs = {}
        for src, dst in (("cruise_altitude_m", "cruise_altitude"),
                         ("cruise_speed_mps", "cruise_speed"),
                         ("glide_start_s", "glide_start_time"),
                         ("glide_sink_rate_mps", "glide_sink_rate"),
                         ("attack_altitude_m", "attack_altitude"),
                         ("attack_sink_rate_mps", "attack_sink_rate"),
                         ("waypoint_radius_m", "waypoint_radius")):
            if src in m:
                plan_kwargs[dst] = m.pop(src)
        if m:
            raise ScenarioError(f"unknown mission fields: {sorted(m)}")
        if wps is not None:
            plan_kwargs["waypoints"] = [np.asarray(w, dtype=float) for w in wps]
        elif "cruise_altitude" in plan_kwargs:
            alt = float(plan_kwargs["cruise_altitude"])
            plan_kwargs["waypoints"] = [np.array([0.0, 20000.0, alt])]
        kwargs["mission"] = MissionPlan(**plan_kwargs)

    if "noise" in doc:
        nz = doc["noise"]
        scale = float(nz.get("scale", 1.0))
        kwargs["imu_noise"] = ImuNoise(
            attitude_sigma=float(nz.get("imu_attitude_deg", 0.1)) * DEG * scale,
            rate_sigma=float(nz.get("imu_rate_dps", 0.1)) * DEG * scale,
            accel_sigma=float(nz.get("imu_accel", 0.05)) * scale)
        kwargs["gps_noise"] = GpsNoise(
            horizontal_sigma=float(nz.get("gps_horizontal_m", 0.01)) * scale,
            vertical_sigma=float(nz.get("gps_vertical_m", 0.02)) * scale,
            speed_sigma=float(nz.get("gps_speed_mps", 0.03)) * scale)

    if "servo" in doc:
        sv = doc["servo"]
        kwargs["servo"] = ServoConfig(
            time_constant=float(sv.get("tau_s", 0.05)),
            rate_limit=float(sv.get("rate_limit_dps", 200.0)) * DEG,
            throttle_time_constant=float(sv.get("throttle_tau_s", 0.2)))

    if "failsafe" in doc:
        fs = doc["failsafe"]
        kwargs["failsafe"] = FailsafeConfig(
            satellite_threshold=int(fs.get("satellite_threshold", 8)),
            divergence_window=float(fs.get("divergence_window_s", 30.0)),
            deception_jump_m=float(fs.get("deception_jump_m", 1000.0)),
            deception_latency=float(fs.get("deception_latency_s", 1.0)),
            hold_keeps_throttle=bool(fs.get("hold_keeps_throttle", False)))

    if "gains" in doc:
        g = AutopilotGains()
        for key, val in (doc["gains"] or {}).items():
            if not hasattr(g, key):
                raise ScenarioError(f"unknown gain {key!r}")
            setattr(g, key, float(val))
        kwargs["gains"] = g

    specs = []
    for i, f in enumerate(doc.get("faults", []) or []):
        f = dict(f)
        try:
            spec = FaultSpec(
                target=f.pop("target"),
                mode=f.pop("mode"),
                params=f.pop("params", {}) or {},
                start_s=_maybe_float(f.pop("start_s", None)),
                start_phase=f.pop("start_phase", None),
                start_offset_s=float(f.pop("start_offset_s", 0.0)),
                duration_s=_maybe_float(f.pop("duration_s", math.inf)))
        except KeyError as exc:
            raise ScenarioError(f"fault #{i}: missing field {exc}") from exc
        except (FaultSpecError, ValueError) as exc:
            raise ScenarioError(f"fault #{i}: {exc}") from exc
        if f:
            raise ScenarioError(f"fault #{i}: unknown fields {sorted(f)}")
        specs.append(spec)
    kwargs["fault_specs"] = specs

    try:
        return Scenario(**kwargs)
    except FaultSpecError as exc:
        raise ScenarioError(str(exc)) from exc


def _maybe_float(v):
    if v is None:
        return None
    if isinstance(v, str) and v.strip() in (".inf", "inf"):
        return math.inf
    return float(v)


def load_scenario(path) -> Scenario:
    """Parse + validate a scenario file (YAML; JSON is a YAML subset)."""
    try:
        with open(path, "r") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from exc
    sc = scenario_from_dict(doc or {}, base_dir=os.path.dirname(str(path)))
    if sc.name == "run":
        sc.name = os.path.splitext(os.path.basename(str(path)))[0]
    return sc
