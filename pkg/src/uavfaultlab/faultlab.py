"""Parametric sensor/actuator fault algebra, catalogs, and injection.

Every fault is a gain/deviation pair applied to a signal:

    faulted = k(t) * clean + d(t)

for sensors (readings the flight computer sees) and actuators (commands on
their way to the servos).  Mode catalogs pin the (k, d) patterns:

sensor modes          k(t)        d(t)
    fault_free        1           0
    multiplicative    != 1        0
    constant_deviation 1          constant
    drift             1           ramp, held after the drift window
    transient_drift   1           discrete pulses
    disconnect        0           0 (plus health flag low)

actuator modes
    fault_free        1           0
    constant_deviation 1          constant
    stuck             0           latched onset deflection
    loose             0.9 gain (as injected); float variant k=0, d wanders
    damage            gain in (0,1)
    jitter            k alternates nominal/faulted on a duty cycle

GPS system-level modes: deception (+0.05 deg lat/lon), weak signal
(15 -> 12 satellites), weaker signal (15 -> 7, fix unusable), interruption
(no fix).  Constructing a state that violates its mode's pattern raises
FaultSpecError.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .avionics import GpsReading, ImuReading, SurfaceActual
from .autopilot.controller import ControlCommand
from .errors import FaultSpecError

DEG = np.pi / 180.0


class SensorFaultMode(enum.Enum):
    FAULT_FREE = "fault_free"
    MULTIPLICATIVE = "multiplicative"
    CONSTANT_DEVIATION = "constant_deviation"
    DRIFT = "drift"
    TRANSIENT_DRIFT = "transient_drift"
    DISCONNECT = "disconnect"


class ActuatorFaultMode(enum.Enum):
    FAULT_FREE = "fault_free"
    CONSTANT_DEVIATION = "constant_deviation"
    STUCK = "stuck"
    LOOSE = "loose"
    DAMAGE = "damage"
    JITTER = "jitter"


class GpsFaultMode(enum.Enum):
    DECEPTION = "deception"
    WEAK_SIGNAL = "weak_signal"
    WEAKER_SIGNAL = "weaker_signal"
    INTERRUPTION = "interruption"


SERVO_CHANNELS = ("elevator", "aileron", "rudder")
IMU_ATTITUDE_CHANNELS = ("imu.attitude.x", "imu.attitude.y", "imu.attitude.z")
IMU_RATE_CHANNELS = ("imu.rate.x", "imu.rate.y", "imu.rate.z")
GPS_VALUE_CHANNELS = ("gps.latitude", "gps.longitude", "gps.altitude",
                      "gps.speed", "gps.satellites")


# --- parametric fault states -------------------------------------------------

@dataclass
class SensorFaultState:
    """One sensor channel's (k(t), d(t)) parameterization."""

    channel: str
    mode: SensorFaultMode
    start: float = 0.0
    params: dict = field(default_factory=dict)

    _ALLOWED = {
        SensorFaultMode.FAULT_FREE: set(),
        SensorFaultMode.MULTIPLICATIVE: {"gain"},
        SensorFaultMode.CONSTANT_DEVIATION: {"bias"},
        SensorFaultMode.DRIFT: {"rate", "drift_duration"},
        SensorFaultMode.TRANSIENT_DRIFT: {"pulses"},
        SensorFaultMode.DISCONNECT: set(),
    }

    def __post_init__(self):
        bad = set(self.params) - self._ALLOWED[self.mode]
        if bad:
            raise FaultSpecError(
                f"{self.mode.value} fault does not take params {sorted(bad)}")
        if self.mode is SensorFaultMode.MULTIPLICATIVE:
            if float(self.params.get("gain", 1.0)) == 1.0:
                raise FaultSpecError("multiplicative fault requires gain != 1")
        elif self.mode is SensorFaultMode.CONSTANT_DEVIATION:
            if float(self.params.get("bias", 0.0)) == 0.0:
                raise FaultSpecError("constant deviation fault requires bias != 0")
        elif self.mode is SensorFaultMode.DRIFT:
            if float(self.params.get("rate", 0.0)) == 0.0:
                raise FaultSpecError("drift fault requires a nonzero rate")
        elif self.mode is SensorFaultMode.TRANSIENT_DRIFT:
            if not self.params.get("pulses"):
                raise FaultSpecError("transient drift requires a pulse schedule")

    def k(self, t: float) -> float:
        if self.mode is SensorFaultMode.MULTIPLICATIVE:
            return float(self.params["gain"])
        if self.mode is SensorFaultMode.DISCONNECT:
            return 0.0
        return 1.0

    def d(self, t: float) -> float:
        rel = t - self.start
        if self.mode is SensorFaultMode.CONSTANT_DEVIATION:
            return float(self.params["bias"])
        if self.mode is SensorFaultMode.DRIFT:
            dur = float(self.params.get("drift_duration", 40.0))
            return float(self.params["rate"]) * min(max(rel, 0.0), dur)
        if self.mode is SensorFaultMode.TRANSIENT_DRIFT:
            for offset, width, amplitude in self.params["pulses"]:
                if offset <= rel < offset + width:
                    return float(amplitude)
            return 0.0
        return 0.0


@dataclass
class ActuatorFaultState:
    """One servo channel's (k(t), d(t)) parameterization.

    STUCK latches the physical deflection at onset via ``latch()``; the
    float-variant LOOSE has its wander value pushed in by the injector
    (sequential per-run state, as is the latch).
    """

    channel: str
    mode: ActuatorFaultMode
    start: float = 0.0
    params: dict = field(default_factory=dict)

    _ALLOWED = {
        ActuatorFaultMode.FAULT_FREE: set(),
        ActuatorFaultMode.CONSTANT_DEVIATION: {"bias"},
        ActuatorFaultMode.STUCK: set(),
        ActuatorFaultMode.LOOSE: {"gain", "float", "wander_sigma", "wander_tau"},
        ActuatorFaultMode.DAMAGE: {"gain"},
        ActuatorFaultMode.JITTER: {"gain", "period_on", "period_off"},
    }

    def __post_init__(self):
        bad = set(self.params) - self._ALLOWED[self.mode]
        if bad:
            raise FaultSpecError(
                f"{self.mode.value} fault does not take params {sorted(bad)}")
        if self.mode is ActuatorFaultMode.CONSTANT_DEVIATION:
            if float(self.params.get("bias", 0.0)) == 0.0:
                raise FaultSpecError("constant deviation fault requires bias != 0")
        elif self.mode is ActuatorFaultMode.LOOSE and not self.params.get("float"):
            gain = float(self.params.get("gain", 0.9))
            if not 0.0 < gain < 1.0:
                raise FaultSpecError("loose fault gain must be in (0, 1)")
        elif self.mode is ActuatorFaultMode.DAMAGE:
            gain = float(self.params.get("gain", 0.8))
            if not 0.0 < gain < 1.0:
                raise FaultSpecError("damage fault gain must be in (0, 1)")
        elif self.mode is ActuatorFaultMode.JITTER:
            gain = float(self.params.get("gain", 0.0))
            if not 0.0 <= gain < 1.0:
                raise FaultSpecError("jitter faulted gain must be in [0, 1)")
            if float(self.params.get("period_on", 0.2)) <= 0 \
                    or float(self.params.get("period_off", 0.2)) <= 0:
                raise FaultSpecError("jitter half-periods must be positive")
        self._latched = None
        self._wander = 0.0

    def latch(self, value: float):
        if self._latched is None:
            self._latched = float(value)

    @property
    def latched(self):
        return self._latched

    def set_wander(self, value: float):
        self._wander = float(value)

    def k(self, t: float) -> float:
        mode = self.mode
        if mode is ActuatorFaultMode.STUCK:
            return 0.0
        if mode is ActuatorFaultMode.LOOSE:
            return 0.0 if self.params.get("float") else float(self.params.get("gain", 0.9))
        if mode is ActuatorFaultMode.DAMAGE:
            return float(self.params.get("gain", 0.8))
        if mode is ActuatorFaultMode.JITTER:
            on = float(self.params.get("period_on", 0.2))
            off = float(self.params.get("period_off", 0.2))
            phase = (t - self.start) % (on + off)
            return float(self.params.get("gain", 0.0)) if phase < on else 1.0
        return 1.0

    def d(self, t: float) -> float:
        if self.mode is ActuatorFaultMode.CONSTANT_DEVIATION:
            return float(self.params["bias"])
        if self.mode is ActuatorFaultMode.STUCK:
            return self._latched if self._latched is not None else 0.0
        if self.mode is ActuatorFaultMode.LOOSE and self.params.get("float"):
            return self._wander
        return 0.0


def apply_sensor_fault(y: float, fault: SensorFaultState, t: float) -> float:
    """Faulted sensor output: k(t) * y + d(t), exactly."""
    return fault.k(t) * y + fault.d(t)


def apply_actuator_fault(u_c: float, fault: ActuatorFaultState, t: float) -> float:
    """Actual actuator command: k(t) * u_c + d(t), exactly."""
    return fault.k(t) * u_c + fault.d(t)


# --- catalogs (defaults from the injection experiments) -----------------------

def imu_fault_params(mode: SensorFaultMode, **overrides) -> list:
    """Template states for an IMU fault: x/z attitude axes faulted, y
    normal; disconnect takes the whole unit down."""
    if mode is SensorFaultMode.MULTIPLICATIVE:
        gain = float(overrides.get("gain", 1.25))
        return [SensorFaultState("imu.attitude.x", mode, params={"gain": gain}),
                SensorFaultState("imu.attitude.z", mode, params={"gain": gain})]
    if mode is SensorFaultMode.CONSTANT_DEVIATION:
        bx = float(overrides.get("bias_x", 3.0 * DEG))
        bz = float(overrides.get("bias_z", 5.0 * DEG))
        return [SensorFaultState("imu.attitude.x", mode, params={"bias": bx}),
                SensorFaultState("imu.attitude.z", mode, params={"bias": bz})]
    if mode is SensorFaultMode.DRIFT:
        rate = float(overrides.get("rate", 0.5 * DEG))
        duration = float(overrides.get("drift_duration", 40.0))
        return [SensorFaultState("imu.attitude.x", mode,
                                 params={"rate": rate, "drift_duration": duration}),
                SensorFaultState("imu.attitude.z", mode,
                                 params={"rate": rate, "drift_duration": duration})]
    if mode is SensorFaultMode.TRANSIENT_DRIFT:
        pulses = overrides.get("pulses",
                               [(0.0, 0.5, 2.0 * DEG), (5.0, 0.5, 2.0 * DEG),
                                (10.0, 0.5, 2.0 * DEG)])
        return [SensorFaultState("imu.attitude.x", mode, params={"pulses": pulses}),
                SensorFaultState("imu.attitude.z", mode, params={"pulses": pulses})]
    if mode is SensorFaultMode.DISCONNECT:
        return [SensorFaultState("imu", mode)]
    raise FaultSpecError(f"no IMU catalog entry for mode {mode}")


def servo_fault_params(mode: ActuatorFaultMode, **overrides) -> list:
    """Template states for a steering-gear fault on all servo channels."""
    defaults = {
        ActuatorFaultMode.CONSTANT_DEVIATION: {"bias": -2.0 * DEG},
        ActuatorFaultMode.STUCK: {},
        ActuatorFaultMode.LOOSE: {"gain": 0.9},
        ActuatorFaultMode.DAMAGE: {"gain": 0.8},
        ActuatorFaultMode.JITTER: {"gain": 0.0, "period_on": 0.2, "period_off": 0.2},
    }
    if mode not in defaults:
        raise FaultSpecError(f"no steering-gear catalog entry for mode {mode}")
    params = dict(defaults[mode])
    params.update(overrides)
    return [ActuatorFaultState(f"servo.{ch}", mode, params=dict(params))
            for ch in SERVO_CHANNELS]


def gps_fault_transform(reading: GpsReading, mode: GpsFaultMode,
                        params: dict = None) -> GpsReading:
    """Apply a system-level GPS fault to one epoch."""
    params = params or {}
    out = reading.copy()
    if mode is GpsFaultMode.DECEPTION:
        out.latitude += float(params.get("dlat_deg", 0.05))
        out.longitude += float(params.get("dlon_deg", 0.05))
    elif mode is GpsFaultMode.WEAK_SIGNAL:
        out.satellites = int(params.get("satellites", 12))
        out.fix_valid = out.satellites >= 8
    elif mode is GpsFaultMode.WEAKER_SIGNAL:
        out.satellites = int(params.get("satellites", 7))
        out.fix_valid = out.satellites >= 8
    elif mode is GpsFaultMode.INTERRUPTION:
        out.satellites = 0
        out.fix_valid = False
    return out


# --- scheduling ---------------------------------------------------------------

_SENSOR_TARGETS = ("imu",) + IMU_ATTITUDE_CHANNELS + IMU_RATE_CHANNELS \
    + GPS_VALUE_CHANNELS
_SERVO_TARGETS = ("servo.all",) + tuple(f"servo.{c}" for c in SERVO_CHANNELS)


@dataclass
class FaultSpec:
    """One scheduled fault: what, how, and when.

    ``start_s`` anchors to run time; alternatively ``start_phase`` +
    ``start_offset_s`` anchor to a flight-phase entry resolved at runtime.
    """

    target: str
    mode: str
    params: dict = field(default_factory=dict)
    start_s: float = None
    start_phase: str = None
    start_offset_s: float = 0.0
    duration_s: float = math.inf

    def __post_init__(self):
        if (self.start_s is None) == (self.start_phase is None):
            raise FaultSpecError(
                f"{self.label()}: exactly one of start_s / start_phase required")
        if self.start_s is not None and self.start_s < 0:
            raise FaultSpecError(f"{self.label()}: start_s must be >= 0")
        if self.start_phase is not None and self.start_offset_s < 0:
            raise FaultSpecError(f"{self.label()}: start_offset_s must be >= 0")
        if not self.duration_s > 0:
            raise FaultSpecError(f"{self.label()}: duration must be positive")
        self.resolved_start = self.start_s
        # Validate mode against target kind and params against the pattern.
        self._states_for_start(0.0)

    def label(self) -> str:
        return f"{self.target}:{self.mode}"

    @property
    def kind(self) -> str:
        if self.target == "gps":
            return "gps"
        if self.target in _SERVO_TARGETS:
            return "servo"
        if self.target in _SENSOR_TARGETS:
            return "sensor"
        raise FaultSpecError(f"unknown fault target {self.target!r}")

    def channels(self) -> tuple:
        """Concrete channels this spec touches (for overlap checks)."""
        if self.target == "servo.all":
            return tuple(f"servo.{c}" for c in SERVO_CHANNELS)
        if self.target == "imu":
            return ("imu",) + IMU_ATTITUDE_CHANNELS + IMU_RATE_CHANNELS
        if self.target == "gps":
            return ("gps",) + GPS_VALUE_CHANNELS
        return (self.target,)

    def is_active(self, t: float) -> bool:
        start = self.resolved_start
        return start is not None and start <= t < start + self.duration_s

    def build_states(self):
        """Runtime fault states with the resolved start time."""
        if self.resolved_start is None:
            raise FaultSpecError(f"{self.label()}: start not resolved yet")
        return self._states_for_start(self.resolved_start)

    def _states_for_start(self, start):
        kind = self.kind
        if kind == "gps":
            mode = GpsFaultMode(self.mode)
            known = {GpsFaultMode.DECEPTION: {"dlat_deg", "dlon_deg"},
                     GpsFaultMode.WEAK_SIGNAL: {"satellites"},
                     GpsFaultMode.WEAKER_SIGNAL: {"satellites"},
                     GpsFaultMode.INTERRUPTION: set()}[mode]
            bad = set(self.params) - known
            if bad:
                raise FaultSpecError(
                    f"{self.label()}: GPS {mode.value} does not take {sorted(bad)}")
            return [("gps", mode, dict(self.params))]
        if kind == "servo":
            mode = ActuatorFaultMode(self.mode)
            if self.target == "servo.all":
                states = servo_fault_params(mode, **self.params)
            else:
                base = servo_fault_params(mode, **self.params)[0]
                states = [ActuatorFaultState(self.target, mode,
                                             params=dict(base.params))]
            for st in states:
                st.start = start
            return states
        mode = SensorFaultMode(self.mode)
        if self.target == "imu":
            states = imu_fault_params(mode, **self.params) \
                if mode is not SensorFaultMode.DISCONNECT \
                else [SensorFaultState("imu", mode)]
        else:
            states = [SensorFaultState(self.target, mode, params=dict(self.params))]
        for st in states:
            st.start = start
        return states


class FaultSchedule:
    """Time-indexed fault plan; rejects overlapping faults on a channel."""

    def __init__(self, specs):
        self.specs = list(specs)
        self._check_overlaps()

    def _check_overlaps(self):
        def intervals(spec):
            if spec.start_s is not None:
                return ("abs", spec.start_s, spec.start_s + spec.duration_s)
            return (spec.start_phase, spec.start_offset_s,
                    spec.start_offset_s + spec.duration_s)

        for i, a in enumerate(self.specs):
            for b in self.specs[i + 1:]:
                shared = set(a.channels()) & set(b.channels())
                if not shared:
                    continue
                (anch_a, s_a, e_a) = intervals(a)
                (anch_b, s_b, e_b) = intervals(b)
                if anch_a != anch_b:
                    continue  # relative anchors unknown until runtime
                if s_a < e_b and s_b < e_a:
                    raise FaultSpecError(
                        f"overlapping faults on {sorted(shared)[0]}: "
                        f"{a.label()} and {b.label()}")

    def __len__(self):
        return len(self.specs)

    def bind_phase_entry(self, phase: str, t: float):
        for spec in self.specs:
            if spec.start_phase == phase and spec.resolved_start is None:
                spec.resolved_start = t + spec.start_offset_s

    def active(self, t: float) -> list:
        return [s for s in self.specs if s.is_active(t)]


def schedule_active(schedule: FaultSchedule, t: float) -> list:
    """Specs active at time t: start <= t < start + duration."""
    return schedule.active(t)


# --- runtime injection ----------------------------------------------------------

_IMU_ATT_IDX = {"imu.attitude.x": 0, "imu.attitude.y": 1, "imu.attitude.z": 2}
_IMU_RATE_IDX = {"imu.rate.x": 0, "imu.rate.y": 1, "imu.rate.z": 2}
_SERVO_IDX = {"servo.elevator": 0, "servo.aileron": 1, "servo.rudder": 2}


class FaultInjector:
    """Applies the schedule between truth/command and the flight computer.

    Sensor faults corrupt readings after noise; actuator faults corrupt
    commands before the servo lag.  With nothing active every apply_* is
    the identity and touches neither RNG nor state, so an empty schedule
    is bit-transparent.
    """

    def __init__(self, schedule: FaultSchedule, rng: np.random.Generator = None):
        self.schedule = schedule
        self.rng = rng or np.random.default_rng(0)
        self._built = {}            # spec id -> runtime states
        self._held_gps = None       # last clean epoch, for interruption

    def _states(self, spec):
        key = id(spec)
        if key not in self._built:
            self._built[key] = spec.build_states()
        return self._built[key]

    def active_labels(self, t: float) -> list:
        return [s.label() for s in self.schedule.active(t)]

    def apply_imu(self, reading: ImuReading, t: float) -> ImuReading:
        specs = [s for s in self.schedule.active(t)
                 if s.kind == "sensor" and s.target.startswith("imu")]
        if not specs:
            return reading
        out = reading.copy()
        for spec in specs:
            for st in self._states(spec):
                if st.mode is SensorFaultMode.DISCONNECT:
                    out.attitude[:] = 0.0
                    out.rates[:] = 0.0
                    out.accel[:] = 0.0
                    out.health = False
                elif st.channel in _IMU_ATT_IDX:
                    i = _IMU_ATT_IDX[st.channel]
                    out.attitude[i] = apply_sensor_fault(out.attitude[i], st, t)
                elif st.channel in _IMU_RATE_IDX:
                    i = _IMU_RATE_IDX[st.channel]
                    out.rates[i] = apply_sensor_fault(out.rates[i], st, t)
        return out

    def apply_gps(self, reading: GpsReading, t: float) -> GpsReading:
        specs = [s for s in self.schedule.active(t)
                 if s.kind in ("gps", "sensor") and s.target.startswith("gps")]
        if not specs:
            self._held_gps = reading
            return reading
        out = reading.copy()
        for spec in specs:
            for entry in self._states(spec):
                if spec.kind == "gps":
                    _, mode, params = entry
                    if mode is GpsFaultMode.INTERRUPTION and self._held_gps is not None:
                        held = self._held_gps.copy()
                        held.timestamp = out.timestamp
                        out = held
                    out = gps_fault_transform(out, mode, params)
                else:
                    st = entry
                    value_map = {"gps.latitude": "latitude", "gps.longitude": "longitude",
                                 "gps.altitude": "altitude", "gps.speed": "ground_speed"}
                    if st.channel in value_map:
                        attr = value_map[st.channel]
                        setattr(out, attr, apply_sensor_fault(getattr(out, attr), st, t))
                    elif st.channel == "gps.satellites":
                        sats = int(round(apply_sensor_fault(float(out.satellites), st, t)))
                        out.satellites = max(sats, 0)
                        out.fix_valid = out.fix_valid and out.satellites >= 8
        return out

    def apply_actuator(self, command: ControlCommand, servo_actual: SurfaceActual,
                       t: float, dt: float) -> ControlCommand:
        specs = [s for s in self.schedule.active(t) if s.kind == "servo"]
        if not specs:
            return command
        u = [command.elevator, command.aileron, command.rudder]
        actual = [servo_actual.elevator, servo_actual.aileron, servo_actual.rudder]
        for spec in specs:
            for st in self._states(spec):
                i = _SERVO_IDX[st.channel]
                if st.mode is ActuatorFaultMode.STUCK:
                    st.latch(actual[i])
                elif st.mode is ActuatorFaultMode.LOOSE and st.params.get("float"):
                    sigma = float(st.params.get("wander_sigma", 1.0 * DEG))
                    tau = float(st.params.get("wander_tau", 0.5))
                    rho = np.exp(-dt / tau)
                    st.set_wander(rho * st.d(t)
                                  + np.sqrt(1.0 - rho * rho) * sigma * self.rng.normal())
                u[i] = apply_actuator_fault(u[i], st, t)
        return ControlCommand(elevator=u[0], aileron=u[1], rudder=u[2],
                              throttle=command.throttle, limit=command.limit)
