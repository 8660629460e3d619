"""Rule-based fault localization from externally observable features.

The rule base turns the damage-analysis prose into ordered executable
predicates (first match wins).  Each rule reads only aggregated
FeatureVector statistics; thresholds live in RuleThresholds and can be
loaded from a YAML file for recalibration.

Signature summary per mode:

* GPS interruption: satellites drop to 0, fix flag low.
* GPS deception: multi-km jump between fixes (fix flag still high),
  roll thrash and an engine cut follow.
* GPS weaker/weak signal: satellite count sags below/above the usability
  threshold with nothing else wrong.
* IMU disconnect: the whole inertial stream reads exactly zero.
* IMU drift: attitude slope disagrees with the measured rates for many
  consecutive windows (present-but-wrong stream).
* IMU multiplicative / constant deviation: measured yaw disagrees with the
  GPS ground course (proportionally / by a fixed offset), or the measured
  roll holds a fixed offset from its command.
* IMU transient drift: short-lived attitude jumps that revert.
* stuck servo: actual surfaces frozen while commands keep moving.
* servo jitter: high-frequency sawtooth on the actual surfaces.
* servo constant deviation: steady actual-minus-command bias.
* servo damage/loose: actuals track a scaled-down command (gain band
  splits the two).
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np
import yaml

from ..errors import AnalysisError
from .features import FeatureVector

DEG = np.pi / 180.0


@dataclass
class RuleThresholds:
    pos_jump_m: float = 1000.0
    inconsistency_rad_s: float = 0.3 * DEG
    inconsistency_windows: int = 2
    act_frozen_std: float = 1e-7
    cmd_active_std: float = 3e-4
    stuck_windows: int = 2
    act_burr_excess_rad: float = 2e-3
    jitter_windows: int = 3
    servo_bias_rad: float = 1.0 * DEG
    bias_windows: int = 3
    gain_low: float = 0.40            # below: treated as stuck-ish, ignore
    gain_damage_max: float = 0.85     # (gain_low, this]  -> damage
    gain_loose_max: float = 0.965     # (damage_max, this] -> loose
    yaw_mult_rad: float = 10.0 * DEG
    yaw_dev_rad: float = 2.0 * DEG
    dev_windows: int = 6
    transient_roll_rad: float = 0.6 * DEG
    transient_cmd_quiet_rad: float = 2.0 * DEG
    transient_rate_quiet: float = 0.15
    transient_max_windows: int = 8
    onset_sigma: float = 5.0
    baseline_windows: int = 3

    @classmethod
    def load(cls, path):
        with open(path, "r") as fh:
            doc = yaml.safe_load(fh) or {}
        th = cls()
        for key, val in doc.items():
            if not hasattr(th, key):
                raise AnalysisError(f"unknown rule threshold {key!r}")
            setattr(th, key, type(getattr(th, key))(val))
        return th

    def save(self, path):
        with open(path, "w") as fh:
            yaml.safe_dump(asdict(self), fh, sort_keys=True)


@dataclass
class DamageReport:
    """Inferred fault plus its mission/platform consequences."""

    location: str = "None"          # GPS | IMU | Actuator | None
    mode: str = None
    onset_s: float = None
    mission_impact: str = "none"    # none | degraded | failed
    platform_damage: str = "none"   # none | minor | delayed | destroyed
    trend: str = "nominal flight, no anomaly observed"
    can_attack: bool = True
    glide_distance_km: float = None

    def __post_init__(self):
        if self.location == "None" and self.mode is not None:
            raise AnalysisError("location None implies mode None")

    def as_dict(self):
        return asdict(self)


class Aggregate:
    """Whole-run summaries of a feature-vector sequence."""

    def __init__(self, features):
        if not features:
            raise AnalysisError("empty feature sequence")
        self.features = features
        arr = {name: np.array([getattr(f, name) for f in features])
               for name in features[0].__dataclass_fields__}
        self.arr = arr

    def vmax(self, name):
        a = self.arr[name]
        a = a[~np.isnan(a)]
        return float(a.max()) if len(a) else math.nan

    def vmin(self, name):
        a = self.arr[name]
        a = a[~np.isnan(a)]
        return float(a.min()) if len(a) else math.nan

    def count(self, name, predicate):
        a = self.arr[name]
        ok = ~np.isnan(a)
        return int(np.count_nonzero(predicate(a[ok])))

    def count_joint(self, predicate):
        """Windows where a predicate over the whole FeatureVector holds."""
        return sum(1 for f in self.features if predicate(f))

    def median_valid(self, name, valid_mask=None):
        a = self.arr[name]
        mask = ~np.isnan(a)
        if valid_mask is not None:
            mask &= valid_mask
        vals = a[mask]
        return float(np.median(vals)) if len(vals) else math.nan

    def gain_median(self):
        """Median surface gain estimate over channels/windows where the
        command was active enough to make the estimate meaningful."""
        vals = []
        for ch in ("elevator", "aileron", "rudder"):
            a = self.arr[f"gain_est_{ch}"]
            vals.extend(a[~np.isnan(a)])
        return float(np.median(vals)) if vals else math.nan


@dataclass
class Rule:
    name: str
    location: str
    mode: str
    condition: callable   # Aggregate -> bool


class RuleBase:
    """Ordered rules; classification takes the first match."""

    def __init__(self, thresholds: RuleThresholds = None):
        self.thresholds = thresholds or RuleThresholds()
        th = self.thresholds
        def transient_window(f):
            return (not math.isnan(f.roll_cmd_mismatch)
                    and abs(f.roll_cmd_mismatch) > th.transient_roll_rad
                    and f.roll_cmd_abs < th.transient_cmd_quiet_rad
                    and f.rate_max < th.transient_rate_quiet)

        self.rules = [
            Rule("gps_interruption", "GPS", "interruption",
                 lambda a: a.vmin("sats_min") == 0.0 and a.vmin("fix_min") == 0.0),
            Rule("gps_deception", "GPS", "deception",
                 lambda a: a.vmax("pos_jump_max") > th.pos_jump_m),
            Rule("gps_weaker_signal", "GPS", "weaker_signal",
                 lambda a: 0.0 < a.vmin("sats_min") < 8.0),
            Rule("gps_weak_signal", "GPS", "weak_signal",
                 lambda a: 8.0 <= a.vmin("sats_min") <= 14.0),
            Rule("imu_disconnect", "IMU", "disconnect",
                 lambda a: a.vmin("imu_health_min") == 0.0
                 or a.vmax("imu_frozen_zero") == 1.0),
            Rule("servo_stuck", "Actuator", "stuck",
                 lambda a: a.count_joint(
                     lambda f: f.act_std_max < th.act_frozen_std
                     and f.cmd_std_max > th.cmd_active_std)
                 >= th.stuck_windows),
            Rule("imu_drift", "IMU", "drift",
                 lambda a: a.count("imu_inconsistency",
                                   lambda v: v > th.inconsistency_rad_s)
                 >= th.inconsistency_windows),
            Rule("servo_jitter", "Actuator", "jitter",
                 lambda a: a.count("act_burr_excess",
                                   lambda v: v > th.act_burr_excess_rad)
                 >= th.jitter_windows),
            Rule("servo_constant_deviation", "Actuator", "constant_deviation",
                 lambda a: a.count_joint(
                     lambda f: abs(f.resid_mean_elevator) > th.servo_bias_rad
                     and abs(f.resid_mean_aileron) > th.servo_bias_rad)
                 >= th.bias_windows),
            Rule("servo_damage", "Actuator", "damage",
                 lambda a: th.gain_low < a.gain_median() <= th.gain_damage_max),
            Rule("servo_loose", "Actuator", "loose",
                 lambda a: th.gain_damage_max < a.gain_median() <= th.gain_loose_max),
            Rule("imu_multiplicative", "IMU", "multiplicative",
                 lambda a: a.count("yaw_course_mismatch",
                                   lambda v: v > th.yaw_mult_rad)
                 >= th.dev_windows),
            Rule("imu_constant_deviation", "IMU", "constant_deviation",
                 lambda a: a.count("yaw_course_mismatch",
                                   lambda v: v > th.yaw_dev_rad)
                 >= th.dev_windows),
            Rule("imu_transient_drift", "IMU", "transient_drift",
                 lambda a: 1 <= a.count_joint(transient_window)
                 <= th.transient_max_windows),
        ]

    def mode_coverage(self):
        """(location, mode) pairs the rule base can produce."""
        return {(r.location, r.mode) for r in self.rules}

    def first_match(self, agg: Aggregate):
        for rule in self.rules:
            value = rule.condition(agg)
            if value and not (isinstance(value, float) and math.isnan(value)):
                return rule
        return None


# Consequence tables: (mission_impact, platform_damage, can_attack, trend).
_CONSEQUENCES = {
    ("GPS", "deception"): (
        "degraded", "minor", True,
        "spoofed fix rejected; inertial positioning diverges, then an "
        "unpowered pitch-hold glide trades altitude for range until touchdown"),
    ("GPS", "weak_signal"): (
        "none", "none", True,
        "satellite count reduced but the fix stays usable; flight continues"),
    ("GPS", "weaker_signal"): (
        "degraded", "minor", True,
        "fix unusable; inertial positioning carries the flight briefly, then "
        "the fallback glide descends to touchdown"),
    ("GPS", "interruption"): (
        "degraded", "minor", True,
        "fix lost outright; same degradation path as an unusable fix"),
    ("IMU", "multiplicative"): (
        "none", "none", True,
        "attitude gain error re-biases the flown heading; control remains"),
    ("IMU", "constant_deviation"): (
        "none", "none", True,
        "fixed attitude offset is absorbed by the outer loops; control remains"),
    ("IMU", "drift"): (
        "degraded", "minor", True,
        "attitude reference walks away; surfaces freeze at the last good "
        "command and the aircraft descends in a slow departure"),
    ("IMU", "transient_drift"): (
        "none", "none", True,
        "short attitude spikes disturb then release the loops; flight recovers"),
    ("IMU", "disconnect"): (
        "degraded", "minor", True,
        "attitude feedback gone; surfaces freeze and the aircraft descends"),
    ("Actuator", "constant_deviation"): (
        "none", "none", True,
        "uniform surface offset retrimmed by the loops; small attitude shift"),
    ("Actuator", "stuck"): (
        "failed", "destroyed", False,
        "surfaces no longer answer; attitude diverges, speed builds in the "
        "dive and the airframe is lost at impact"),
    ("Actuator", "loose"): (
        "none", "minor", True,
        "surfaces under-respond; pitch works harder but the mission holds"),
    ("Actuator", "damage"): (
        "none", "minor", True,
        "stronger under-response than looseness; still controllable"),
    ("Actuator", "jitter"): (
        "none", "none", True,
        "intermittent surface dropouts leave burrs on pitch; track unaffected"),
}


def classify(features, rules: RuleBase = None, telemetry=None) -> DamageReport:
    """First-match classification plus consequence reporting.

    ``telemetry`` (the source DataFrame) is optional; when given it refines
    the platform-damage verdict from the run's end-state observables and
    fills in the glide-distance estimate for engine-off descents.
    """
    if not features:
        raise AnalysisError("empty feature sequence")
    rules = rules or RuleBase()
    agg = Aggregate(features)
    match = rules.first_match(agg)
    if match is None:
        return DamageReport()

    mission, platform, attack, trend = _CONSEQUENCES[(match.location, match.mode)]
    onset = estimate_onset(features, rules.thresholds)
    glide = None
    if telemetry is not None:
        try:
            glide = glide_distance_estimate(telemetry)
        except AnalysisError:
            glide = None
        if match.mode == "stuck":
            # Phase-carryover: a latched surface that never forces impact
            # within the record shows up as delayed platform damage.
            end_alt = float(telemetry["meas_alt"].iloc[-1])
            if end_alt > 20.0:
                platform = "delayed"
                mission = "degraded"
    return DamageReport(location=match.location, mode=match.mode,
                        onset_s=onset, mission_impact=mission,
                        platform_damage=platform, trend=trend,
                        can_attack=attack, glide_distance_km=glide)


def estimate_onset(features, thresholds: RuleThresholds) -> float:
    """First window whose features leave the 5-sigma baseline band.

    Baseline statistics come from the first few windows (campaign runs
    inject no earlier than 30 s in).  Returns the window start time, or
    None when nothing ever leaves the band.
    """
    nb = min(thresholds.baseline_windows, max(1, len(features) - 1))
    watch = ("roll_mean", "pitch_mean", "roll_std", "pitch_std", "yaw_std",
             "throttle_mean", "alt_rate", "pos_jump_max", "sats_min",
             "imu_health_min", "resid_mean_elevator", "resid_mean_aileron",
             "act_burr", "act_std_max", "roll_cmd_mismatch")
    base = np.array([[getattr(f, n) for n in watch] for f in features[:nb]],
                    dtype=float)
    mean = np.nanmean(base, axis=0)
    std = np.nanstd(base, axis=0)
    floor = np.array([1e-3 * DEG if "roll" in n or "pitch" in n or "yaw" in n
                      else 1e-6 for n in watch])
    std = np.maximum(std, floor)
    for f in features[nb:]:
        vals = np.array([getattr(f, n) for n in watch], dtype=float)
        dev = np.abs(vals - mean)
        ok = ~np.isnan(vals)
        if np.any(dev[ok] > thresholds.onset_sigma * std[ok]):
            return float(f.t_start)
    return None


def glide_distance_estimate(telemetry) -> float:
    """Forward distance covered in the engine-off fallback descent, km.

    Finds the sustained throttle-zero segment and integrates GPS ground
    speed from its start to touchdown (or the end of the record).  Raises
    AnalysisError when there is no such segment.
    """
    t = telemetry["t"].to_numpy(dtype=float)
    thr = telemetry["throttle_cmd"].to_numpy(dtype=float)
    gs = telemetry["meas_gspeed"].to_numpy(dtype=float)
    alt = telemetry["meas_alt"].to_numpy(dtype=float)

    off = thr < 0.02
    # Sustained = engine off through the end of the record (>= 5 s long).
    idx = None
    for i in range(len(t)):
        if off[i] and np.all(off[i:]):
            idx = i
            break
    if idx is None or t[-1] - t[idx] < 5.0:
        raise AnalysisError("no engine-off glide segment in telemetry")
    if alt[idx] <= 1.0:
        return 0.0
    seg = slice(idx, len(t))
    dist = float(np.trapezoid(gs[seg], t[seg]))
    return dist / 1000.0
