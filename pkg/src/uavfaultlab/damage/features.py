"""Windowed feature extraction from telemetry.

Only observer-visible columns feed the features: measurement streams
(meas_*), commanded/actual surfaces and throttle.  Truth-state columns and
the phase/failsafe/nav annotations are never read, so a classifier built
on FeatureVector cannot peek at the simulator's ground truth.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from ..errors import AnalysisError

DEG = np.pi / 180.0
METERS_PER_DEG = 111320.0

# The only telemetry columns this module may read.
OBSERVER_COLUMNS = (
    "t",
    "meas_roll", "meas_pitch", "meas_yaw", "meas_p", "meas_q", "meas_r",
    "meas_ax", "meas_ay", "meas_az", "meas_imu_health",
    "meas_lat", "meas_lon", "meas_alt", "meas_gspeed", "meas_sats", "meas_fix",
    "cmd_pitch", "cmd_roll", "cmd_elevator", "cmd_aileron", "cmd_rudder",
    "act_elevator", "act_aileron", "act_rudder",
    "throttle_cmd", "throttle_act",
)

SURFACE_CHANNELS = ("elevator", "aileron", "rudder")


@dataclass
class FeatureVector:
    """Statistics of one sliding window."""

    t_start: float
    t_end: float
    # attitude angles (rad)
    roll_mean: float
    roll_std: float
    roll_range: float
    pitch_mean: float
    pitch_std: float
    pitch_range: float
    yaw_std: float
    yaw_range: float
    # body rates (rad/s)
    p_std: float
    q_std: float
    r_std: float
    rate_max: float
    # throttle
    throttle_mean: float
    throttle_drop: float          # 1.0 when commanded throttle collapsed to ~0
    # trends
    airspeed_trend: float         # m/s per s, from GPS ground speed
    alt_rate: float               # m/s, from GPS altitude
    # GPS stream
    pos_jump_max: float           # m between consecutive frames
    sats_min: float
    fix_min: float
    imu_health_min: float
    imu_frozen_zero: float        # 1.0 when the whole IMU stream is exactly 0
    # surface channels: cmd-vs-act residual statistics
    resid_mean_elevator: float
    resid_mean_aileron: float
    resid_mean_rudder: float
    resid_max: float
    gain_est_elevator: float      # act/cmd DC-gain estimate (nan if unobservable)
    gain_est_aileron: float
    gain_est_rudder: float
    act_std_max: float
    cmd_std_max: float
    act_burr: float               # high-frequency content of actual surfaces
    act_burr_excess: float        # act burr beyond what the command carries
    resid_hf_peak: float          # spectral peak >= 1.5 Hz of act-cmd residual
    # oscillation scores: dominant frequency x amplitude per attitude channel
    osc_score_roll: float
    osc_score_pitch: float
    osc_score_yaw: float
    osc_freq_roll: float
    # pitch high-frequency "burr"
    pitch_burr: float
    # attitude-slope vs rate-prediction mismatch (rad/s; nan when gated out)
    imu_inconsistency: float
    # |measured yaw - GPS ground course| (rad; nan when not estimable)
    yaw_course_mismatch: float
    # measured-minus-commanded roll, mean (rad), and command activity
    roll_cmd_mismatch: float
    roll_cmd_abs: float

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)])


def feature_names():
    return [f.name for f in fields(FeatureVector)]


def _slope(t, y):
    if len(t) < 2:
        return 0.0
    tm = t - t.mean()
    denom = float(np.dot(tm, tm))
    if denom == 0.0:
        return 0.0
    return float(np.dot(tm, y - y.mean()) / denom)


def _highpass_rms(y, n_smooth):
    if len(y) < n_smooth + 2:
        return 0.0
    kernel = np.ones(n_smooth) / n_smooth
    smooth = np.convolve(y, kernel, mode="same")
    resid = (y - smooth)[n_smooth:-n_smooth]
    if len(resid) == 0:
        return 0.0
    return float(np.sqrt(np.mean(resid ** 2)))


def _amplitude_spectrum(t, y):
    """(freqs, single-sided amplitudes) of the detrended signal."""
    n = len(y)
    if n < 8:
        return None, None
    dt = (t[-1] - t[0]) / (n - 1)
    if dt <= 0:
        return None, None
    yd = y - (y.mean() + _slope(t, y) * (t - t.mean()))
    spec = np.abs(np.fft.rfft(yd)) * 2.0 / n
    return np.fft.rfftfreq(n, dt), spec


def _dominant_oscillation(t, y):
    """(score, freq): dominant-frequency amplitude x frequency of the
    detrended signal; (0, 0) for constant windows."""
    freqs, spec = _amplitude_spectrum(t, y)
    if freqs is None or len(spec) < 2:
        return 0.0, 0.0
    i = int(np.argmax(spec[1:])) + 1
    return float(freqs[i] * spec[i]), float(freqs[i])


def _hf_peak(t, y, f_min=1.5):
    """Largest spectral amplitude at or above f_min Hz."""
    freqs, spec = _amplitude_spectrum(t, y)
    if freqs is None:
        return 0.0
    sel = freqs >= f_min
    return float(spec[sel].max()) if np.any(sel) else 0.0


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def extract_features(df, window: float = 5.0, stride: float = 2.5) -> list:
    """Deterministic windowed statistics over a telemetry DataFrame.

    Needs at least two full windows of telemetry; raises AnalysisError
    otherwise.
    """
    if window <= 0 or stride <= 0:
        raise AnalysisError("window and stride must be positive")
    t = df["t"].to_numpy(dtype=float)
    if len(t) < 4 or t[-1] - t[0] < 2 * window:
        raise AnalysisError(
            f"telemetry too short for analysis: {t[-1] - t[0] if len(t) else 0:.1f} s "
            f"< 2 windows of {window} s")

    cols = {c: df[c].to_numpy(dtype=float) for c in OBSERVER_COLUMNS}
    dt_frame = float(np.median(np.diff(t)))
    n_smooth = max(3, int(round(0.5 / dt_frame)))

    # Per-frame GPS position jump (m); repeated epochs difference to zero.
    lat, lon = cols["meas_lat"], cols["meas_lon"]
    dlat = np.diff(lat) * METERS_PER_DEG
    dlon = np.diff(lon) * METERS_PER_DEG * np.cos(np.radians(lat[:-1]))
    jump = np.concatenate([[0.0], np.hypot(dlat, dlon)])

    out = []
    start = t[0]
    while start + window <= t[-1] + 1e-9:
        sel = (t >= start - 1e-12) & (t < start + window - 1e-12)
        if np.count_nonzero(sel) >= 4:
            out.append(_window_features(t[sel], {c: v[sel] for c, v in cols.items()},
                                        jump[sel], n_smooth))
        start += stride
    if len(out) < 2:
        raise AnalysisError("telemetry too short for analysis")
    return out


def _window_features(t, w, jump, n_smooth):
    roll, pitch, yaw = w["meas_roll"], w["meas_pitch"], w["meas_yaw"]
    p, q, r = w["meas_p"], w["meas_q"], w["meas_r"]

    # cmd-vs-act per channel: residual stats and a DC gain estimate.  The
    # gain comes from the ratio of means: the servo lag passes DC exactly,
    # so a healthy channel reads 1.0 and a derated one reads its true gain,
    # while regression on the dithery high-frequency content would not.
    resid_mean = {}
    gain = {}
    resid_max = 0.0
    act_std_max = 0.0
    cmd_std_max = 0.0
    act_burr = 0.0
    act_burr_excess = 0.0
    for ch in SURFACE_CHANNELS:
        cmd = w[f"cmd_{ch}"]
        act = w[f"act_{ch}"]
        resid = act - cmd
        resid_mean[ch] = float(resid.mean())
        resid_max = max(resid_max, float(np.max(np.abs(resid))))
        act_std_max = max(act_std_max, float(act.std()))
        cmd_std_max = max(cmd_std_max, float(cmd.std()))
        cmd_mean = float(cmd.mean())
        gain[ch] = float(act.mean() / cmd_mean) if abs(cmd_mean) > 1.5e-3 \
            else math.nan
        hp_act = _highpass_rms(act, n_smooth)
        hp_cmd = _highpass_rms(cmd, n_smooth)
        act_burr = max(act_burr, hp_act)
        act_burr_excess = max(act_burr_excess, hp_act - hp_cmd)

    # IMU internal consistency: attitude slope vs Euler-rate prediction.
    # Judged per channel and only while that measured angle is quiet: a
    # drifting gyro disagrees with the rates at zero slope, a gain fault
    # only while the angle moves.  Gated out entirely in violent motion.
    rate_max = float(np.max(np.abs(np.stack([p, q, r]))))
    inconsistency = math.nan
    if rate_max < 0.5 and float(np.max(np.abs(pitch))) < 1.0:
        dt_win = t[-1] - t[0]
        tth = np.tan(np.clip(pitch, -1.45, 1.45))
        preds = (float(np.mean(p + tth * (q * np.sin(roll) + r * np.cos(roll)))),
                 float(np.mean(q * np.cos(roll) - r * np.sin(roll))))
        slopes = (_wrap(roll[-1] - roll[0]) / dt_win,
                  _wrap(pitch[-1] - pitch[0]) / dt_win)
        gaps = [abs(s - pr) for s, pr in zip(slopes, preds)
                if abs(s) < 0.35 * DEG]
        if gaps:
            inconsistency = max(gaps)

    # Yaw vs GPS ground course (needs a valid fix and real displacement).
    lat, lon = w["meas_lat"], w["meas_lon"]
    dn = (lat[-1] - lat[0]) * METERS_PER_DEG
    de = (lon[-1] - lon[0]) * METERS_PER_DEG * np.cos(np.radians(lat[0]))
    if float(w["meas_fix"].min()) > 0.5 and np.hypot(dn, de) > 50.0:
        course = np.arctan2(de, dn)
        mean_yaw = np.arctan2(np.mean(np.sin(yaw)), np.mean(np.cos(yaw)))
        yaw_course = abs(_wrap(mean_yaw - course))
    else:
        yaw_course = math.nan

    osc_roll, freq_roll = _dominant_oscillation(t, roll)
    osc_pitch, _ = _dominant_oscillation(t, pitch)
    osc_yaw, _ = _dominant_oscillation(t, np.unwrap(yaw))

    thr = w["throttle_cmd"]
    return FeatureVector(
        t_start=float(t[0]), t_end=float(t[-1]),
        roll_mean=float(roll.mean()), roll_std=float(roll.std()),
        roll_range=float(roll.max() - roll.min()),
        pitch_mean=float(pitch.mean()), pitch_std=float(pitch.std()),
        pitch_range=float(pitch.max() - pitch.min()),
        yaw_std=float(yaw.std()), yaw_range=float(np.ptp(np.unwrap(yaw))),
        p_std=float(p.std()), q_std=float(q.std()), r_std=float(r.std()),
        rate_max=rate_max,
        throttle_mean=float(thr.mean()),
        throttle_drop=1.0 if float(thr[-1]) < 0.02 and float(thr.max()) < 0.05 else 0.0,
        airspeed_trend=_slope(t, w["meas_gspeed"]),
        alt_rate=_slope(t, w["meas_alt"]),
        pos_jump_max=float(jump.max()),
        sats_min=float(w["meas_sats"].min()),
        fix_min=float(w["meas_fix"].min()),
        imu_health_min=float(w["meas_imu_health"].min()),
        imu_frozen_zero=1.0 if float(np.max(np.abs(np.stack(
            [roll, pitch, yaw, p, q, r])))) == 0.0 else 0.0,
        resid_mean_elevator=resid_mean["elevator"],
        resid_mean_aileron=resid_mean["aileron"],
        resid_mean_rudder=resid_mean["rudder"],
        resid_max=resid_max,
        gain_est_elevator=gain["elevator"],
        gain_est_aileron=gain["aileron"],
        gain_est_rudder=gain["rudder"],
        act_std_max=act_std_max, cmd_std_max=cmd_std_max,
        act_burr=act_burr, act_burr_excess=act_burr_excess,
        osc_score_roll=osc_roll, osc_score_pitch=osc_pitch, osc_score_yaw=osc_yaw,
        osc_freq_roll=freq_roll,
        pitch_burr=_highpass_rms(pitch, n_smooth),
        imu_inconsistency=inconsistency,
        yaw_course_mismatch=yaw_course,
        roll_cmd_mismatch=float(np.mean(roll - w["cmd_roll"])),
        roll_cmd_abs=float(np.mean(np.abs(w["cmd_roll"]))),
    )
