"""Telemetry recording: flat CSV plus a sidecar JSON run summary.

Column order is fixed and is part of the external interface:

    t, px, py, pz, u, v, w, roll, pitch, yaw, p, q, r,
    meas_roll, meas_pitch, meas_yaw, meas_p, meas_q, meas_r,
    meas_ax, meas_ay, meas_az, meas_imu_health,
    meas_lat, meas_lon, meas_alt, meas_gspeed, meas_sats, meas_fix,
    nav_source, phase, failsafe,
    cmd_pitch, cmd_roll, cmd_elevator, cmd_aileron, cmd_rudder,
    act_elevator, act_aileron, act_rudder,
    throttle_cmd, throttle_act, fault_labels

Angles in radians, positions in meters (NED), lat/lon in degrees.
``fault_labels`` is '|'-joined ``target:mode`` entries, empty when no
fault is active.  Floats are written with %.10g so identical runs produce
identical bytes.
"""

import json
from dataclasses import dataclass

import numpy as np
import pandas as pd

COLUMNS = [
    "t", "px", "py", "pz", "u", "v", "w", "roll", "pitch", "yaw", "p", "q", "r",
    "meas_roll", "meas_pitch", "meas_yaw", "meas_p", "meas_q", "meas_r",
    "meas_ax", "meas_ay", "meas_az", "meas_imu_health",
    "meas_lat", "meas_lon", "meas_alt", "meas_gspeed", "meas_sats", "meas_fix",
    "nav_source", "phase", "failsafe",
    "cmd_pitch", "cmd_roll", "cmd_elevator", "cmd_aileron", "cmd_rudder",
    "act_elevator", "act_aileron", "act_rudder",
    "throttle_cmd", "throttle_act", "fault_labels",
]

_STR_COLS = ("nav_source", "phase", "failsafe", "fault_labels")
_INT_COLS = ("meas_imu_health", "meas_sats", "meas_fix")


@dataclass
class TelemetryFrame:
    """One logged timestep, as a typed view of a CSV row."""

    t: float
    truth: dict
    measurements: dict
    nav_source: str
    phase: str
    failsafe: str
    commands: dict
    actuals: dict
    fault_labels: tuple

    @classmethod
    def from_row(cls, row) -> "TelemetryFrame":
        labels = row["fault_labels"]
        labels = tuple(labels.split("|")) if labels else ()
        return cls(
            t=float(row["t"]),
            truth={k: float(row[k]) for k in
                   ("px", "py", "pz", "u", "v", "w", "roll", "pitch", "yaw",
                    "p", "q", "r")},
            measurements={k: float(row[k]) for k in COLUMNS
                          if k.startswith("meas_")},
            nav_source=row["nav_source"], phase=row["phase"],
            failsafe=row["failsafe"],
            commands={k: float(row[k]) for k in
                      ("cmd_pitch", "cmd_roll", "cmd_elevator", "cmd_aileron",
                       "cmd_rudder", "throttle_cmd")},
            actuals={k: float(row[k]) for k in
                     ("act_elevator", "act_aileron", "act_rudder", "throttle_act")},
            fault_labels=labels)


class TelemetryWriter:
    """Accumulates formatted CSV rows; strictly time-ordered."""

    def __init__(self):
        self._rows = [",".join(COLUMNS)]
        self._last_t = -np.inf

    def add(self, values: dict):
        t = values["t"]
        if t <= self._last_t:
            raise ValueError(f"telemetry rows must be strictly time-ordered "
                             f"({t} after {self._last_t})")
        self._last_t = t
        parts = []
        for col in COLUMNS:
            v = values[col]
            if col in _STR_COLS:
                parts.append(v)
            elif col in _INT_COLS:
                parts.append(str(int(v)))
            else:
                parts.append("%.10g" % v)
        self._rows.append(",".join(parts))

    @property
    def n_frames(self):
        return len(self._rows) - 1

    def text(self) -> str:
        return "\n".join(self._rows) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.text())


def read_telemetry(path_or_buffer) -> pd.DataFrame:
    """Load a telemetry CSV with stable dtypes (strings never become NaN)."""
    df = pd.read_csv(path_or_buffer,
                     dtype={c: str for c in _STR_COLS},
                     keep_default_na=False)
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"telemetry missing columns: {missing}")
    return df


def write_summary(summary: dict, path):
    with open(path, "w") as fh:
        fh.write(dump_summary(summary))


def dump_summary(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
