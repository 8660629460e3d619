"""Altitude step-response experiment and trace metrics."""

from dataclasses import dataclass

import numpy as np

from ..errors import ExperimentError, SimulationDiverged


@dataclass(frozen=True)
class StepMetrics:
    overshoot_pct: float        # peak beyond target, % of step size
    settling_time_s: float      # 2% band, measured from the step instant
    steady_state_error: float   # |final - target|, trace units

    def as_dict(self):
        return {"overshoot_pct": self.overshoot_pct,
                "settling_time_s": self.settling_time_s,
                "steady_state_error": self.steady_state_error}


def step_metrics(t, y, t_step: float, y_initial: float, y_target: float) -> StepMetrics:
    """Classic step metrics from a recorded trace.

    Pure function of its inputs: the same trace always yields the same
    metrics.  The settling band is 2% of the step size; steady-state error
    is taken over the trailing 10% of the trace.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or len(t) < 3:
        raise ExperimentError("trace too short for step metrics")
    step = y_target - y_initial
    if step == 0:
        raise ExperimentError("zero-amplitude step")
    after = t >= t_step
    ya = y[after]
    ta = t[after]
    peak = np.max((ya - y_target) / step)
    overshoot = max(0.0, float(peak)) * 100.0

    band = 0.02 * abs(step)
    outside = np.abs(ya - y_target) > band
    if outside[-1]:
        settling = float("inf")
    elif not np.any(outside):
        settling = 0.0
    else:
        last_out = np.max(np.nonzero(outside)[0])
        settling = float(ta[last_out + 1] - t_step)

    tail = max(3, int(0.1 * len(ya)))
    sse = abs(float(np.mean(ya[-tail:])) - y_target)
    return StepMetrics(overshoot_pct=overshoot, settling_time_s=settling,
                       steady_state_error=sse)


def step_response_experiment(config, step_amplitude: float,
                             cruise_altitude: float = 150.0,
                             cruise_speed: float = 45.0,
                             duration: float = 250.0,
                             t_step: float = 10.0,
                             gains=None,
                             control_hz: float = 100.0,
                             physics_dt: float = 0.001):
    """Closed-loop altitude step at cruise with ideal sensing.

    Trims, flies level, applies the altitude step at ``t_step`` and runs
    ``duration`` seconds.  Returns (StepMetrics, t_array, altitude_array).
    """
    from .. import avionics
    from ..flightdyn import step_closed_loop, trim
    from .controller import Autopilot

    state, trim_cmd = trim(config, cruise_altitude, cruise_speed)
    ap = Autopilot(gains=gains, trim_command=trim_cmd, trim_pitch=state.pitch,
                   surface_limit=config.surface_limit)
    servos = avionics.ServoBank(config.surface_limit, initial=trim_cmd)

    dt = 1.0 / control_hz
    substeps = max(1, int(round(dt / physics_dt)))
    n = int(round(duration * control_hz))
    times = np.empty(n)
    alts = np.empty(n)
    try:
        for k in range(n):
            t = k * dt
            nav = avionics.nav_from_truth(state)
            alt_cmd = cruise_altitude + (step_amplitude if t >= t_step else 0.0)
            cmd = ap.update(nav, alt_cmd, cruise_speed, course_cmd=0.0, dt=dt)
            actual = servos.update(cmd, dt)
            state = step_closed_loop(state, actual, actual.throttle, config,
                                     physics_dt, substeps)
            times[k] = t
            alts[k] = state.altitude
    except SimulationDiverged as exc:
        raise ExperimentError(f"step-response run diverged at t={state.time:.2f} s") from exc

    metrics = step_metrics(times, alts, t_step, cruise_altitude,
                           cruise_altitude + step_amplitude)
    return metrics, times, alts
