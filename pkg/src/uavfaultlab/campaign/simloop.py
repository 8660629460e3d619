"""Closed-loop simulation: sense -> inject -> navigate -> control -> inject
-> servo -> dynamics.

The stage order is fixed and guarded by a golden-run regression test;
reordering it is a breaking change.  Each control tick (default 100 Hz):

1. measure IMU (current specific force) and, on epoch boundaries, GPS
2. apply active sensor faults to the readings
3. update the IMU health monitor and the failsafe state machine
4. assemble the navigation solution (GPS+IMU, or dead reckoning)
5. advance the flight-phase machine (binds phase-anchored faults)
6. run the control laws for the active failsafe mode
7. apply active actuator faults to the command
8. advance servo dynamics
9. advance physics (``substeps`` RK4 steps at physics_dt)

Logging happens at the top of the tick at the configured decimation, so a
frame holds the state, measurements, and commands of the same instant.
"""

import os
from dataclasses import dataclass

import numpy as np

from .. import avionics
from ..autopilot import (Autopilot, FailsafeManager, FailsafeMode,
                         ImuHealthMonitor, PhaseMachine, WaypointTracker,
                         failsafe_command)
from ..errors import SimulationDiverged
from ..faultlab import FaultInjector
from ..flightdyn import applied_forces, step_closed_loop, trim
from .scenario import Scenario
from .telemetry import TelemetryWriter, dump_summary

TERMINATION_TIME = "time_limit"
TERMINATION_IMPACT = "ground_impact"
TERMINATION_DIVERGED = "diverged"


@dataclass
class RunResult:
    scenario_name: str
    seed: int
    termination: str
    t_final: float
    summary: dict
    telemetry_csv: str

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "telemetry.csv"), "w") as fh:
            fh.write(self.telemetry_csv)
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            fh.write(dump_summary(self.summary))
        return out_dir


def run_simulation(scenario: Scenario, bypass_fault_layer: bool = False) -> RunResult:
    """Run one scenario to termination and return telemetry + summary.

    Divergence (e.g. a violent stuck-surface departure) is recorded as a
    run outcome, not raised: the data up to the last finite state is kept.
    """
    cfg = scenario.aircraft
    dt = scenario.control_dt()
    substeps = scenario.substeps()
    plan = scenario.mission

    state, trim_cmd = trim(cfg, scenario.trim_altitude, scenario.trim_airspeed,
                           heading=scenario.trim_heading)
    ap = Autopilot(gains=scenario.gains, trim_command=trim_cmd,
                   trim_pitch=state.pitch, surface_limit=cfg.surface_limit)
    servos = avionics.ServoBank(cfg.surface_limit, config=scenario.servo,
                                initial=trim_cmd)
    phase_machine = PhaseMachine(plan)
    tracker = WaypointTracker(plan)
    failsafe = FailsafeManager(scenario.failsafe)
    imu_monitor = ImuHealthMonitor(rate_hz=scenario.control_hz)

    seq = np.random.SeedSequence(scenario.seed).spawn(3)
    rng_imu = np.random.default_rng(seq[0])
    rng_gps = np.random.default_rng(seq[1])
    injector = None
    if not bypass_fault_layer:
        injector = FaultInjector(scenario.schedule,
                                 rng=np.random.default_rng(seq[2]))
        scenario.schedule.bind_phase_entry(phase_machine.phase.value, 0.0)

    writer = TelemetryWriter()
    log_every = max(1, int(round(scenario.control_hz / scenario.log_hz)))
    gps_period = 1.0 / scenario.gps_hz

    nav = avionics.nav_from_truth(state)
    gps_nav = nav.copy()   # last GPS-epoch solution, for epoch differencing
    gps_meas = None
    next_gps = 0.0
    termination = TERMINATION_TIME
    n_ticks = int(round(scenario.duration * scenario.control_hz))
    t = 0.0

    for k in range(n_ticks):
        t = k * dt

        # 1-2. sense + sensor-fault injection
        force, _ = applied_forces(state, servos.state, servos.state.throttle,
                                  cfg, scenario.wind_ned)
        imu_meas = avionics.imu_measure(state, scenario.imu_noise, rng_imu,
                                        specific_force_body=force / cfg.mass)
        if injector is not None:
            imu_meas = injector.apply_imu(imu_meas, t)
        fresh_gps = False
        if t + 1e-12 >= next_gps:
            gps_raw = avionics.gps_measure(state, scenario.origin,
                                           scenario.gps_noise, rng_gps)
            gps_meas = injector.apply_gps(gps_raw, t) if injector is not None \
                else gps_raw
            next_gps += gps_period
            fresh_gps = True

        # 3. health monitoring + failsafe state machine
        imu_ok = imu_monitor.update(imu_meas, t)
        fs = failsafe.step(gps_meas, imu_ok, t)

        # 4. navigation solution
        if fs.mode is FailsafeMode.NOMINAL:
            if fresh_gps:
                gps_nav = avionics.nav_from_gps_imu(gps_meas, imu_meas,
                                                    scenario.origin, prev=gps_nav)
            nav = gps_nav.copy()
            nav.attitude = tuple(imu_meas.attitude)
            nav.rates = imu_meas.rates.copy()
        else:
            nav = avionics.dead_reckon(nav, imu_meas, dt, gravity=cfg.gravity)

        # 5. flight phase (binds phase-anchored faults on entry)
        prev_phase = phase_machine.phase
        phase = phase_machine.step(t, -float(nav.position[2]))
        if phase is not prev_phase and injector is not None:
            scenario.schedule.bind_phase_entry(phase.value, t)

        # 6. control laws
        if fs.mode in (FailsafeMode.NOMINAL, FailsafeMode.IMU_POSITIONING):
            alt_cmd = phase_machine.altitude_command(t)
            course_cmd = tracker.course_command(float(nav.position[0]),
                                                float(nav.position[1]))
            cmd = ap.update(nav, alt_cmd, plan.cruise_speed, course_cmd, dt)
            failsafe.note_nominal(cmd, ap.last_pitch_cmd, nav.attitude[2])
            pitch_cmd, roll_cmd = ap.last_pitch_cmd, ap.last_roll_cmd
        elif fs.mode is FailsafeMode.LEVEL_FLIGHT_FALLBACK:
            cmd = failsafe_command(fs, failsafe, ap, nav, dt)
            pitch_cmd, roll_cmd = ap.last_pitch_cmd, ap.last_roll_cmd
        else:  # HOLD_LAST_RUDDER
            cmd = failsafe_command(fs, failsafe, ap, nav, dt)
            pitch_cmd, roll_cmd = failsafe.hold_pitch_cmd, ap.last_roll_cmd

        # 7. actuator-fault injection
        faulted_cmd = injector.apply_actuator(cmd, servos.state, t, dt) \
            if injector is not None else cmd

        # log the tick before the world moves
        if k % log_every == 0:
            labels = injector.active_labels(t) if injector is not None else []
            _log_frame(writer, t, state, imu_meas, gps_meas, nav, phase, fs,
                       pitch_cmd, roll_cmd, cmd, faulted_cmd, servos.state,
                       labels)

        # 8-9. servo + physics
        actual = servos.update(faulted_cmd, dt)
        try:
            state = step_closed_loop(state, actual, actual.throttle, cfg,
                                     scenario.physics_dt, substeps,
                                     wind_ned=scenario.wind_ned)
        except SimulationDiverged as exc:
            state = exc.last_state
            termination = TERMINATION_DIVERGED
            t = state.time
            break
        if state.position[2] >= 0.0 and state.velocity_ned[2] > 0.0:
            t = state.time
            termination = TERMINATION_IMPACT
            break
    else:
        t = n_ticks * dt

    summary = _build_summary(scenario, state, t, termination, phase_machine,
                             failsafe, writer.n_frames)
    return RunResult(scenario_name=scenario.name, seed=scenario.seed,
                     termination=termination, t_final=t, summary=summary,
                     telemetry_csv=writer.text())


def _log_frame(writer, t, state, imu, gps, nav, phase, fs, pitch_cmd, roll_cmd,
               cmd, faulted_cmd, servo_state, labels):
    roll, pitch, yaw = state.euler
    values = {
        "t": t,
        "px": state.position[0], "py": state.position[1], "pz": state.position[2],
        "u": state.velocity_body[0], "v": state.velocity_body[1],
        "w": state.velocity_body[2],
        "roll": roll, "pitch": pitch, "yaw": yaw,
        "p": state.rates[0], "q": state.rates[1], "r": state.rates[2],
        "meas_roll": imu.attitude[0], "meas_pitch": imu.attitude[1],
        "meas_yaw": imu.attitude[2],
        "meas_p": imu.rates[0], "meas_q": imu.rates[1], "meas_r": imu.rates[2],
        "meas_ax": imu.accel[0], "meas_ay": imu.accel[1], "meas_az": imu.accel[2],
        "meas_imu_health": 1 if imu.health else 0,
        "meas_lat": gps.latitude if gps else 0.0,
        "meas_lon": gps.longitude if gps else 0.0,
        "meas_alt": gps.altitude if gps else 0.0,
        "meas_gspeed": gps.ground_speed if gps else 0.0,
        "meas_sats": gps.satellites if gps else 0,
        "meas_fix": (1 if gps.fix_valid else 0) if gps else 0,
        "nav_source": nav.source.value,
        "phase": phase.value,
        "failsafe": fs.mode.value,
        "cmd_pitch": pitch_cmd, "cmd_roll": roll_cmd,
        "cmd_elevator": cmd.elevator, "cmd_aileron": cmd.aileron,
        "cmd_rudder": cmd.rudder,
        "act_elevator": servo_state.elevator, "act_aileron": servo_state.aileron,
        "act_rudder": servo_state.rudder,
        "throttle_cmd": faulted_cmd.throttle, "throttle_act": servo_state.throttle,
        "fault_labels": "|".join(labels),
    }
    writer.add(values)


def _build_summary(scenario, state, t, termination, phase_machine, failsafe,
                   n_frames):
    v_ned = state.velocity_ned
    summary = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "termination": termination,
        "t_final": round(t, 6),
        "n_frames": n_frames,
        "final_state": {
            "north_m": state.position[0], "east_m": state.position[1],
            "altitude_m": state.altitude,
            "airspeed_mps": state.airspeed,
            "ground_speed_mps": float(np.hypot(v_ned[0], v_ned[1])),
            "sink_rate_mps": float(v_ned[2]),
            "roll_deg": np.degrees(state.roll),
            "pitch_deg": np.degrees(state.pitch),
            "yaw_deg": np.degrees(state.yaw),
        },
        "phase_entries": {ph.value: round(tv, 6) for ph, tv in
                          phase_machine.entry_time.items()},
        "failsafe_transitions": [[round(tv, 6), mode] for tv, mode in
                                 failsafe.transitions],
        "faults": [{"target": s.target, "mode": s.mode,
                    "start_s": s.resolved_start,
                    "duration_s": (None if np.isinf(s.duration_s)
                                   else s.duration_s)}
                   for s in scenario.schedule.specs],
    }
    return summary
