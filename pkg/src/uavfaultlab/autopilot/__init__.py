"""Cascaded control laws, mission phases, and the failsafe manager."""

from .controller import (FALLBACK_PITCH, Autopilot, AutopilotGains,
                         ControlCommand, wrap_angle)
from .mission import FlightPhase, MissionPlan, PhaseMachine, WaypointTracker
from .failsafe import (FailsafeConfig, FailsafeManager, FailsafeMode,
                       FailsafeState, ImuHealthMonitor, failsafe_command)
from .metrics import StepMetrics, step_metrics, step_response_experiment

__all__ = [
    "Autopilot", "AutopilotGains", "ControlCommand", "FALLBACK_PITCH",
    "FailsafeConfig", "FailsafeManager", "FailsafeMode", "FailsafeState",
    "FlightPhase", "ImuHealthMonitor", "MissionPlan", "PhaseMachine",
    "StepMetrics", "WaypointTracker", "failsafe_command", "step_metrics",
    "step_response_experiment", "wrap_angle",
]
