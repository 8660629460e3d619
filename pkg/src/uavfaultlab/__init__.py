"""uavfaultlab: software-in-the-loop fixed-wing UAV fault-injection lab.

Simulates a 6-DOF fixed-wing UAV under a cascaded autopilot, injects
parametric sensor/actuator faults, records labeled telemetry, and infers
fault location and damage effects from the externally observable behavior.
"""

from . import autopilot, avionics, campaign, damage, faultlab, flightdyn
from .errors import (AnalysisError, CommandError, ConfigurationError,
                     ExperimentError, FaultSpecError, ScenarioError,
                     SimulationDiverged, TrimError, UavFaultLabError)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError", "CommandError", "ConfigurationError", "ExperimentError",
    "FaultSpecError", "ScenarioError", "SimulationDiverged", "TrimError",
    "UavFaultLabError", "autopilot", "avionics", "campaign", "damage",
    "faultlab", "flightdyn",
]
