"""Scenario loading, closed-loop orchestration, telemetry, batch campaigns."""

from .scenario import Scenario, load_scenario, scenario_from_dict
from .simloop import (RunResult, TERMINATION_DIVERGED, TERMINATION_IMPACT,
                      TERMINATION_TIME, run_simulation)
from .telemetry import (COLUMNS, TelemetryFrame, TelemetryWriter,
                        dump_summary, read_telemetry)
from .runner import (CampaignEntry, CampaignMatrix, build_runs, default_matrix,
                     load_matrix, run_campaign, true_location)

__all__ = [
    "COLUMNS", "CampaignEntry", "CampaignMatrix", "RunResult", "Scenario",
    "TERMINATION_DIVERGED", "TERMINATION_IMPACT", "TERMINATION_TIME",
    "TelemetryFrame", "TelemetryWriter", "build_runs", "default_matrix",
    "dump_summary", "load_matrix", "load_scenario", "read_telemetry",
    "run_campaign", "run_simulation", "scenario_from_dict", "true_location",
]
