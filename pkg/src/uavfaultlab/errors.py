"""Exception types shared across the package."""


class UavFaultLabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(UavFaultLabError):
    """Invalid aircraft/scenario configuration or out-of-range model input."""


class CommandError(UavFaultLabError):
    """A control command outside its physical range."""


class TrimError(UavFaultLabError):
    """Trim solver failed to converge.

    Carries the best residual norm reached so the caller can tell
    "barely missed tolerance" from "hopeless flight condition".
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SimulationDiverged(UavFaultLabError):
    """Integration produced a non-finite state.

    ``last_state`` holds the last finite state before divergence.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ScenarioError(UavFaultLabError):
    """Scenario/matrix file failed validation."""


class FaultSpecError(UavFaultLabError):
    """Fault specification violates its mode's (k, d) pattern or schedule rules."""


class AnalysisError(UavFaultLabError):
    """Telemetry analysis cannot proceed (e.g., trace too short)."""


class ExperimentError(UavFaultLabError):
    """A closed-loop experiment (step response etc.) diverged or failed."""
