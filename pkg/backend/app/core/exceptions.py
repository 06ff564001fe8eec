"""
Error hierarchy for the fusion workbench.
The CLI maps these to exit codes (see app.cli.deps.exit_code_for).
"""


class FusionWorkbenchError(Exception):
    """Base class for every domain error raised by the workbench."""


class InvalidInput(FusionWorkbenchError, ValueError):
    """Input outside an operation's domain (non-finite, empty, mismatched)."""


class DivergentVariance(FusionWorkbenchError):
    """A fully decohered sensor (V = 0) carries no phase information."""


class NoSurvivors(FusionWorkbenchError):
    """Outlier exclusion removed every sensor."""


class NoInformation(FusionWorkbenchError):
    """Every sensor has zero reliability weight."""


class FaultBudgetExceeded(FusionWorkbenchError):
    """The fault count violates the tolerance of the chosen strategy."""

    def __init__(self, sensors: int, faults: int, strategy: str) -> None:
        self.sensors = sensors
        self.faults = faults
        self.strategy = strategy
        super().__init__(
            f"f={faults} exceeds the {strategy} fault budget for M={sensors}"
        )


class DataNotFound(FusionWorkbenchError):
    """Required input files are missing."""

    def __init__(self, missing: list[str]) -> None:
        self.missing = missing
        super().__init__("missing input files: " + ", ".join(missing))


class ChecksumMismatch(FusionWorkbenchError):
    """A downloaded file does not match its published SHA-256."""
