"""Exception types shared across the package."""


class DgtsimError(Exception):
    """Base class for all package-specific errors."""


class GraphConditionError(DgtsimError):
    """A coupling graph violates a required connectivity condition."""


class NumericalFailureError(DgtsimError):
    """A numerical routine failed to reach its required residual."""


class DegenerateProblemError(DgtsimError):
    """The generated problem instance has no unique minimizer."""


class DivergenceError(DgtsimError):
    """An iterate became non-finite during a trial."""

    def __init__(self, message: str, round_index: int, trial: int | None = None):
        super().__init__(message)
        self.round_index = round_index
        self.trial = trial


class EstimatorDegeneracyError(DgtsimError):
    """An eigenvector-estimate diagonal entry fell below tolerance."""


class AggregationError(DgtsimError):
    """Trial traces with mismatched configurations cannot be aggregated."""


class ConfigError(DgtsimError):
    """An experiment configuration file is malformed or invalid."""
