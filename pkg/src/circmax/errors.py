"""Exception types raised by estimators and the bootstrap engine."""


class EstimationError(ValueError):
    """Base class for estimator failures on a particular sample."""


class AllTied(EstimationError):
    """Every (truncated) observation in the sample has the same value."""


class Degenerate(EstimationError):
    """The sample has too few distinct values for the requested fit."""


class NoConvergence(EstimationError):
    """The optimizer or root finder gave up before meeting its tolerance."""


class BootstrapFailure(RuntimeError):
    """Too many bootstrap replicates failed to produce an estimate."""

    def __init__(self, failures: int, B: int, last_error: Exception | None = None):
        self.failures = failures
        self.B = B
        self.last_error = last_error
        msg = f"{failures} of {B} bootstrap replicates failed (limit is 5%)"
        if last_error is not None:
            msg += f"; last error: {type(last_error).__name__}: {last_error}"
        super().__init__(msg)
