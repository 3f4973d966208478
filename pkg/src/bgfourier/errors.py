"""Exception hierarchy. Callers can distinguish bad arguments/data (exit 2
at the CLI) from numerical failures discovered mid-computation (exit 3)."""


class BgfError(Exception):
    """Base class for all package errors."""


class DataValidationError(BgfError, ValueError):
    """Inputs violate a documented precondition (shapes, grids, ranges)."""


class NonUniformGridError(DataValidationError):
    """Time stamps are not an evenly spaced grid within tolerance."""


class DegenerateInputError(DataValidationError):
    """Input is structurally valid but degenerate (e.g. all-zero power)."""


class NumericalError(BgfError, RuntimeError):
    """A computation failed for numerical reasons despite valid inputs."""


class FitDivergenceError(NumericalError):
    """The ascent objective became non-finite. Records the iteration."""

    def __init__(self, iteration: int, detail: str = ""):
        self.iteration = iteration
        msg = f"objective became non-finite at iteration {iteration}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DensityDegeneracyError(NumericalError):
    """The modeled spectral density collapsed below the representable floor."""


class ConditioningError(NumericalError):
    """Gram factorization failed even at the maximum permitted jitter."""

    def __init__(self, jitter: float, detail: str = ""):
        self.jitter = jitter
        msg = f"factorization failed at final jitter {jitter:.3e}"
        if detail:
            msg += f"; {detail}"
        super().__init__(msg)
