# errors.py


class SpectralError(Exception):
    """Root of every error raised by the toolkit."""


class PreconditionViolation(SpectralError, ValueError):
    """An operation was called outside the hypotheses it is stated under."""


class SingularBlock(SpectralError):
    """
    A matrix that has to be inverted fails the invertibility threshold.
    `label` names the factor that failed.
    """

    def __init__(self, label: str, min_pivot: float | None = None):
        self.label = label
        self.min_pivot = min_pivot
        detail = f" (smallest pivot {min_pivot:.3e})" if min_pivot is not None else ""
        super().__init__(f"{label} is singular{detail}")

    def __reduce__(self):
        return (type(self), (self.label, self.min_pivot))


class SingularMatrix(SingularBlock):
    pass


class SingularFactor(SingularBlock):
    pass


class SingularPrincipalSubmatrix(SingularBlock):
    pass


class SingularSiteBlock(SingularBlock):
    pass


class ConvergenceFailure(SpectralError):
    pass


class SearchBudgetExceeded(PreconditionViolation):
    pass


class NotPositiveDefinite(PreconditionViolation):
    pass


class InsufficientSpectralMass(PreconditionViolation):
    pass


class NoAdmissibleShift(SpectralError):
    pass


class ReductionInvariantError(SpectralError):
    """A bound that an admissible shift guarantees failed numerically."""


class NormTooLarge(PreconditionViolation):
    pass


class HoppingNormTooLarge(NormTooLarge):
    pass


class PerturbationTooLarge(PreconditionViolation):
    pass


class InsufficientPositivePoints(SpectralError):
    pass


class ConfigError(SpectralError):
    """Invalid configuration document; the CLI maps it to exit code 2."""


class TrialFailure(SpectralError):
    """A Monte Carlo trial raised; carries the trial index for replay."""

    def __init__(self, trial: int, cause: Exception):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial} failed: {cause}")

    def __reduce__(self):
        return (type(self), (self.trial, self.cause))
