class TimelocException(Exception):
    pass


class ConfigurationError(TimelocException):
    pass


class InvalidParameterError(TimelocException):
    pass


class InvariantViolation(TimelocException):
    def __init__(self, invariant: str, detail: str) -> None:
        super().__init__(f"Invariant `{invariant}` violated: {detail}")
        self.invariant = invariant


class EigensolverError(TimelocException):
    pass


class UnknownExperiment(TimelocException):
    pass


class SweepFailed(TimelocException):
    def __init__(self, message: str, completed: list[dict[str, float]], failed: list[tuple[float, str]]) -> None:
        super().__init__(message)
        self.completed = completed
        self.failed = failed


class ManifestError(TimelocException):
    pass


# ======================================== Warnings ========================================


class TimelocWarning(UserWarning):
    pass


class UnderResolvedWarning(TimelocWarning):
    pass


class CorrelatedSitesWarning(TimelocWarning):
    pass


class StrongDisorderWarning(TimelocWarning):
    pass


class ShortSampleWarning(TimelocWarning):
    pass


class PairingAmbiguityWarning(TimelocWarning):
    pass
