"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DeficiencyError(Exception):
    exit_code = 1


class InputError(DeficiencyError, ValueError):
    """Malformed input: non-finite entries, shape mismatch, bad file."""

    exit_code = 1


class ModelRejected(DeficiencyError):
    """The operator model fails the symmetry test on its domain."""

    exit_code = 2

    def __init__(self, message, residual=None, pair=None):
        super().__init__(message)
        self.residual = residual
        self.pair = pair


class NoSelfAdjointExtension(DeficiencyError):
    exit_code = 3


class DegenerateSum(DeficiencyError):
    exit_code = 3


class NumericalFailure(DeficiencyError):
    exit_code = 4


class ToleranceInconsistency(NumericalFailure):
    """A zero/nonzero decision disagrees with an independently computed count."""


class CertificateFailure(DeficiencyError):
    exit_code = 4

    def __init__(self, message, fiber=None, check=None):
        super().__init__(message)
        self.fiber = fiber
        self.check = check


class UnsupportedParameter(InputError):
    pass
