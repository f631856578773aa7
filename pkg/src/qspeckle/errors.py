"""Exception hierarchy shared by all qspeckle modules."""


class QSpeckleError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(QSpeckleError, ValueError):
    """A parameter lies outside its admissible range.

    ``field`` names the offending parameter so that front ends can report it.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"invalid {field}: {message}")


class InvalidDimensionError(InvalidParameterError):
    pass


class OutOfValidityError(InvalidParameterError):
    """Requested point lies in the localized regime (g <= 1)."""


class UndefinedCorrelationError(QSpeckleError, ValueError):
    pass


class InvalidRealizationError(QSpeckleError, ValueError):
    """A scattering matrix failed the unitarity gate."""

    def __init__(self, defect, threshold):
        self.defect = defect
        self.threshold = threshold
        super().__init__(
            f"unitarity defect {defect:.3e} exceeds threshold {threshold:.1e}"
        )


class CalibrationError(QSpeckleError, RuntimeError):
    """Slice calibration could not reach its target mean transmission."""

    def __init__(self, message, achieved):
        self.achieved = achieved
        super().__init__(f"{message} (achieved mean transmission {achieved:.6g})")


class EnsembleQualityError(QSpeckleError, RuntimeError):
    pass


class OracleResourceError(QSpeckleError, MemoryError):
    pass


class TruncationError(QSpeckleError, ArithmeticError):
    pass


class EmptyResultError(QSpeckleError, ValueError):
    pass
