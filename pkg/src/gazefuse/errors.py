"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 2 and ``NumericalError``
subclasses to exit code 3.
"""


class GazefuseError(Exception):
    pass


class InputError(GazefuseError, ValueError):
    pass


class DimensionError(InputError):
    pass


class InvalidLengthError(InputError):
    pass


class InvalidWindowError(InputError):
    pass


class WeightFloorError(InputError):
    pass


class MissingCRError(InputError):
    pass


class ConfigError(InputError):
    pass


class NumericalError(GazefuseError, ArithmeticError):
    pass


class SingularSystemError(NumericalError):
    """The precision matrix is not positive definite.

    ``index`` is the first sample whose pivot vanished.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"precision matrix is singular at sample {index}")


class DegenerateCalibrationError(NumericalError):
    pass


class DegenerateDistributionError(NumericalError):
    pass
