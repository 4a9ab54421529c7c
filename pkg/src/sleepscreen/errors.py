"""Exception types raised across the toolkit.

Every error that callers are expected to catch has its own class; generic
programming mistakes (bad argument combinations) raise ValueError.
"""


class SleepScreenError(Exception):
    """Base class for all toolkit errors."""


# -- dataset ---------------------------------------------------------------

class MissingColumn(SleepScreenError):
    def __init__(self, name: str):
        super().__init__(f"required column missing from header: {name!r}")
        self.name = name


class MalformedRow(SleepScreenError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyFile(SleepScreenError):
    pass


class MalformedBloodPressure(SleepScreenError):
    pass


class UnknownCategory(SleepScreenError):
    def __init__(self, column: str, value: str):
        super().__init__(f"column {column!r} has no encoding for value {value!r}")
        self.column = column
        self.value = value


class DivisionDomain(SleepScreenError):
    pass


class LogDomain(SleepScreenError):
    pass


class ClassTooSmall(SleepScreenError):
    pass


# -- feature selection -----------------------------------------------------

class DegenerateLabels(SleepScreenError):
    pass


class KTooLarge(SleepScreenError):
    pass


# -- reduction -------------------------------------------------------------

class SingularScatter(SleepScreenError):
    pass


class DimensionMismatch(SleepScreenError):
    pass


# -- neural engine ---------------------------------------------------------

class DimensionChainBroken(SleepScreenError):
    pass


class NonFiniteInput(SleepScreenError):
    pass


class NonFiniteLoss(SleepScreenError):
    pass


# -- models ----------------------------------------------------------------

class SingleClassTraining(SleepScreenError):
    pass


class InvalidHyperparameter(SleepScreenError):
    pass


class UnsupportedFamily(SleepScreenError):
    pass


# -- evaluation ------------------------------------------------------------

class LengthMismatch(SleepScreenError):
    pass


class LabelOutOfRange(SleepScreenError):
    pass


class EmptyMatrix(SleepScreenError):
    pass


class ClassSmallerThanK(SleepScreenError):
    pass


class AllZeroDifferences(SleepScreenError):
    pass


class FoldPlanMismatch(SleepScreenError):
    pass


# -- pipeline --------------------------------------------------------------

class ExperimentError(SleepScreenError):
    """Raised when an experiment fails part-way; carries the partial report."""

    def __init__(self, message: str, partial_report=None):
        super().__init__(message)
        self.partial_report = partial_report
