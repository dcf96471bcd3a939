"""Exception hierarchy.

Three branches map onto the CLI exit codes: ConfigError -> 2,
DataError -> 3, NumericalError -> 4.
"""


class SubalignError(Exception):
    """Base class for all package errors."""


class ConfigError(SubalignError):
    """Invalid or incomplete pipeline configuration."""


class DataError(SubalignError):
    """Malformed or inconsistent input data."""


class NumericalError(SubalignError):
    """Numerical failure inside the solver or estimators."""


# corpus parsing


class MalformedLine(DataError):
    def __init__(self, line_no: int, line: str, reason: str = "expected `surface label`"):
        self.line_no = line_no
        self.line = line
        super().__init__(f"line {line_no}: {reason}: {line!r}")


class UnknownLabel(DataError):
    def __init__(self, line_no: int, label: str):
        self.line_no = line_no
        self.label = label
        super().__init__(f"line {line_no}: label {label!r} not in the declared label space")


class IllegalBioTransition(DataError):
    def __init__(self, line_no: int, label: str):
        self.line_no = line_no
        self.label = label
        super().__init__(
            f"line {line_no}: {label!r} is not preceded by B/I of the same type "
            "(pass repair=True to rewrite orphan I-X to B-X)"
        )


# lexicon


class DuplicateConflictingEntry(DataError):
    def __init__(self, surface: tuple, types: tuple):
        self.surface = surface
        self.types = types
        super().__init__(f"lexicon entry {' '.join(surface)!r} maps to conflicting types {types}")


class UnknownType(DataError):
    def __init__(self, surface: str, entity_type: str):
        super().__init__(f"lexicon entry {surface!r}: type {entity_type!r} not in the label space")


# estimation / transport


class EmptyCorpus(DataError):
    pass


class InstanceEmpty(DataError):
    pass


class MissingSegmentations(DataError):
    def __init__(self, word: str):
        self.word = word
        super().__init__(f"no enumerated segmentations supplied for word {word!r}")


class NonPositiveGamma(NumericalError):
    def __init__(self, gamma: float):
        super().__init__(f"entropic regularization must be > 0, got {gamma}")


class InfeasibleRow(NumericalError):
    def __init__(self, row):
        super().__init__(f"transport row {row!r} has no finite-cost cell")


class NumericalUnderflow(NumericalError):
    def __init__(self, detail: str):
        super().__init__(f"{detail}; use stabilization='log_domain' (or 'auto')")


class NotConverged(NumericalError):
    def __init__(self, iterations: int, violation: float):
        self.iterations = iterations
        self.violation = violation
        super().__init__(
            f"solver stopped after {iterations} iterations at marginal violation {violation:.3e}"
        )


class ShapeMismatch(NumericalError):
    pass


class SupportViolation(NumericalError):
    def __init__(self, where: str):
        super().__init__(f"q has zero mass where p is positive ({where}); smooth q first")
