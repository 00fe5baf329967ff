"""Exception hierarchy shared by all modules."""


class RelAsymError(Exception):
    """Base class for every error raised by this package."""


class NonFinite(RelAsymError):
    pass


class NotConverged(RelAsymError):
    pass


class RootCountMismatch(RelAsymError):
    def __init__(self, found, expected=None):
        self.found = found
        self.expected = expected
        msg = f"found {found} sign changes"
        if expected is not None:
            msg += f", expected {expected}"
        super().__init__(msg)


class SingularGram(RelAsymError):
    pass


class OverlappingSupports(RelAsymError):
    pass


class EvalOnSupport(RelAsymError):
    pass


class NonPositiveWeight(RelAsymError):
    pass


class NonPositiveSample(RelAsymError):
    pass


class GridMismatch(RelAsymError):
    pass


class InvalidClass(RelAsymError):
    pass


class NotInSnPlus(RelAsymError):
    pass


class MaxIterations(RelAsymError):
    def __init__(self, iterations, last_ratio):
        self.iterations = iterations
        self.last_ratio = last_ratio
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last contraction ratio {last_ratio:.3g})"
        )


class InvalidWeight(RelAsymError):
    pass


class ParseError(RelAsymError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(RelAsymError):
    pass


class IoError(RelAsymError):
    pass


class CorruptEntry(RelAsymError):
    pass
