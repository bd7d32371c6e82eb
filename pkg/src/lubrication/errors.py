"""Exception hierarchy.

Validation problems (bad geometry, bad arguments, out-of-domain queries)
derive from :class:`ValidationError`; numerical failures during a solve
derive from :class:`SolverError`.  The CLI maps the two families to exit
codes 2 and 1.
"""


class ValidationError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


class InvalidGeometry(ValidationError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class OutOfDomain(ValidationError):
    pass


class AtKnot(ValidationError):
    pass


class TooFewComponents(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class NonFlatInlet(ValidationError):
    pass


class SpacingMismatch(ValidationError):
    pass


class SingularMatrix(SolverError):
    pass


class DivergedResidual(SolverError):
    pass


class MaxIterationsExceeded(SolverError):
    """Raised when an iterative solve stops before meeting its tolerance.

    ``field`` holds the last iterate together with its residual history.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
