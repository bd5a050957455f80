"""Exception hierarchy shared by all subpackages."""


class BlaschkeLabError(Exception):
    """Base class for every error raised by the library."""


class ParseError(BlaschkeLabError):
    """Malformed function-spec text.

    ``column`` is 1-based and points at the offending character (or one past
    the end of the input for premature end-of-input).
    """

    def __init__(self, message, column, text=""):
        self.column = column
        self.text = text
        super().__init__(f"{message} at column {column}")


class EvaluationError(BlaschkeLabError):
    """Evaluation at a pole, outside the declared domain, or non-finite."""


class DomainError(BlaschkeLabError):
    """Invalid or unsupported domain configuration."""


class PreconditionError(BlaschkeLabError):
    """An operation was called outside its admissible input range."""


class ZeroOnContourError(BlaschkeLabError):
    def __init__(self, message, box=None):
        self.box = box
        super().__init__(message)


class ContourConvergenceError(BlaschkeLabError):
    """Argument continuation did not settle before the node-doubling cap."""


class SubdivisionBudgetError(BlaschkeLabError):
    pass


class ValidationError(BlaschkeLabError):
    """A test function failed class-membership validation."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
