class Laplace2dsError(Exception):
    """Base class for errors raised on invalid input to laplace2ds."""

    pass


class InvalidStepError(Laplace2dsError, ValueError):
    """Raised when the step parameter h is not strictly positive."""

    pass


class NotATreeError(Laplace2dsError):
    """Raised when an operation that needs a tree receives another graph."""

    pass


class DisconnectedGraphError(Laplace2dsError):
    """Raised when an operation that needs a connected graph receives one that isn't."""

    pass
