class InvalidParameterError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class CapExceededError(InvalidParameterError):
    """Raised when an exact (exponential-time) computation is asked for too large an n."""


class InsufficientDataError(ValueError):
    pass
