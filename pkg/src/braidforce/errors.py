"""Exception types shared by all modules; the CLI maps them to exit codes."""


class BraidError(Exception):
    pass


class InputError(BraidError, ValueError):
    """Malformed input: bad file, bad word, out-of-range parameter."""


class DomainError(BraidError):
    """A well-formed request the theory refuses (improper, cylindrical, unbounded, ...)."""

    def __init__(self, message: str, reason: str = 'domain', witness: object = None):
        super().__init__(message)
        self.reason = reason
        self.witness = witness


class WindowTooSmall(DomainError):
    def __init__(self, message: str, witness: object = None):
        super().__init__(message, 'window-too-small', witness)
