"""Exception types shared across the package."""


class GuardError(RuntimeError):
    """An enumeration or memory guard would be exceeded.

    The CLI maps this to exit status 2.
    """


class PrecisionError(ValueError):
    """A digit or level was requested beyond a value's working precision."""


class IncompatibleRingsError(ValueError):
    """Operands live over different primes (or precisions, where required)."""
