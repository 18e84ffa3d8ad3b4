"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """Invalid physical or numerical input (negative frequency, bad grid, ...)."""


class NumericalError(RuntimeError):
    """A numerical routine failed or produced an unusable result."""


class DegeneracyError(NumericalError):
    """A computation hit a (near-)degenerate spectrum where it is ill-defined."""


class SaturationError(NumericalError):
    """Propagation overflowed on an unstable trajectory."""

    def __init__(self, message, growth_exponent=None):
        super().__init__(message)
        self.growth_exponent = growth_exponent


class MultiCrossingError(NumericalError):
    """A bisection segment crosses more than one region boundary."""


class NoCyclicStatesError(RuntimeError):
    """No cyclic (bounded) states exist at the requested parameter point."""
