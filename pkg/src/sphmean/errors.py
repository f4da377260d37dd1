"""Exception hierarchy shared by all modules."""


class SphMeanError(ValueError):
    """Base class for every error raised by the library."""


class CapabilityError(SphMeanError):
    """A jet of higher order than the function can provide was requested."""


class DomainError(SphMeanError):
    """An operator was evaluated outside the domain where it is defined."""


class ConstraintError(SphMeanError):
    """Constructor arguments violate a type invariant."""


class PreconditionError(SphMeanError):
    """An operation's precondition does not hold for the given inputs."""


class NotInDPowerImage(SphMeanError):
    """The profile is not ``D**order`` of a compactly supported function.

    Raised when one of the moments ``int s**(2j+1) p(s) ds`` required to vanish
    does not.
    """

    def __init__(self, j, moment, threshold):
        self.j = j
        self.moment = moment
        self.threshold = threshold
        super().__init__(
            f"moment j={j} is {moment:.3e}, exceeds {threshold:.3e}; "
            "profile is not in the image of the requested power of D"
        )


class NotInKernel(SphMeanError):
    """A radial profile fails the moment obstruction for membership in Ker(P)."""


class DecompositionError(SphMeanError):
    """The constructive kernel decomposition did not reproduce its input."""


class CalibrationError(SphMeanError):
    """The inversion constant could not be fitted to the required accuracy."""


class DegenerateInputError(SphMeanError):
    """The input is identically zero where a nontrivial one is required."""
