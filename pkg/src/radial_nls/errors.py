"""Exception hierarchy.  Validation errors map to CLI exit code 1, numerical
failures to exit code 2."""


class RadialNLSError(Exception):
    pass


class ValidationError(RadialNLSError, ValueError):
    """Arguments violate a documented precondition."""


class NumericalError(RadialNLSError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy answer."""


class MalformedProfileError(ValidationError):
    pass


class UnsupportedCouplingError(ValidationError):
    pass


class UnsupportedNonlinearityError(ValidationError):
    pass


class RegimeError(ValidationError):
    """The requested construction does not exist for these parameters."""


class InconsistentParametersError(ValidationError):
    pass


class PositivityViolationError(ValidationError):
    pass


class StiffnessError(NumericalError):
    def __init__(self, radius):
        super().__init__(f"step size underflow at r = {radius:.17g}")
        self.radius = radius


class NoGroundStateError(NumericalError):
    pass


class DichotomyViolationError(NumericalError):
    pass


class MultipleRootsError(NumericalError):
    pass


class InsufficientTailError(NumericalError):
    pass
