"""Exception hierarchy shared by every module of the package."""


class ThinFilmError(Exception):
    """Base class for all package errors."""


class ExponentViolation(ThinFilmError, ValueError):
    """A parameter breaks one of the admissibility constraints."""

    def __init__(self, field, invariant, value=None):
        self.field = field
        self.invariant = invariant
        self.value = value
        msg = f"{field}: {invariant}"
        if value is not None:
            msg += f" (got {value!r})"
        super().__init__(msg)


class DegenerateDenominator(ThinFilmError, ValueError):
    """An antiderivative denominator (p + 1)(p + 2) vanishes."""


class DomainError(ThinFilmError, ValueError):
    """A pointwise function was evaluated at a non-positive height."""


class NonIntegrableAtZero(ThinFilmError, ValueError):
    """The integrand z**p with p <= -1 has no antiderivative based at 0."""


class NegativeInitialData(ThinFilmError, ValueError):
    pass


class NonPositiveHeight(ThinFilmError, ValueError):
    pass


class NewtonDiverged(ThinFilmError, RuntimeError):
    pass


class PositivityLost(ThinFilmError, RuntimeError):
    pass


class StepFloor(ThinFilmError, RuntimeError):
    """Adaptive time step fell below ``dt_min``."""


class QuadratureFailure(ThinFilmError, RuntimeError):
    pass


class OutOfTheorem(ThinFilmError, ValueError):
    """Parameter combination for which no energy bound is available."""


class ThetaOutOfRange(ThinFilmError, ValueError):
    pass


class InsufficientDecay(ThinFilmError, ValueError):
    """Trajectory too short (or too flat) to fit a decay exponent."""
