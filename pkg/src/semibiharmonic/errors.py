"""Exception hierarchy.

All errors derive from :class:`ValueError` so that callers validating user
input can catch one type.
"""


class SemibiharmonicError(ValueError):
    """Base class for validation errors raised by this package."""


class DimensionError(SemibiharmonicError):
    pass


class DomainError(SemibiharmonicError):
    """Input lies outside the domain of an operation (e.g. a non-unit sphere point)."""


class GridTooSmallError(SemibiharmonicError):
    pass


class DegenerateCurveError(SemibiharmonicError):
    pass


class FamilyInapplicableError(SemibiharmonicError):
    """Parameters fall outside the regime in which a closed-form family exists."""


class ConstraintError(SemibiharmonicError):
    """A closed-form constraint on the family constants is violated."""


class AnsatzInapplicableError(FamilyInapplicableError):
    """The trigonometric ansatz has no real frequency for these parameters."""

    def __init__(self, message, d2_sq=None):
        super().__init__(message)
        self.d2_sq = d2_sq


class RangeError(SemibiharmonicError):
    pass


class TangencyWarning(UserWarning):
    """Emitted when an input field had to be re-projected onto the tangent space."""
