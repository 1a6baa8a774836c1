"""Exception types shared across the package."""


class LinsectError(Exception):
    """Base class for all package-specific errors."""


class EigenFailure(LinsectError):
    """The eigensolver backend failed to converge."""


class DegenerateBasis(LinsectError):
    """A supplied basis is numerically rank-deficient."""


class DegenerateDraw(LinsectError):
    """Random draws stayed degenerate through every retry."""


class InvalidSpec(LinsectError):
    """A variety specification violates its parameter constraints."""


class DegreeMismatch(LinsectError):
    """Degrees or ambient dimensions of two objects do not agree."""


class NotUnique(LinsectError):
    """The intersection step could not certify a unique decomposition."""


class RankMismatch(LinsectError):
    """The number of certified variety points differs from the input rank."""


class NotSymmetric(LinsectError):
    """A tensor claimed symmetric fails the symmetry residual check."""


class NonProductW(LinsectError):
    """A co-factor is not a product tensor to within tolerance."""
