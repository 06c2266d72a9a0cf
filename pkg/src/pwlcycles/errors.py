"""Exception types raised across the package."""


class PWLError(Exception):
    """Base class for all analysis errors."""


class NoCrossingDynamics(PWLError):
    """a12_L * a12_R <= 0: the system cannot have crossing limit cycles."""


class DomainViolation(PWLError):
    pass


class NoReturn(PWLError):
    """The orbit did not come back to the switching line within the horizon."""


class Singularity(PWLError):
    pass


class DerivationMismatch(PWLError):
    """An algebraic identity that must hold exactly did not (implementation bug)."""


class NotSymmetric(PWLError):
    pass


class DegenerateSystem(PWLError):
    """The contact system has a common component; no finite count is certified."""


class NotApplicable(PWLError):
    pass


class Inconclusive(PWLError):
    pass


class SpecFileError(PWLError):
    """Malformed system specification file."""
