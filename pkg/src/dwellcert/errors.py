"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`DwellCertError`; the CLI maps the families below to exit codes.
"""


class DwellCertError(Exception):
    """Base class for all library errors."""


# -- input validation (CLI exit code 1) -------------------------------------

class ValidationError(DwellCertError, ValueError):
    pass


class EmptyFamily(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonpositiveDwellTime(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class NotSquare(ValidationError):
    pass


class StepTooLarge(ValidationError):
    pass


class StepNonpositive(ValidationError):
    pass


class ParseError(DwellCertError, ValueError):
    pass


# -- numerical failures (CLI exit code 3) -----------------------------------

class NumericalError(DwellCertError, ArithmeticError):
    pass


class ComplexLeading(NumericalError):
    """The dominant eigenvalue is complex or not simple."""


class BudgetExceeded(NumericalError):
    pass


class NoCycleFound(NumericalError):
    pass


class NotClosed(NumericalError, ValueError):
    pass


class MalformedCycle(NumericalError, ValueError):
    pass


class DegenerateBall(NumericalError):
    """The query point lies outside the span of the polytope vertices."""


class NegativeInput(NumericalError, ValueError):
    pass


class OrthantViolation(NumericalError):
    pass


class VertexBudgetExceeded(NumericalError):
    pass


class DomainError(NumericalError, ValueError):
    pass


class LPError(NumericalError):
    pass


class DimensionNotTwo(DwellCertError, ValueError):
    pass


# -- certificate audit (CLI exit code 2) ------------------------------------

class CertificateMismatch(DwellCertError, ValueError):
    pass


class VerificationFailed(DwellCertError):
    pass
