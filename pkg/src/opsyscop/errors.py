"""Exception types shared across the package."""


class OperatorSystemError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(OperatorSystemError):
    """Operands have incompatible shapes."""


class NotHermitian(OperatorSystemError):
    """Matrix is too far from its own adjoint to be symmetrized."""


class NumericalFailure(OperatorSystemError):
    """A numerical routine failed to converge or verify its output."""


class NotInSystem(OperatorSystemError):
    """Element does not belong to the span of the operator system."""


class IncompatibleSystems(OperatorSystemError):
    """Two systems cannot be combined (dimension or bimodule mismatch)."""


class DomainNotFull(OperatorSystemError):
    """Operation requires a map defined on a full matrix algebra."""


class MissingRepresentation(OperatorSystemError):
    """No diagonal-unit representation available on the target side."""


class IllConditioned(OperatorSystemError):
    """Input maps disagree beyond tolerance where they must coincide."""


class InputFormatError(OperatorSystemError):
    """Malformed JSON input (bad schema, bad matrix encoding)."""
