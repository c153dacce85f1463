"""Exception types shared across the package."""


class InvalidValueError(ValueError):
    """An argument is outside its documented domain (non-finite, wrong sign, bad range)."""


class DegenerateGeometryError(ValueError):
    """Geometry has collapsed: zero-length edge, collinear points, zero-area region."""


class ShapeError(ValueError):
    """Corners do not form the required shape within tolerance."""


class AmbiguityError(ValueError):
    """The requested conversion needs information the source representation does not carry."""


class ContractViolationError(ValueError):
    """An argument violates a documented precondition of the operation."""


class ValidationError(ValueError):
    """Converted or generated annotations failed their geometric checks."""


class ParseError(ValueError):
    """Input text or markup could not be parsed. Carries location context."""

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
