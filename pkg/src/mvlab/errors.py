"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range a table or operation supports."""


class ResourceError(RuntimeError):
    """A requested table exceeds the configured memory/size budget."""


class ConstructionError(RuntimeError):
    """A constructive procedure cannot start or proceed (hypothesis violated)."""


class ParseError(ValueError):
    """A function-spec string failed to parse.

    Attributes:
        pos: character offset of the failure in the input string.
    """

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class ValidationError(ValueError):
    """An input violates a documented precondition (e.g. negativity)."""
