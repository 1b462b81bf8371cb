"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class AmrError(ValueError):
    """Base class for every error raised by amrseq."""


class ParseError(AmrError):
    """Malformed Penman or tree text.

    ``pos`` is a character offset into the parsed text when known;
    ``line`` is set by corpus readers to the 1-based line of the block.
    """

    def __init__(self, message: str, pos: int | None = None, line: int | None = None):
        self.message = message
        self.pos = pos
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.pos is not None:
            where.append(f"offset {self.pos}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"{type(self).__name__}: {self.message}{suffix}"

    def at_line(self, line: int) -> "ParseError":
        self.line = line
        self.args = (self._render(),)
        return self


class UnbalancedParens(ParseError):
    pass


class UnterminatedString(ParseError):
    pass


class EmptyConcept(ParseError):
    pass


class DuplicateVariableDefinition(ParseError):
    pass


class DanglingRelation(ParseError):
    pass


class UndefinedVariableReference(ParseError):
    pass


class TrailingInput(ParseError):
    pass


class TokenMismatch(AmrError):
    pass


class BadPath(AmrError):
    pass


class BadSpan(AmrError):
    pass


class Unrepairable(AmrError):
    pass


class TooLarge(AmrError):
    pass


class LengthMismatch(AmrError):
    pass


class IdMismatch(AmrError):
    pass
