from __future__ import annotations

from typing import Optional, Tuple


class FrontendError(Exception):
    """Base class for all diagnostics; carries an optional (line, column)."""

    def __init__(self, message: str, pos: Optional[Tuple[int, int]] = None):
        self.message = message
        self.pos = pos
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(f"{where}{message}")

    @property
    def kind(self) -> str:
        return type(self).__name__


class ParseError(FrontendError):
    pass


class DuplicateDeclaration(FrontendError):
    pass


class UnknownSymbol(FrontendError):
    pass


class PredicateCallOutsideVerificationStatement(FrontendError):
    pass


class ImpurePredicateBody(FrontendError):
    pass


class LoopInPredicate(FrontendError):
    pass


class ArityMismatch(FrontendError):
    pass


class TypeMismatch(FrontendError):
    pass


class DuplicateLoopId(FrontendError):
    pass


class MissingMain(FrontendError):
    pass


class MisplacedReturn(FrontendError):
    pass


class MissingImplementation(FrontendError):
    pass


class IllFormedImplementation(FrontendError):
    pass
