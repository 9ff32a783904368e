"""Parsing, checking and rewriting programs of the mini procedural language."""
from . import ast
from .ast import Program, to_json
from .errors import FrontendError
from .parser import parse, parse_expr
from .printer import expr_text, program_text
from .transform import substitute
from .validate import CLOSED, PARTIAL, TEMPLATE, CheckedProgram, PredicateInfo, validate


def load(text: str, require_main: bool = True) -> CheckedProgram:
    """Parse and validate in one step."""
    return validate(parse(text), require_main)


def load_file(path, require_main: bool = True) -> CheckedProgram:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read(), require_main)


__all__ = [
    "ast", "Program", "to_json", "FrontendError", "parse", "parse_expr", "expr_text",
    "program_text", "substitute", "validate", "CheckedProgram", "PredicateInfo",
    "CLOSED", "PARTIAL", "TEMPLATE", "load", "load_file",
]
