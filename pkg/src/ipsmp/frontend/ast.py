"""AST of the mini procedural language.

All nodes are frozen dataclasses.  Source positions are carried in ``pos``
but excluded from equality, so two parses of equivalent text compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Dict, Optional, Tuple, Union

Pos = Optional[Tuple[int, int]]

INT = "int"
BOOL = "bool"


def _pos() -> Any:
    return field(default=None, compare=False, repr=False)


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class IntLit:
    value: int
    label: Optional[str] = None  # enum constant name, if written symbolically
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    arg: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Apply:
    """``name(args)`` in expression position; only legal as a predicate call under assume/assert."""

    name: str
    args: Tuple["Expr", ...]
    pos: Pos = _pos()


Expr = Union[Var, BoolLit, IntLit, Unary, Binary, Apply]

BOOL_OPS = {"&&", "||", "==>"}
CMP_OPS = {"<", "<=", ">", ">="}
EQ_OPS = {"==", "!="}
ARITH_OPS = {"+", "-", "*"}


# -- statements -------------------------------------------------------------


@dataclass(frozen=True)
class Seq:
    stmts: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Havoc:
    var: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Skip:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assume:
    cond: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    loop_id: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    els: "Stmt"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    lhs: Tuple[str, ...]
    proc: str
    args: Tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    values: Tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Synth:
    """``return synth();`` inside a predicate template: the hole."""

    pos: Pos = _pos()


Stmt = Union[Seq, Assign, Havoc, Skip, Assume, Assert, While, If, Call, Return, Synth]


# -- declarations -------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    type: str = INT
    pos: Pos = _pos()


@dataclass(frozen=True)
class Procedure:
    name: str
    params: Tuple[Param, ...]
    locals: Tuple[Param, ...]
    body: Stmt
    returns: Tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Predicate:
    """A predicate declaration.  ``body`` is None for a bare partial predicate."""

    name: str
    params: Tuple[Param, ...]
    body: Optional[Stmt] = None
    template: bool = False  # written with PRED_TEMPLATE
    pos: Pos = _pos()


@dataclass(frozen=True)
class Enum:
    name: str
    members: Tuple[str, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Program:
    procedures: Tuple[Procedure, ...]
    predicates: Tuple[Predicate, ...] = ()
    enums: Tuple[Enum, ...] = ()
    entry: str = "main"

    def procedure(self, name: str) -> Procedure:
        for p in self.procedures:
            if p.name == name:
                return p
        raise KeyError(name)

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def has_procedure(self, name: str) -> bool:
        return any(p.name == name for p in self.procedures)

    def has_predicate(self, name: str) -> bool:
        return any(p.name == name for p in self.predicates)

    def enum_sizes(self) -> Dict[str, int]:
        return {e.name: len(e.members) for e in self.enums}


# -- small constructors used throughout -------------------------------------------


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def seq(*stmts: Stmt) -> Stmt:
    flat = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        elif not isinstance(s, Skip):
            flat.append(s)
    if not flat:
        return Skip()
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def and_all(exprs) -> Expr:
    exprs = [e for e in exprs if e != TRUE]
    if not exprs:
        return TRUE
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("&&", out, e)
    return out


def or_all(exprs) -> Expr:
    exprs = [e for e in exprs if e != FALSE]
    if not exprs:
        return FALSE
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("||", out, e)
    return out


def neg(e: Expr) -> Expr:
    if isinstance(e, BoolLit):
        return BoolLit(not e.value)
    if isinstance(e, Unary) and e.op == "!":
        return e.arg
    return Unary("!", e)


def to_json(node: Any) -> Any:
    """Stable JSON-ready rendering; each node carries its type name under ``"type"``."""
    if is_dataclass(node):
        out: Dict[str, Any] = {"type": type(node).__name__}
        for f in fields(node):
            if f.name == "pos":
                continue
            out[f.name] = to_json(getattr(node, f.name))
        return out
    if isinstance(node, tuple):
        return [to_json(x) for x in node]
    return node


def expr_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return expr_vars(e.arg)
    if isinstance(e, Binary):
        return expr_vars(e.lhs) | expr_vars(e.rhs)
    if isinstance(e, Apply):
        out = set()
        for a in e.args:
            out |= expr_vars(a)
        return out
    return set()


def subst_expr(e: Expr, mapping: Dict[str, Expr]) -> Expr:
    """Simultaneous substitution of variables by expressions."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        return Unary(e.op, subst_expr(e.arg, mapping), e.pos)
    if isinstance(e, Binary):
        return Binary(e.op, subst_expr(e.lhs, mapping), subst_expr(e.rhs, mapping), e.pos)
    if isinstance(e, Apply):
        return Apply(e.name, tuple(subst_expr(a, mapping) for a in e.args), e.pos)
    return e
