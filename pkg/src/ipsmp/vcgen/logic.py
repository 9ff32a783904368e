"""Formulas for verification conditions: program expressions plus binders.

Verification conditions reuse the expression nodes of the frontend AST and
add universal quantification and if-then-else terms.  Predicate
applications are plain ``Apply`` nodes.

Binders introduced by the condition generator always use fresh names that
cannot occur in source programs (they contain ``!``), so substitution never
needs to rename.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Set, Tuple

from ..frontend import ast as A

BOOL, INT = "Bool", "Int"


@dataclass(frozen=True)
class Forall:
    params: Tuple[Tuple[str, str], ...]  # (name, sort)
    body: "Formula"


@dataclass(frozen=True)
class Ite:
    cond: "Formula"
    then: "Formula"
    els: "Formula"


Formula = object  # A.Expr | Forall | Ite

TRUE, FALSE = A.TRUE, A.FALSE


def smt_sort(typ: str) -> str:
    """Source type to solver sort; enums and ints are both integers."""
    return BOOL if typ == A.BOOL else INT


def conj(*fs) -> Formula:
    out = [f for f in _flatten("&&", fs) if f != TRUE]
    if any(f == FALSE for f in out):
        return FALSE
    if not out:
        return TRUE
    acc = out[0]
    for f in out[1:]:
        acc = A.Binary("&&", acc, f)
    return acc


def disj(*fs) -> Formula:
    out = [f for f in _flatten("||", fs) if f != FALSE]
    if any(f == TRUE for f in out):
        return TRUE
    if not out:
        return FALSE
    acc = out[0]
    for f in out[1:]:
        acc = A.Binary("||", acc, f)
    return acc


def _flatten(op: str, fs) -> Iterator[Formula]:
    for f in fs:
        if isinstance(f, A.Binary) and f.op == op:
            yield from _flatten(op, (f.lhs, f.rhs))
        else:
            yield f


def implies(a: Formula, b: Formula) -> Formula:
    if a == TRUE or b == TRUE:
        return b
    if a == FALSE:
        return TRUE
    return A.Binary("==>", a, b)


def negate(f: Formula) -> Formula:
    return A.neg(f)


def eq(a: Formula, b: Formula) -> Formula:
    return A.Binary("==", a, b)


def forall(params: Iterable[Tuple[str, str]], body: Formula) -> Formula:
    params = tuple(params)
    if not params or body == TRUE:
        return body
    return Forall(params, body)


def conjuncts(f: Formula) -> Tuple[Formula, ...]:
    return tuple(_flatten("&&", (f,)))


def subst(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Simultaneous capture-free substitution (binders hold fresh names only)."""
    if not mapping:
        return f
    if isinstance(f, A.Var):
        return mapping.get(f.name, f)
    if isinstance(f, A.Unary):
        return A.Unary(f.op, subst(f.arg, mapping))
    if isinstance(f, A.Binary):
        return A.Binary(f.op, subst(f.lhs, mapping), subst(f.rhs, mapping))
    if isinstance(f, A.Apply):
        return A.Apply(f.name, tuple(subst(a, mapping) for a in f.args))
    if isinstance(f, Ite):
        return Ite(subst(f.cond, mapping), subst(f.then, mapping), subst(f.els, mapping))
    if isinstance(f, Forall):
        bound = {n for n, _ in f.params}
        inner = {k: v for k, v in mapping.items() if k not in bound}
        return Forall(f.params, subst(f.body, inner))
    return f


def free_vars(f: Formula) -> Set[str]:
    if isinstance(f, A.Var):
        return {f.name}
    if isinstance(f, A.Unary):
        return free_vars(f.arg)
    if isinstance(f, A.Binary):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, A.Apply):
        out: Set[str] = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Ite):
        return free_vars(f.cond) | free_vars(f.then) | free_vars(f.els)
    if isinstance(f, Forall):
        return free_vars(f.body) - {n for n, _ in f.params}
    return set()


def applications(f: Formula, names=None) -> Iterator[A.Apply]:
    """Predicate applications in ``f``; restricted to ``names`` when given."""
    if isinstance(f, A.Apply):
        if names is None or f.name in names:
            yield f
        for a in f.args:
            yield from applications(a, names)
    elif isinstance(f, A.Unary):
        yield from applications(f.arg, names)
    elif isinstance(f, A.Binary):
        yield from applications(f.lhs, names)
        yield from applications(f.rhs, names)
    elif isinstance(f, Ite):
        for g in (f.cond, f.then, f.els):
            yield from applications(g, names)
    elif isinstance(f, Forall):
        yield from applications(f.body, names)


def is_pure(f: Formula) -> bool:
    """No predicate applications and no binders."""
    if isinstance(f, (A.Apply, Forall)):
        return False
    if isinstance(f, A.Unary):
        return is_pure(f.arg)
    if isinstance(f, A.Binary):
        return is_pure(f.lhs) and is_pure(f.rhs)
    if isinstance(f, Ite):
        return is_pure(f.cond) and is_pure(f.then) and is_pure(f.els)
    return True


def text(f: Formula) -> str:
    """Human-readable rendering, used in diagnostics."""
    from ..frontend.printer import expr_text

    if isinstance(f, Forall):
        ps = ", ".join(f"{n}:{s}" for n, s in f.params)
        return f"forall {ps}. ({text(f.body)})"
    if isinstance(f, Ite):
        return f"ite({text(f.cond)}, {text(f.then)}, {text(f.els)})"
    if isinstance(f, A.Binary) and not (is_pure(f.lhs) and is_pure(f.rhs)):
        return f"({text(f.lhs)} {f.op} {text(f.rhs)})"
    if isinstance(f, A.Unary) and not is_pure(f.arg):
        return f"{f.op}({text(f.arg)})"
    return expr_text(f)


SortEnv = Dict[str, str]
