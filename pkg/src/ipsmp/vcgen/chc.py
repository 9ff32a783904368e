"""Horn clause systems: clausal normalization and SMT-LIB emission."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..frontend import ast as A
from . import logic as L
from .logic import BOOL, INT, Forall, Ite


class NotHorn(ValueError):
    pass


class UnsupportedSort(ValueError):
    pass


@dataclass(frozen=True)
class ChcClause:
    """``forall vars. constraint && body[0] && ... ==> head`` (head None means false)."""

    vars: Tuple[Tuple[str, str], ...]
    constraint: object
    body: Tuple[A.Apply, ...]
    head: Optional[A.Apply]
    origin: str = field(default="", compare=False)

    def positive_occurrences(self) -> int:
        """Predicate occurrences of positive polarity when read as a disjunction."""
        return 0 if self.head is None else 1

    def is_horn(self) -> bool:
        return (
            self.positive_occurrences() <= 1
            and L.is_pure(self.constraint)
            and all(isinstance(b, A.Apply) and all(L.is_pure(a) for a in b.args) for b in self.body)
            and (self.head is None or all(L.is_pure(a) for a in self.head.args))
        )

    def text(self) -> str:
        lhs = [L.text(self.constraint)] + [L.text(b) for b in self.body]
        rhs = "false" if self.head is None else L.text(self.head)
        return " && ".join(lhs) + " ==> " + rhs


@dataclass
class ChcSystem:
    predicates: Dict[str, Tuple[str, ...]] = field(default_factory=dict)  # name -> argument sorts
    clauses: List[ChcClause] = field(default_factory=list)
    kinds: Dict[str, str] = field(default_factory=dict)  # name -> partial/closed/pre/sum/loop

    def declare(self, name: str, sorts: Sequence[str], kind: str) -> None:
        if name in self.predicates:
            if self.predicates[name] != tuple(sorts):
                raise ValueError(f"predicate {name} redeclared with a different signature")
            return
        self.predicates[name] = tuple(sorts)
        self.kinds[name] = kind

    def add_goal(self, goal, env: Dict[str, str], origin: str) -> None:
        self.clauses.extend(horn_clauses(goal, env, origin))

    def check_horn(self) -> List[str]:
        """Structural problems; empty when every clause is Horn and uses declared predicates correctly."""
        bad = []
        for k, c in enumerate(self.clauses):
            if not c.is_horn():
                bad.append(f"clause {k} is not Horn")
            for app in c.body + ((c.head,) if c.head is not None else ()):
                sig = self.predicates.get(app.name)
                if sig is None:
                    bad.append(f"clause {k} applies undeclared {app.name}")
                elif len(sig) != len(app.args):
                    bad.append(f"clause {k} applies {app.name} with wrong arity")
        return bad


# -- normalization --------------------------------------------------------------------


def horn_clauses(goal, env: Dict[str, str], origin: str = "") -> List[ChcClause]:
    """Split a goal formula into Horn clauses, left to right.

    Goals are built from pure constraints, predicate applications,
    conjunction, implication with a body-shaped antecedent, and universal
    quantification.  Anything else raises :class:`NotHorn`.
    """
    out: List[ChcClause] = []
    _split(goal, dict(env), [], [], out, origin)
    return out


def _split(goal, env, cons, body, out, origin) -> None:
    if goal == L.TRUE:
        return
    if isinstance(goal, A.Apply):
        out.append(_clause(env, cons, body, goal, origin))
        return
    if L.is_pure(goal):
        out.append(_clause(env, cons + [L.negate(goal)], body, None, origin))
        return
    if isinstance(goal, Forall):
        inner = dict(env)
        for n, s in goal.params:
            inner[n] = s
        _split(goal.body, inner, cons, body, out, origin)
        return
    if isinstance(goal, A.Binary) and goal.op == "&&":
        _split(goal.lhs, env, cons, body, out, origin)
        _split(goal.rhs, env, cons, body, out, origin)
        return
    if isinstance(goal, A.Binary) and goal.op == "==>":
        c2, b2 = list(cons), list(body)
        for part in L.conjuncts(goal.lhs):
            if isinstance(part, A.Apply):
                b2.append(part)
            elif L.is_pure(part):
                c2.append(part)
            else:
                raise NotHorn(f"antecedent is not a conjunction of atoms: {L.text(part)}")
        _split(goal.rhs, env, c2, b2, out, origin)
        return
    raise NotHorn(f"goal outside the Horn fragment: {L.text(goal)}")


def _clause(env, cons, body, head, origin) -> ChcClause:
    constraint = L.conj(*cons)
    used = L.free_vars(constraint)
    for app in list(body) + ([head] if head is not None else []):
        used |= L.free_vars(app)
    missing = used - set(env)
    if missing:
        raise ValueError(f"unsorted variables {sorted(missing)}")
    vars_ = tuple((n, s) for n, s in env.items() if n in used)
    return ChcClause(vars_, constraint, tuple(body), head, origin)


# -- SMT-LIB ---------------------------------------------------------------------------

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")


def symbol(name: str) -> str:
    return name if _SIMPLE.match(name) else "|" + name.replace("|", "") + "|"


def _sort(s: str) -> str:
    if s not in (BOOL, INT):
        raise UnsupportedSort(s)
    return s


_SMT_OPS = {"&&": "and", "||": "or", "==>": "=>", "==": "=", "<": "<", "<=": "<=",
            ">": ">", ">=": ">=", "+": "+", "-": "-", "*": "*"}


def term(f) -> str:
    if isinstance(f, A.Var):
        return symbol(f.name)
    if isinstance(f, A.BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, A.IntLit):
        return str(f.value) if f.value >= 0 else f"(- {-f.value})"
    if isinstance(f, A.Unary):
        return f"(not {term(f.arg)})" if f.op == "!" else f"(- {term(f.arg)})"
    if isinstance(f, A.Binary):
        if f.op in ("&&", "||"):
            parts = [term(x) for x in L._flatten(f.op, (f,))]
            return f"({_SMT_OPS[f.op]} {' '.join(parts)})"
        if f.op == "!=":
            return f"(not (= {term(f.lhs)} {term(f.rhs)}))"
        return f"({_SMT_OPS[f.op]} {term(f.lhs)} {term(f.rhs)})"
    if isinstance(f, A.Apply):
        if not f.args:
            return symbol(f.name)
        return f"({symbol(f.name)} {' '.join(term(a) for a in f.args)})"
    if isinstance(f, Ite):
        return f"(ite {term(f.cond)} {term(f.then)} {term(f.els)})"
    if isinstance(f, Forall):
        ps = " ".join(f"({symbol(n)} {_sort(s)})" for n, s in f.params)
        return f"(forall ({ps}) {term(f.body)})"
    raise TypeError(f"cannot print {f!r}")


def clause_term(c: ChcClause) -> str:
    parts = [] if c.constraint == L.TRUE else list(L.conjuncts(c.constraint))
    parts += list(c.body)
    if not parts:
        lhs = None
    elif len(parts) == 1:
        lhs = term(parts[0])
    else:
        lhs = "(and " + " ".join(term(p) for p in parts) + ")"
    rhs = "false" if c.head is None else term(c.head)
    inner = rhs if lhs is None else f"(=> {lhs} {rhs})"
    if c.vars:
        ps = " ".join(f"({symbol(n)} {_sort(s)})" for n, s in c.vars)
        inner = f"(forall ({ps}) {inner})"
    return inner


def emit_smtlib(system: ChcSystem) -> str:
    """Deterministic HORN script for ``system``."""
    lines = ["(set-logic HORN)"]
    for name, sorts in system.predicates.items():
        lines.append(f"(declare-fun {symbol(name)} ({' '.join(_sort(s) for s in sorts)}) Bool)")
    for c in system.clauses:
        lines.append(f"(assert {clause_term(c)})")
    lines.append("(check-sat)")
    if system.predicates:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"
