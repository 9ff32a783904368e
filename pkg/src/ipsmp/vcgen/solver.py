"""Bridge to external HORN solvers: process driver, model parser, and the solve loop."""
from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..frontend import ast as A
from ..frontend.transform import substitute
from ..frontend.validate import CheckedProgram, validate
from . import logic as L
from .chc import ChcSystem, emit_smtlib
from .wlp import chc_synth, to_chc

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"
REALIZABLE, UNREALIZABLE, UNKNOWN_STATUS = "Realizable", "Unrealizable", "Unknown"


class SolverNotFound(RuntimeError):
    pass


class ModelParseError(ValueError):
    pass


class Timeout(RuntimeError):
    pass


Z3_DEFAULT_ARGS = ("fp.xform.inline_linear=false", "fp.xform.inline_eager=false", "fp.spacer.global=true")


@dataclass(frozen=True)
class SolverConfig:
    path: Optional[str] = None  # defaults to ``z3`` on PATH
    args: Optional[Tuple[str, ...]] = None  # None selects per-solver defaults
    timeout: float = 120.0

    def arguments(self, exe: str) -> Tuple[str, ...]:
        if self.args is not None:
            return tuple(self.args)
        if os.path.basename(exe).startswith("z3"):
            # keep every predicate as a relation so its model stays quantifier-free;
            # global guidance is needed for split loop invariants
            return Z3_DEFAULT_ARGS
        return ()

    def executable(self) -> str:
        exe = self.path or "z3"
        found = shutil.which(exe)
        if found is None:
            raise SolverNotFound(f"HORN solver {exe!r} not found")
        return found


@dataclass
class SolverAnswer:
    status: str  # sat / unsat / unknown
    output: str


def run_solver(script: str, config: SolverConfig) -> SolverAnswer:
    """Run the solver on ``script`` (written to a temporary file passed as the last argument)."""
    exe = config.executable()
    fd, path = tempfile.mkstemp(suffix=".smt2")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(script)
        try:
            proc = subprocess.run([exe, *config.arguments(exe), path], capture_output=True, text=True,
                                  timeout=config.timeout)
        except subprocess.TimeoutExpired as exc:
            raise Timeout(f"solver exceeded {config.timeout}s") from exc
    finally:
        os.unlink(path)
    out = proc.stdout
    first = out.strip().split("\n", 1)[0].strip() if out.strip() else ""
    if first in (SAT, UNSAT):
        return SolverAnswer(first, out)
    return SolverAnswer(UNKNOWN, out + proc.stderr)


# -- S-expressions -------------------------------------------------------------------


def parse_sexprs(text: str) -> List:
    tokens: List[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            tokens.append(text[i + 1:j])
            i = j + 1
        elif c == '"':
            j = text.index('"', i + 1)
            tokens.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(text[i:j])
            i = j
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(read())
            pos += 1
            return items
        if tok == ")":
            raise ModelParseError("unbalanced parenthesis")
        return tok

    out = []
    try:
        while pos < len(tokens):
            out.append(read())
    except IndexError as exc:
        raise ModelParseError("truncated s-expression") from exc
    return out


def parse_model(output: str) -> Dict[str, Tuple[List[Tuple[str, str]], object]]:
    """``define-fun`` entries of a model: name -> (formal parameters, body s-expression)."""
    exprs = parse_sexprs(output)
    defs: Dict[str, Tuple[List[Tuple[str, str]], object]] = {}

    def visit(x):
        if isinstance(x, list):
            if len(x) == 5 and x[0] == "define-fun":
                _, name, params, _sort, body = x
                defs[name] = ([(p[0], p[1]) for p in params], body)
            else:
                for y in x:
                    visit(y)

    for e in exprs:
        visit(e)
    return defs


def _expand_lets(x, env=None):
    env = env or {}
    if isinstance(x, str):
        return env.get(x, x)
    if x and x[0] == "let":
        bound = {b[0]: _expand_lets(b[1], env) for b in x[1]}
        inner = dict(env)
        inner.update(bound)
        return _expand_lets(x[2], inner)
    return [_expand_lets(y, env) for y in x]


_CMP = {"<": "<", "<=": "<=", ">": ">", ">=": ">="}


class _ModelReader:
    """Turns a model body into a source-language expression, lifting ``ite`` out of terms."""

    def __init__(self, renames: Mapping[str, str], sorts: Mapping[str, str]):
        self.renames = dict(renames)
        self.sorts = dict(sorts)

    def formula(self, x):
        if isinstance(x, str):
            if x == "true":
                return A.TRUE
            if x == "false":
                return A.FALSE
            if x in self.renames and self.sorts.get(x) == L.BOOL:
                return A.Var(self.renames[x])
            raise ModelParseError(f"unexpected atom {x!r} in Boolean position")
        if not x:
            raise ModelParseError("empty application")
        head, args = x[0], x[1:]
        if head == "and":
            return L.conj(*[self.formula(a) for a in args])
        if head == "or":
            return L.disj(*[self.formula(a) for a in args])
        if head == "not":
            return L.negate(self.formula(args[0]))
        if head == "=>":
            return L.disj(L.negate(self.formula(args[0])), self.formula(args[1]))
        if head == "ite":
            c = self.formula(args[0])
            return L.disj(L.conj(c, self.formula(args[1])), L.conj(L.negate(c), self.formula(args[2])))
        if head in ("=", "distinct"):
            if self.is_bool(args[0]):
                a, b = self.formula(args[0]), self.formula(args[1])
                same = L.disj(L.conj(a, b), L.conj(L.negate(a), L.negate(b)))
                return same if head == "=" else L.negate(same)
            return self.atom("==" if head == "=" else "!=", args[0], args[1])
        if head in _CMP:
            if len(args) != 2:
                raise ModelParseError(f"chained comparison {x!r}")
            return self.atom(_CMP[head], args[0], args[1])
        raise ModelParseError(f"unsupported operator {head!r}")

    def is_bool(self, x) -> bool:
        if isinstance(x, str):
            return x in ("true", "false") or self.sorts.get(x) == L.BOOL
        return x[0] in ("and", "or", "not", "=>", "=", "distinct", "<", "<=", ">", ">=") or (
            x[0] == "ite" and self.is_bool(x[2]))

    def atom(self, op, a, b):
        cases = []
        for ga, ta in self.term(a):
            for gb, tb in self.term(b):
                cases.append(L.conj(ga, gb, A.Binary(op, ta, tb)))
        return L.disj(*cases)

    def term(self, x) -> List[Tuple[object, object]]:
        """Guarded cases (guard, ite-free term)."""
        if isinstance(x, str):
            if x.lstrip("-").isdigit():
                return [(A.TRUE, A.IntLit(int(x)))]
            if x in self.renames:
                return [(A.TRUE, A.Var(self.renames[x]))]
            raise ModelParseError(f"unknown symbol {x!r}")
        head, args = x[0], x[1:]
        if head == "ite":
            c = self.formula(args[0])
            return ([(L.conj(c, g), t) for g, t in self.term(args[1])]
                    + [(L.conj(L.negate(c), g), t) for g, t in self.term(args[2])])
        if head == "-" and len(args) == 1:
            out = []
            for g, t in self.term(args[0]):
                out.append((g, A.IntLit(-t.value) if isinstance(t, A.IntLit) else A.Unary("-", t)))
            return out
        if head in ("+", "-", "*"):
            acc = self.term(args[0])
            for a in args[1:]:
                nxt = []
                for g1, t1 in acc:
                    for g2, t2 in self.term(a):
                        if head == "*" and not (isinstance(t1, A.IntLit) or isinstance(t2, A.IntLit)):
                            raise ModelParseError("non-linear product in model")
                        nxt.append((L.conj(g1, g2), A.Binary(head, t1, t2)))
                acc = nxt
            return acc
        raise ModelParseError(f"unsupported term operator {head!r}")


def model_expression(params: Sequence[Tuple[str, str]], body, formals: Sequence[str]) -> object:
    """Body of a ``define-fun`` rewritten over ``formals`` (the predicate's own parameter names)."""
    if len(params) != len(formals):
        raise ModelParseError("model arity differs from the declaration")
    renames = {p: f for (p, _), f in zip(params, formals)}
    sorts = {p: s for p, s in params}
    return tidy(_ModelReader(renames, sorts).formula(_expand_lets(body)))


_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def tidy(e):
    """Cosmetic rewriting of solver output: negated comparisons flipped, ``a + (-1) * b`` as ``a - b``."""
    if isinstance(e, A.Unary):
        arg = tidy(e.arg)
        if e.op == "!" and isinstance(arg, A.Binary) and arg.op in _FLIP:
            return tidy(A.Binary(_FLIP[arg.op], arg.lhs, arg.rhs))
        if e.op == "-" and isinstance(arg, A.IntLit):
            return A.IntLit(-arg.value)
        return A.neg(arg) if e.op == "!" else A.Unary(e.op, arg)
    if isinstance(e, A.Binary):
        lhs, rhs = tidy(e.lhs), tidy(e.rhs)
        if e.op == "*" and isinstance(lhs, A.IntLit) and lhs.value == -1:
            return A.Unary("-", rhs)
        if e.op == "*" and isinstance(lhs, A.IntLit) and lhs.value == 1:
            return rhs
        if e.op == "+" and isinstance(rhs, A.Unary) and rhs.op == "-":
            return A.Binary("-", lhs, rhs.arg)
        if e.op == "+" and isinstance(rhs, A.IntLit) and rhs.value < 0:
            return A.Binary("-", lhs, A.IntLit(-rhs.value))
        # comparisons are over integers, so strict bounds can be made inclusive
        if e.op == ">" and isinstance(rhs, A.IntLit) and rhs.label is None:
            return A.Binary(">=", lhs, A.IntLit(rhs.value + 1))
        if e.op == "<" and isinstance(rhs, A.IntLit) and rhs.label is None:
            return A.Binary("<=", lhs, A.IntLit(rhs.value - 1))
        return A.Binary(e.op, lhs, rhs)
    return e


# -- solving -----------------------------------------------------------------------------


@dataclass
class SolveResult:
    status: str  # Realizable / Unrealizable / Unknown
    predicates: Dict[str, A.Expr] = field(default_factory=dict)
    reason: str = ""


def solve_system(system: ChcSystem, config: SolverConfig) -> SolverAnswer:
    try:
        return run_solver(emit_smtlib(system), config)
    except Timeout as exc:
        return SolverAnswer(UNKNOWN, str(exc))


def is_correct(checked: CheckedProgram, config: SolverConfig) -> str:
    """Verification of a closed program: sat / unsat / unknown of its clauses."""
    return solve_system(to_chc(checked), config).status


def solve(checked: CheckedProgram, config: SolverConfig = SolverConfig(),
          templates: Optional[Mapping[str, A.Expr]] = None, recheck: bool = True) -> SolveResult:
    """Synthesize implementations of the partial predicates through the Horn encoding.

    A satisfying model yields a candidate; with ``recheck`` the candidate is
    substituted back and the closed program is verified again, and any
    disagreement is reported as ``Unknown``.
    """
    system = chc_synth(checked, templates)
    answer = solve_system(system, config)
    if answer.status == UNSAT:
        return SolveResult(UNREALIZABLE)
    if answer.status != SAT:
        return SolveResult(UNKNOWN_STATUS, reason=answer.output.strip()[:500])
    defs = parse_model(answer.output)
    pi: Dict[str, A.Expr] = {}
    for name in checked.partial:
        formals = [p.name for p in checked.program.predicate(name).params]
        if name not in defs:
            raise ModelParseError(f"model has no interpretation for {name}")
        params, body = defs[name]
        pi[name] = model_expression(params, body, formals)
    if recheck:
        closed = validate(substitute(checked, pi))
        again = is_correct(closed, config)
        if again != SAT:
            return SolveResult(UNKNOWN_STATUS, pi, f"re-verification returned {again}")
    return SolveResult(REALIZABLE, pi)
