"""Static checks: scoping, arity, sorts, predicate purity and call positions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import ast as A
from .errors import (
    ArityMismatch,
    DuplicateLoopId,
    ImpurePredicateBody,
    LoopInPredicate,
    MisplacedReturn,
    MissingMain,
    PredicateCallOutsideVerificationStatement,
    TypeMismatch,
    UnknownSymbol,
)

CLOSED, PARTIAL, TEMPLATE = "closed", "partial", "template"


@dataclass(frozen=True)
class PredicateInfo:
    kind: str
    # closed: the body expression; partial/template: the template formula (false if none)
    expr: A.Expr


@dataclass(frozen=True)
class CheckedProgram:
    program: A.Program
    predicates: Dict[str, PredicateInfo]
    var_types: Dict[str, Dict[str, str]]  # procedure -> variable -> declared type
    return_types: Dict[str, Tuple[str, ...]]
    loop_ids: Tuple[int, ...] = field(default=())

    @property
    def partial(self) -> Tuple[str, ...]:
        """Names of predicates lacking a full implementation (partial or template)."""
        return tuple(n for n, i in self.predicates.items() if i.kind != CLOSED)

    def template(self, name: str) -> A.Expr:
        return self.predicates[name].expr

    def param_types(self, name: str) -> Tuple[str, ...]:
        if self.program.has_procedure(name):
            return tuple(p.type for p in self.program.procedure(name).params)
        return tuple(p.type for p in self.program.predicate(name).params)

    def sort(self, typ: str) -> str:
        return A.BOOL if typ == A.BOOL else A.INT

    def enum_size(self, typ: str) -> Optional[int]:
        return self.program.enum_sizes().get(typ)

    @property
    def is_boolean(self) -> bool:
        for scope in self.var_types.values():
            if any(t != A.BOOL for t in scope.values()):
                return False
        for name in self.predicates:
            if any(t != A.BOOL for t in self.param_types(name)):
                return False
        return True


def sort_of(typ: str) -> str:
    return A.BOOL if typ == A.BOOL else A.INT


class _Checker:
    def __init__(self, program: A.Program):
        self.program = program
        self.procs = {p.name: p for p in program.procedures}
        self.preds = {p.name: p for p in program.predicates}
        self.enum_types = {e.name for e in program.enums}

    def check_type_name(self, param: A.Param) -> None:
        if param.type not in (A.INT, A.BOOL) and param.type not in self.enum_types:
            raise UnknownSymbol(f"unknown type {param.type!r}", param.pos)

    # -- expressions -----------------------------------------------------------
    def type_of(self, e: A.Expr, scope: Dict[str, str], where: str) -> str:
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, A.IntLit):
            return A.INT
        if isinstance(e, A.Var):
            if e.name not in scope:
                raise UnknownSymbol(f"unknown variable {e.name!r} in {where}", e.pos)
            return sort_of(scope[e.name])
        if isinstance(e, A.Apply):
            if e.name in self.preds:
                raise PredicateCallOutsideVerificationStatement(
                    f"predicate {e.name!r} may only be called as the argument of assume or assert", e.pos)
            if e.name in self.procs:
                raise TypeMismatch(f"procedure {e.name!r} cannot be called inside an expression", e.pos)
            raise UnknownSymbol(f"unknown function {e.name!r}", e.pos)
        if isinstance(e, A.Unary):
            t = self.type_of(e.arg, scope, where)
            want = A.BOOL if e.op == "!" else A.INT
            if t != want:
                raise TypeMismatch(f"operator {e.op!r} expects {want}", e.pos)
            return want
        if isinstance(e, A.Binary):
            lt = self.type_of(e.lhs, scope, where)
            rt = self.type_of(e.rhs, scope, where)
            if e.op in A.BOOL_OPS:
                if lt != A.BOOL or rt != A.BOOL:
                    raise TypeMismatch(f"operator {e.op!r} expects bool operands", e.pos)
                return A.BOOL
            if e.op in A.EQ_OPS:
                if lt != rt:
                    raise TypeMismatch(f"operator {e.op!r} compares {lt} with {rt}", e.pos)
                return A.BOOL
            if lt != A.INT or rt != A.INT:
                raise TypeMismatch(f"operator {e.op!r} expects int operands", e.pos)
            if e.op == "*" and not (isinstance(e.lhs, A.IntLit) or isinstance(e.rhs, A.IntLit)):
                raise TypeMismatch("multiplication must have a constant operand (linear arithmetic)", e.pos)
            return A.BOOL if e.op in A.CMP_OPS else A.INT
        raise TypeMismatch(f"not an expression: {e!r}")

    def expect_bool(self, e: A.Expr, scope: Dict[str, str], where: str) -> None:
        if self.type_of(e, scope, where) != A.BOOL:
            raise TypeMismatch(f"expected a Boolean condition in {where}", getattr(e, "pos", None))

    # -- predicates ------------------------------------------------------------
    def predicate_info(self, pred: A.Predicate) -> PredicateInfo:
        scope = {}
        for p in pred.params:
            self.check_type_name(p)
            scope[p.name] = p.type
        where = f"predicate {pred.name}"
        if pred.body is None:
            return PredicateInfo(PARTIAL, A.FALSE)
        leaves = self.predicate_paths(pred.body, A.TRUE, where)
        has_hole = any(leaf is None for _, leaf in leaves)
        for cond, leaf in leaves:
            self.expect_bool(cond, scope, where)
            if leaf is not None:
                self.expect_bool(leaf, scope, where)
        if has_hole or pred.template:
            for _, leaf in leaves:
                if leaf is not None and leaf != A.TRUE:
                    raise ImpurePredicateBody(
                        f"template branches of {pred.name!r} must return true or synth()", pred.pos)
            return PredicateInfo(TEMPLATE, _simplify_or([c for c, leaf in leaves if leaf is not None]))
        return PredicateInfo(CLOSED, _simplify_or([A.and_all([c, leaf]) for c, leaf in leaves]))

    def predicate_paths(self, s: A.Stmt, pc: A.Expr, where: str) -> List[Tuple[A.Expr, Optional[A.Expr]]]:
        """Flatten a loop-free predicate body into (path condition, returned value); None marks the hole."""
        if isinstance(s, A.Return):
            if len(s.values) != 1:
                raise ImpurePredicateBody(f"{where} must return exactly one Boolean", s.pos)
            return [(pc, s.values[0])]
        if isinstance(s, A.Synth):
            return [(pc, None)]
        if isinstance(s, A.If):
            return (self.predicate_paths(s.then, A.and_all([pc, s.cond]), where)
                    + self.predicate_paths(s.els, A.and_all([pc, A.neg(s.cond)]), where))
        if isinstance(s, A.Seq):
            head, rest = s.stmts[0], A.seq(*s.stmts[1:])
            if isinstance(head, A.If):
                # an if whose branches return falls through to the rest when a branch is empty
                then_done = _always_returns(head.then)
                els_done = _always_returns(head.els)
                if then_done and not els_done:
                    return self.predicate_paths(A.If(head.cond, head.then, A.seq(head.els, rest)), pc, where)
                if els_done and not then_done:
                    return self.predicate_paths(A.If(head.cond, A.seq(head.then, rest), head.els), pc, where)
            if _always_returns(head):
                raise ImpurePredicateBody(f"unreachable code in {where}", getattr(rest, "pos", None))
            return self._bad(head, where)
        return self._bad(s, where)

    def _bad(self, s: A.Stmt, where: str):
        if isinstance(s, A.While):
            raise LoopInPredicate(f"{where} contains a loop", s.pos)
        raise ImpurePredicateBody(f"{where} may only branch and return", getattr(s, "pos", None))

    # -- procedures -------------------------------------------------------------
    def check_program(self, require_main: bool = True) -> CheckedProgram:
        if require_main and "main" not in self.procs:
            raise MissingMain("program has no procedure named 'main'")
        infos = {p.name: self.predicate_info(p) for p in self.program.predicates}
        scopes: Dict[str, Dict[str, str]] = {}
        for proc in self.program.procedures:
            scope: Dict[str, str] = {}
            for p in proc.params + proc.locals:
                self.check_type_name(p)
                scope[p.name] = p.type
            scopes[proc.name] = scope
        self.scopes = scopes
        self.return_types = {
            proc.name: tuple(self.type_of(e, scopes[proc.name], proc.name) for e in proc.returns)
            for proc in self.program.procedures
        }
        self.loop_ids: List[int] = []
        for proc in self.program.procedures:
            self.stmt(proc.body, proc.name)
        return CheckedProgram(self.program, infos, scopes, self.return_types, tuple(self.loop_ids))

    def stmt(self, s: A.Stmt, proc: str) -> None:
        scope = self.scopes[proc]
        where = f"procedure {proc}"
        if isinstance(s, A.Seq):
            for x in s.stmts:
                self.stmt(x, proc)
        elif isinstance(s, A.Skip):
            pass
        elif isinstance(s, A.Assign):
            if s.var not in scope:
                raise UnknownSymbol(f"unknown variable {s.var!r} in {where}", s.pos)
            if self.type_of(s.expr, scope, where) != sort_of(scope[s.var]):
                raise TypeMismatch(f"assignment to {s.var!r} has the wrong sort", s.pos)
        elif isinstance(s, A.Havoc):
            if s.var not in scope:
                raise UnknownSymbol(f"unknown variable {s.var!r} in {where}", s.pos)
        elif isinstance(s, (A.Assume, A.Assert)):
            c = s.cond
            if isinstance(c, A.Apply) and c.name in self.preds:
                pred = self.preds[c.name]
                if len(c.args) != len(pred.params):
                    raise ArityMismatch(f"{c.name!r} expects {len(pred.params)} arguments", c.pos)
                for a, p in zip(c.args, pred.params):
                    if self.type_of(a, scope, where) != sort_of(p.type):
                        raise TypeMismatch(f"argument for {p.name!r} of {c.name!r} has the wrong sort", c.pos)
            else:
                self.expect_bool(c, scope, where)
        elif isinstance(s, A.While):
            if s.loop_id in self.loop_ids:
                raise DuplicateLoopId(f"loop id {s.loop_id} used twice", s.pos)
            self.loop_ids.append(s.loop_id)
            self.expect_bool(s.cond, scope, where)
            self.stmt(s.body, proc)
        elif isinstance(s, A.If):
            self.expect_bool(s.cond, scope, where)
            self.stmt(s.then, proc)
            self.stmt(s.els, proc)
        elif isinstance(s, A.Call):
            if s.proc in self.preds:
                raise PredicateCallOutsideVerificationStatement(
                    f"predicate {s.proc!r} may only be called as the argument of assume or assert", s.pos)
            if s.proc not in self.procs:
                raise UnknownSymbol(f"unknown procedure {s.proc!r}", s.pos)
            callee = self.procs[s.proc]
            if len(s.args) != len(callee.params):
                raise ArityMismatch(f"{s.proc!r} expects {len(callee.params)} arguments", s.pos)
            for a, p in zip(s.args, callee.params):
                if self.type_of(a, scope, where) != sort_of(p.type):
                    raise TypeMismatch(f"argument for {p.name!r} of {s.proc!r} has the wrong sort", s.pos)
            rets = self.return_types[s.proc]
            if s.lhs and len(s.lhs) != len(rets):
                raise ArityMismatch(f"{s.proc!r} returns {len(rets)} values, {len(s.lhs)} targets given", s.pos)
            for v, t in zip(s.lhs, rets):
                if v not in scope:
                    raise UnknownSymbol(f"unknown variable {v!r} in {where}", s.pos)
                if sort_of(scope[v]) != t:
                    raise TypeMismatch(f"result assigned to {v!r} has the wrong sort", s.pos)
            if len(set(s.lhs)) != len(s.lhs):
                raise TypeMismatch("a variable appears twice among call targets", s.pos)
        elif isinstance(s, (A.Return, A.Synth)):
            raise MisplacedReturn(f"return must be the last statement of {where}", s.pos)
        else:
            raise TypeMismatch(f"unknown statement {s!r}")


def _always_returns(s: A.Stmt) -> bool:
    if isinstance(s, (A.Return, A.Synth)):
        return True
    if isinstance(s, A.If):
        return _always_returns(s.then) and _always_returns(s.els)
    if isinstance(s, A.Seq):
        return any(_always_returns(x) for x in s.stmts)
    return False


def _simplify_or(exprs: List[A.Expr]) -> A.Expr:
    if any(e == A.TRUE for e in exprs):
        return A.TRUE
    return A.or_all(exprs)


def validate(program: A.Program, require_main: bool = True) -> CheckedProgram:
    """Check a parsed program; raises a :class:`FrontendError` subclass on the first violation.

    ``require_main=False`` accepts libraries, such as the inputs of the reductions.
    """
    return _Checker(program).check_program(require_main)
