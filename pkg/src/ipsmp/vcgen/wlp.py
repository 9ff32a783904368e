"""Weakest liberal preconditions and the Horn encodings built on them."""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Tuple

from ..frontend import ast as A
from ..frontend.validate import CLOSED, CheckedProgram
from . import logic as L
from .chc import ChcSystem


def pre_name(proc: str) -> str:
    return f"{proc}_pre"


def sum_name(proc: str) -> str:
    return f"{proc}_sum"


def loop_name(loop_id) -> str:
    return f"loop_{loop_id}"


class WlpContext:
    """Per-program state for the transformer: fresh names, sorts and generated predicates."""

    def __init__(self, checked: CheckedProgram, system: Optional[ChcSystem] = None):
        self.checked = checked
        self.prog = checked.program
        self.system = system if system is not None else ChcSystem()
        self.counter = 0
        self.proc: Optional[A.Procedure] = None
        taken = {p.name for p in self.prog.procedures} | {p.name for p in self.prog.predicates}
        self._taken = taken

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}!{self.counter}"

    def enter(self, proc: A.Procedure) -> Dict[str, str]:
        """Switch to ``proc``; returns its variable sorts in declaration order."""
        self.proc = proc
        return {v: L.smt_sort(t) for v, t in self.scope_types().items()}

    def scope_types(self) -> Dict[str, str]:
        return {p.name: p.type for p in self.proc.params + self.proc.locals}

    def sort_of(self, var: str) -> str:
        return L.smt_sort(self.scope_types()[var])

    def range_guard(self, name: str, typ: str) -> object:
        n = self.checked.enum_size(typ)
        if n is None:
            return L.TRUE
        v = A.Var(name)
        return L.conj(A.Binary("<=", A.IntLit(0), v), A.Binary("<", v, A.IntLit(n)))

    def declare(self, name: str, sorts, kind: str) -> None:
        if name in self._taken and kind in ("pre", "sum", "loop"):
            raise ValueError(f"generated predicate name {name} clashes with a declaration")
        self.system.declare(name, sorts, kind)

    def proc_sorts(self, proc: A.Procedure) -> Tuple[List[str], List[str]]:
        params = [L.smt_sort(p.type) for p in proc.params]
        rets = [L.smt_sort(t) for t in self.checked.return_types.get(proc.name, ())]
        return params, rets


def wlp(stmt: A.Stmt, post, ctx: WlpContext):
    """Weakest liberal precondition of ``stmt`` with respect to ``post``."""
    if isinstance(stmt, A.Seq):
        q = post
        for s in reversed(stmt.stmts):
            q = wlp(s, q, ctx)
        return q
    if isinstance(stmt, A.Skip):
        return post
    if isinstance(stmt, A.Assign):
        return L.subst(post, {stmt.var: stmt.expr})
    if isinstance(stmt, A.Havoc):
        typ = ctx.scope_types()[stmt.var]
        x = ctx.fresh(stmt.var)
        body = L.implies(ctx.range_guard(x, typ), L.subst(post, {stmt.var: A.Var(x)}))
        return L.forall([(x, L.smt_sort(typ))], body)
    if isinstance(stmt, A.Assume):
        return L.implies(stmt.cond, post)
    if isinstance(stmt, A.Assert):
        return L.conj(stmt.cond, post)
    if isinstance(stmt, A.If):
        return L.conj(L.implies(stmt.cond, wlp(stmt.then, post, ctx)),
                      L.implies(L.negate(stmt.cond), wlp(stmt.els, post, ctx)))
    if isinstance(stmt, A.While):
        return _wlp_while(stmt, post, ctx)
    if isinstance(stmt, A.Call):
        return _wlp_call(stmt, post, ctx)
    raise TypeError(f"no precondition rule for {type(stmt).__name__}")


def _wlp_while(stmt: A.While, post, ctx: WlpContext):
    scope = list(ctx.scope_types())
    name = loop_name(stmt.loop_id)
    ctx.declare(name, [ctx.sort_of(v) for v in scope], "loop")
    inv = A.Apply(name, tuple(A.Var(v) for v in scope))
    fresh = [ctx.fresh(v) for v in scope]
    ren = {v: A.Var(w) for v, w in zip(scope, fresh)}
    params = [(w, ctx.sort_of(v)) for v, w in zip(scope, fresh)]
    inv_w = L.subst(inv, ren)
    body = wlp(stmt.body, inv, ctx)
    consecution = L.forall(params, L.implies(L.conj(inv_w, L.subst(stmt.cond, ren)), L.subst(body, ren)))
    fresh2 = [ctx.fresh(v) for v in scope]
    ren2 = {v: A.Var(w) for v, w in zip(scope, fresh2)}
    params2 = [(w, ctx.sort_of(v)) for v, w in zip(scope, fresh2)]
    exit_ = L.forall(params2, L.implies(L.conj(L.subst(inv, ren2), L.negate(L.subst(stmt.cond, ren2))),
                                        L.subst(post, ren2)))
    return L.conj(consecution, exit_, inv)


def _wlp_call(stmt: A.Call, post, ctx: WlpContext):
    callee = ctx.prog.procedure(stmt.proc)
    psorts, rsorts = ctx.proc_sorts(callee)
    ctx.declare(pre_name(callee.name), psorts, "pre")
    ctx.declare(sum_name(callee.name), psorts + rsorts, "sum")
    rs = [ctx.fresh(f"{callee.name}.r{i}") for i in range(len(rsorts))]
    q = L.subst(post, {y: A.Var(r) for y, r in zip(stmt.lhs, rs)})
    summary = A.Apply(sum_name(callee.name), tuple(stmt.args) + tuple(A.Var(r) for r in rs))
    return L.conj(A.Apply(pre_name(callee.name), tuple(stmt.args)),
                  L.forall(zip(rs, rsorts), L.implies(summary, q)))


# -- program encodings -------------------------------------------------------------------


def _declare_predicates(ctx: WlpContext) -> None:
    for pred in ctx.prog.predicates:
        kind = "closed" if ctx.checked.predicates[pred.name].kind == CLOSED else "partial"
        ctx.declare(pred.name, [L.smt_sort(p.type) for p in pred.params], kind)


def _called(prog: A.Program) -> set:
    out = set()

    def walk(s):
        if isinstance(s, A.Seq):
            for x in s.stmts:
                walk(x)
        elif isinstance(s, A.While):
            walk(s.body)
        elif isinstance(s, A.If):
            walk(s.then)
            walk(s.els)
        elif isinstance(s, A.Call):
            out.add(s.proc)

    for p in prog.procedures:
        walk(p.body)
    return out


def summarized(prog: A.Program):
    """Procedures that get pre/summary predicates: all but an uncalled entry."""
    called = _called(prog)
    return [p for p in prog.procedures if p.name != prog.entry or p.name in called]


def declare_program(ctx: WlpContext) -> None:
    _declare_predicates(ctx)
    for proc in summarized(ctx.prog):
        psorts, rsorts = ctx.proc_sorts(proc)
        ctx.declare(pre_name(proc.name), psorts, "pre")
        ctx.declare(sum_name(proc.name), psorts + rsorts, "sum")


def add_main_goal(ctx: WlpContext) -> None:
    main = ctx.prog.procedure(ctx.prog.entry)
    env = ctx.enter(main)
    # uninitialized variables start arbitrary, but enum-typed ones stay in range
    guards = [ctx.range_guard(p.name, p.type) for p in main.params + main.locals]
    ctx.system.add_goal(L.implies(L.conj(*guards), wlp(main.body, L.TRUE, ctx)), env, f"proc:{main.name}")


def add_procedure_goals(ctx: WlpContext) -> None:
    """``x = old && f_pre(x) ==> wlp(body, f_sum(old, returns))`` for each summarized procedure."""
    for proc in summarized(ctx.prog):
        env = ctx.enter(proc)
        olds = [ctx.fresh(p.name) for p in proc.params]
        eqs = [L.eq(A.Var(p.name), A.Var(o)) for p, o in zip(proc.params, olds)]
        guards = [ctx.range_guard(p.name, p.type) for p in proc.locals]
        hyp = L.conj(*eqs, *guards, A.Apply(pre_name(proc.name), tuple(A.Var(p.name) for p in proc.params)))
        post = A.Apply(sum_name(proc.name), tuple(A.Var(o) for o in olds) + tuple(proc.returns))
        goal = L.forall([(o, L.smt_sort(p.type)) for p, o in zip(proc.params, olds)],
                        L.implies(hyp, wlp(proc.body, post, ctx)))
        ctx.system.add_goal(goal, env, f"proc:{proc.name}")


def add_closed_predicate_goals(ctx: WlpContext) -> None:
    for pred in ctx.prog.predicates:
        info = ctx.checked.predicates[pred.name]
        if info.kind != CLOSED:
            continue
        env = {p.name: L.smt_sort(p.type) for p in pred.params}
        app = A.Apply(pred.name, tuple(A.Var(p.name) for p in pred.params))
        ctx.system.add_goal(L.implies(info.expr, app), env, f"pred:{pred.name}")
        ctx.system.add_goal(L.implies(app, info.expr), env, f"pred:{pred.name}")


def to_chc(checked: CheckedProgram, ctx: Optional[WlpContext] = None) -> ChcSystem:
    """Partial-correctness clauses: one goal for main, one summary goal per procedure,
    and a definition for each closed predicate."""
    ctx = ctx or WlpContext(checked)
    declare_program(ctx)
    if ctx.prog.has_procedure(ctx.prog.entry):
        add_main_goal(ctx)
    add_procedure_goals(ctx)
    add_closed_predicate_goals(ctx)
    return ctx.system


def chc_synth(checked: CheckedProgram, templates: Optional[Mapping[str, A.Expr]] = None) -> ChcSystem:
    """``to_chc`` plus one lower-bound clause per partial predicate."""
    system = to_chc(checked)
    for name in checked.partial:
        pred = checked.program.predicate(name)
        tmpl = (templates or {}).get(name, checked.template(name))
        env = {p.name: L.smt_sort(p.type) for p in pred.params}
        app = A.Apply(name, tuple(A.Var(p.name) for p in pred.params))
        system.clauses.append(_template_clause(tmpl, app, env, name))
    return system


def _template_clause(tmpl, app, env, name):
    # kept even when the template is false, so every partial predicate has a clause
    from .chc import ChcClause

    return ChcClause(tuple(env.items()), tmpl, (), app, f"template:{name}")
