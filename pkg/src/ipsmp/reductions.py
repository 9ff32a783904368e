"""Encode invariant-inference problems as predicate-synthesis instances.

Three input shapes are supported.

class
    A procedure ``ctor`` returning the n fields of an object.  Every other
    procedure whose first n parameters are fields and whose first n results
    are the updated fields is an impure method; every procedure taking the
    fields first and returning nothing is a client.  Other procedures are
    helpers and are left alone.
ring
    A procedure ``tr(l, s, r)`` returning the updated ``(l, s, r)`` and two
    closed predicates ``init(l, s, r)`` and ``property(l, s, r)``.
loop
    A ``main`` whose body contains a top-level ``while``: ``S1; while (e) {S2}; S3``.

Each reduction adds (or replaces) ``main`` and declares the invariant
predicate ``Inv``.  An optional shape splits the invariant into guarded
pieces: a list of ``{guard, name, args}``; the invariant is then the
conjunction of ``guard ==> name(args)`` over the pieces.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .frontend import ast as A
from .frontend.parser import parse_expr
from .frontend.printer import program_text
from .frontend.validate import CLOSED, CheckedProgram, validate
from .vcgen import logic as L
from .vcgen.chc import ChcSystem
from .vcgen.solver import SAT, SolverConfig, solve_system
from .vcgen.wlp import (
    WlpContext, add_closed_predicate_goals, add_procedure_goals, declare_program, pre_name, sum_name, wlp,
)

LOOP, CLASS, RING, PROGRAM = "loop", "class", "ring", "program"
KINDS = (LOOP, CLASS, RING)


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ShapePart:
    guard: A.Expr
    name: str
    args: Tuple[str, ...]


@dataclass
class IpsMpInstance:
    kind: str
    program: A.Program
    invariant: str
    formals: Tuple[A.Param, ...]
    shape: Tuple[ShapePart, ...] = ()

    def checked(self) -> CheckedProgram:
        return validate(self.program)

    def text(self) -> str:
        return program_text(self.program)

    @property
    def predicates(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.shape) if self.shape else (self.invariant,)


def parse_shape(items: Sequence[Mapping], enums: Sequence[A.Enum] = ()) -> Tuple[ShapePart, ...]:
    """Shape entries as read from JSON: ``[{"guard": text, "name": str, "args": [var]}]``."""
    out = []
    for item in items:
        guard = item.get("guard", "true")
        g = parse_expr(guard, enums) if isinstance(guard, str) else guard
        out.append(ShapePart(g, item["name"], tuple(item["args"])))
    return tuple(out)


# -- helpers --------------------------------------------------------------------------------


def _fresh_name(base: str, taken) -> str:
    name = base
    k = 0
    while name in taken:
        k += 1
        name = f"{base}_{k}"
    return name


def _invariant_stmt(kind, name, formals, actuals, shape):
    """``assume``/``assert`` of the invariant at ``actuals`` (expressions)."""
    if not shape:
        return kind(A.Apply(name, tuple(actuals)))
    env = {p.name: a for p, a in zip(formals, actuals)}
    stmts = []
    for part in shape:
        unknown = [a for a in part.args if a not in env]
        if unknown:
            raise ShapeMismatch(f"shape argument {unknown[0]!r} is not an invariant parameter")
        app = kind(A.Apply(part.name, tuple(env[a] for a in part.args)))
        guard = A.subst_expr(part.guard, env)
        stmts.append(app if guard == A.TRUE else A.If(guard, app, A.Skip()))
    return A.seq(*stmts)


def _invariant_decls(name, formals, shape, template: Optional[A.Expr]) -> List[A.Predicate]:
    def decl(pname, params):
        if template is None:
            return A.Predicate(pname, params)
        body = A.seq(A.If(template, A.Return((A.TRUE,)), A.Skip()), A.Synth())
        return A.Predicate(pname, params, body, template=True)

    if not shape:
        return [decl(name, tuple(formals))]
    types = {p.name: p.type for p in formals}
    out, seen = [], set()
    for part in shape:
        if part.name in seen:
            continue
        seen.add(part.name)
        for a in part.args:
            if a not in types:
                raise ShapeMismatch(f"shape argument {a!r} is not an invariant parameter")
        bad = A.expr_vars(part.guard) - set(types)
        if bad:
            raise ShapeMismatch(f"shape guard mentions {sorted(bad)}")
        out.append(decl(part.name, tuple(A.Param(a, types[a]) for a in part.args)))
    return out


def _check_names(prog: A.Program, names) -> None:
    taken = {p.name for p in prog.procedures} | {p.name for p in prog.predicates}
    clash = sorted(set(names) & taken)
    if clash:
        raise ShapeMismatch(f"names already declared: {clash}")


def invariant_formula(inst: IpsMpInstance, pi: Mapping[str, A.Expr]) -> A.Expr:
    """The invariant over its formals, assembled from ``pi`` (one entry per shape piece)."""
    if not inst.shape:
        return pi[inst.invariant]
    # each piece's parameters carry the names of the formals they stand for
    return L.conj(*[L.implies(part.guard, pi[part.name]) for part in inst.shape])


# -- class invariants -----------------------------------------------------------------------


@dataclass
class ClassShape:
    ctor: A.Procedure
    fields: Tuple[A.Param, ...]
    methods: Tuple[A.Procedure, ...]
    clients: Tuple[A.Procedure, ...]


def class_shape(checked: CheckedProgram, ctor: str = "ctor") -> ClassShape:
    prog = checked.program
    if not prog.has_procedure(ctor):
        raise ShapeMismatch(f"no constructor procedure {ctor!r}")
    c = prog.procedure(ctor)
    rtypes = checked.return_types[ctor]
    n = len(rtypes)
    if n == 0:
        raise ShapeMismatch("the constructor returns no fields")
    sorts = [L.smt_sort(t) for t in rtypes]
    methods, clients = [], []
    field_params = None
    for p in prog.procedures:
        if p.name in (ctor, prog.entry) or len(p.params) < n:
            continue
        head = p.params[:n]
        if [L.smt_sort(q.type) for q in head] != sorts:
            continue
        rets = [L.smt_sort(t) for t in checked.return_types[p.name]]
        if len(rets) >= n and rets[:n] == sorts:
            methods.append(p)
        elif not rets:
            clients.append(p)
        else:
            continue
        field_params = field_params or head
    if field_params is None:
        raise ShapeMismatch("no method or client takes the fields as its leading parameters")
    if not clients:
        raise ShapeMismatch("no client function to establish sufficiency for")
    return ClassShape(c, tuple(field_params), tuple(methods), tuple(clients))


def reduce_class(checked: CheckedProgram, shape: Sequence[ShapePart] = (), ctor: str = "ctor",
                 name: str = "Inv") -> IpsMpInstance:
    """Cases: initiation after the constructor, closure under each impure method, sufficiency for each client."""
    prog = checked.program
    cs = class_shape(checked, ctor)
    names = [name] + [p.name for p in shape]
    _check_names(prog, names)
    fields = cs.fields
    taken = {f.name for f in fields}
    locals_: List[A.Param] = list(fields)
    sel = _fresh_name("br", taken)
    taken.add(sel)
    locals_.append(A.Param(sel, A.INT))

    def args_for(proc: A.Procedure, skip: int):
        out = []
        for q in proc.params[skip:]:
            v = _fresh_name(f"{proc.name}_{q.name}", taken)
            taken.add(v)
            locals_.append(A.Param(v, q.type))
            out.append(v)
        return out

    fvars = [A.Var(f.name) for f in fields]
    havoc_fields = [A.Havoc(f.name) for f in fields]
    cases = []
    # initiation
    cargs = args_for(cs.ctor, 0)
    cases.append(A.seq(*[A.Havoc(a) for a in cargs],
                       A.Call(tuple(f.name for f in fields), cs.ctor.name, tuple(A.Var(a) for a in cargs)),
                       _invariant_stmt(A.Assert, name, fields, fvars, shape)))
    for m in cs.methods:
        margs = args_for(m, len(fields))
        extra = []
        for k, t in enumerate(checked.return_types[m.name][len(fields):]):
            v = _fresh_name(f"{m.name}_out{k}", taken)
            taken.add(v)
            typ = A.BOOL if t == A.BOOL else A.INT
            locals_.append(A.Param(v, typ))
            extra.append(v)
        cases.append(A.seq(*havoc_fields, *[A.Havoc(a) for a in margs],
                           _invariant_stmt(A.Assume, name, fields, fvars, shape),
                           A.Call(tuple(f.name for f in fields) + tuple(extra), m.name,
                                  tuple(fvars) + tuple(A.Var(a) for a in margs)),
                           _invariant_stmt(A.Assert, name, fields, fvars, shape)))
    for c in cs.clients:
        cargs2 = args_for(c, len(fields))
        cases.append(A.seq(*havoc_fields, *[A.Havoc(a) for a in cargs2],
                           _invariant_stmt(A.Assume, name, fields, fvars, shape),
                           A.Call((), c.name, tuple(fvars) + tuple(A.Var(a) for a in cargs2))))
    body = A.seq(A.Havoc(sel), _case_chain(sel, cases))
    main = A.Procedure(prog.entry, (), tuple(locals_), body, ())
    preds = tuple(prog.predicates) + tuple(_invariant_decls(name, fields, shape, None))
    procs = tuple(p for p in prog.procedures if p.name != prog.entry) + (main,)
    out = replace(prog, procedures=procs, predicates=preds)
    return IpsMpInstance(CLASS, out, name, fields, tuple(shape))


def _case_chain(sel: str, cases: Sequence[A.Stmt]) -> A.Stmt:
    """``if (sel == 0) c0 else if (sel == 1) c1 ... else c_last``."""
    stmt = cases[-1]
    for k in range(len(cases) - 2, -1, -1):
        stmt = A.If(A.Binary("==", A.Var(sel), A.IntLit(k)), cases[k], stmt)
    return stmt


# -- ring invariants ------------------------------------------------------------------------


def ring_shape(checked: CheckedProgram):
    prog = checked.program
    for need in ("init", "property"):
        if not prog.has_predicate(need) or checked.predicates[need].kind != CLOSED:
            raise ShapeMismatch(f"ring input needs a closed predicate {need!r}")
    if not prog.has_procedure("tr"):
        raise ShapeMismatch("ring input needs a transition procedure 'tr'")
    tr = prog.procedure("tr")
    if len(tr.params) != 3:
        raise ShapeMismatch("tr must take (l, s, r)")
    types = [p.type for p in tr.params]
    if list(checked.return_types["tr"]) != [checked.sort(t) for t in types]:
        raise ShapeMismatch("tr must return the updated (l, s, r)")
    if types[0] != types[2]:
        raise ShapeMismatch("both locks of a process must have the same type")
    for need in ("init", "property"):
        ptypes = [p.type for p in prog.predicate(need).params]
        if ptypes != types:
            raise ShapeMismatch(f"{need} must take arguments typed like tr")
    return tr


def _pred_body(checked: CheckedProgram, name: str, actuals: Sequence[A.Expr]) -> A.Expr:
    pred = checked.program.predicate(name)
    return A.subst_expr(checked.predicates[name].expr, {p.name: a for p, a in zip(pred.params, actuals)})


def reduce_ring(checked: CheckedProgram, shape: Sequence[ShapePart] = (), name: str = "Inv") -> IpsMpInstance:
    """Two cases: a transition of one process checked against both views, and adequacy."""
    prog = checked.program
    tr = ring_shape(checked)
    _check_names(prog, [name] + [p.name for p in shape])
    formals = tr.params
    l, s, r = (p.name for p in formals)
    taken = {l, s, r}
    i = _fresh_name("i", taken)
    taken.add(i)
    sel = _fresh_name("br", taken)
    locals_ = list(formals) + [A.Param(i, formals[1].type), A.Param(sel, A.INT)]
    L_, S_, R_, I_ = (A.Var(v) for v in (l, s, r, i))
    own, other = [L_, S_, R_], [R_, I_, L_]
    step = A.seq(
        _invariant_stmt(A.Assume, name, formals, own, shape),
        _invariant_stmt(A.Assume, name, formals, other, shape),
        A.Call((l, s, r), tr.name, (L_, S_, R_)),
        _invariant_stmt(A.Assert, name, formals, own, shape),
        _invariant_stmt(A.Assert, name, formals, other, shape),
    )
    adequate = A.seq(_invariant_stmt(A.Assume, name, formals, own, shape),
                     A.Assert(A.Apply("property", (L_, S_, R_))))
    cases = [step, adequate]
    template = _pred_body(checked, "init", [A.Var(p.name) for p in formals])
    if shape:
        # pieces cannot share the initial-state template, so initiation becomes a case of its own
        cases.append(A.seq(A.Assume(A.Apply("init", (L_, S_, R_))),
                           _invariant_stmt(A.Assert, name, formals, own, shape)))
        template = None
    body = A.seq(A.Havoc(sel), A.Havoc(l), A.Havoc(s), A.Havoc(r), A.Havoc(i), _case_chain(sel, cases))
    main = A.Procedure(prog.entry, (), tuple(locals_), body, ())
    decls = _invariant_decls(name, formals, shape, template)
    procs = tuple(p for p in prog.procedures if p.name != prog.entry) + (main,)
    out = replace(prog, procedures=procs, predicates=tuple(prog.predicates) + tuple(decls))
    return IpsMpInstance(RING, out, name, tuple(formals), tuple(shape))


# -- loop invariants ------------------------------------------------------------------------


@dataclass
class LoopShape:
    before: A.Stmt
    loop: A.While
    after: A.Stmt
    scope: Tuple[A.Param, ...]


def loop_shape(checked: CheckedProgram) -> LoopShape:
    prog = checked.program
    if not prog.has_procedure(prog.entry):
        raise ShapeMismatch("loop input needs a main procedure")
    main = prog.procedure(prog.entry)
    stmts = main.body.stmts if isinstance(main.body, A.Seq) else (main.body,)
    for k, st in enumerate(stmts):
        if isinstance(st, A.While):
            return LoopShape(A.seq(*stmts[:k]), st, A.seq(*stmts[k + 1:]), main.params + main.locals)
    raise ShapeMismatch("main has no top-level while loop")


def _assigned(s: A.Stmt) -> List[str]:
    out: List[str] = []

    def add(v):
        if v not in out:
            out.append(v)

    def walk(x):
        if isinstance(x, A.Seq):
            for y in x.stmts:
                walk(y)
        elif isinstance(x, (A.Assign, A.Havoc)):
            add(x.var)
        elif isinstance(x, A.While):
            walk(x.body)
        elif isinstance(x, A.If):
            walk(x.then)
            walk(x.els)
        elif isinstance(x, A.Call):
            for v in x.lhs:
                add(v)

    walk(s)
    return out


def reduce_loop(checked: CheckedProgram, shape: Sequence[ShapePart] = (), name: str = "Inv") -> IpsMpInstance:
    """Assert at entry, jump to an arbitrary iteration, check one iteration, then exit."""
    prog = checked.program
    ls = loop_shape(checked)
    _check_names(prog, [name] + [p.name for p in shape])
    main = prog.procedure(prog.entry)
    formals = ls.scope
    vars_ = [A.Var(p.name) for p in formals]
    mutable = _assigned(ls.loop.body)
    body = A.seq(
        ls.before,
        _invariant_stmt(A.Assert, name, formals, vars_, shape),
        *[A.Havoc(v) for v in mutable],
        _invariant_stmt(A.Assume, name, formals, vars_, shape),
        A.If(ls.loop.cond,
             A.seq(ls.loop.body, _invariant_stmt(A.Assert, name, formals, vars_, shape)),
             ls.after),
    )
    new_main = replace(main, body=body)
    procs = tuple(new_main if p.name == prog.entry else p for p in prog.procedures)
    decls = _invariant_decls(name, formals, shape, None)
    out = replace(prog, procedures=procs, predicates=tuple(prog.predicates) + tuple(decls))
    return IpsMpInstance(LOOP, out, name, tuple(formals), tuple(shape))


def reduce(kind: str, checked: CheckedProgram, shape: Sequence[ShapePart] = ()) -> IpsMpInstance:
    if kind == CLASS:
        return reduce_class(checked, shape)
    if kind == RING:
        return reduce_ring(checked, shape)
    if kind == LOOP:
        return reduce_loop(checked, shape)
    raise ValueError(f"unknown reduction kind {kind!r}")


# -- checking candidate invariants directly ------------------------------------------------


class _Psi:
    """Builds the defining conditions of an invariant as Horn goals next to the program's clauses."""

    def __init__(self, checked: CheckedProgram):
        self.checked = checked
        self.ctx = WlpContext(checked, ChcSystem())
        declare_program(self.ctx)
        add_procedure_goals(self.ctx)
        add_closed_predicate_goals(self.ctx)

    def goal(self, formula, env: Dict[str, str], origin: str) -> None:
        self.ctx.system.add_goal(formula, env, origin)

    def holds(self, config: SolverConfig) -> bool:
        return solve_system(self.ctx.system, config).status == SAT


def _instantiate(phi: A.Expr, formals: Sequence[A.Param], actuals: Sequence[A.Expr]) -> A.Expr:
    return A.subst_expr(phi, {p.name: a for p, a in zip(formals, actuals)})


def _range(checked: CheckedProgram, var: str, typ: str):
    n = checked.enum_size(typ)
    if n is None:
        return L.TRUE
    return L.conj(A.Binary("<=", A.IntLit(0), A.Var(var)), A.Binary("<", A.Var(var), A.IntLit(n)))


def check_solution(kind: str, checked: CheckedProgram, phi: A.Expr, config: SolverConfig = SolverConfig(),
                   shape: Sequence[ShapePart] = ()) -> bool:
    """Does ``phi`` (over the invariant's formals) meet the defining conditions for ``kind``?

    For ``kind == "program"`` the argument is a map from partial predicates
    to implementations and the check is plain verification of the
    implemented program.
    """
    if kind == PROGRAM:
        from .frontend.transform import substitute
        from .vcgen.solver import is_correct

        return is_correct(validate(substitute(checked, phi)), config) == SAT
    if kind == CLASS:
        return _check_class(checked, phi, config)
    if kind == RING:
        return _check_ring(checked, phi, config)
    if kind == LOOP:
        return _check_loop(checked, phi, config)
    raise ValueError(f"unknown kind {kind!r}")


def _check_class(checked, phi, config) -> bool:
    cs = class_shape(checked)
    psi = _Psi(checked)
    fields = cs.fields
    env: Dict[str, str] = {}
    names = set()

    def fresh_vars(prefix, params):
        out = []
        for k, q in enumerate(params):
            v = f"{prefix}!{k}"
            names.add(v)
            env[v] = L.smt_sort(q.type if isinstance(q, A.Param) else q)
            out.append(v)
        return out

    x = fresh_vars("x", fields)
    xv = [A.Var(v) for v in x]
    here = _instantiate(phi, fields, xv)
    ctor_args = fresh_vars("a", cs.ctor.params)
    av = [A.Var(v) for v in ctor_args]
    ranges = L.conj(*[_range(checked, v, q.type) for v, q in zip(ctor_args, cs.ctor.params)])
    # constructor arguments are arbitrary, as in the initiation case
    psi.goal(L.implies(ranges, A.Apply(pre_name(cs.ctor.name), tuple(av))), dict(env), "psi:ctor_pre")
    psi.goal(L.implies(L.conj(A.Apply(pre_name(cs.ctor.name), tuple(av)),
                              A.Apply(sum_name(cs.ctor.name), tuple(av) + tuple(xv))), here),
             dict(env), "psi:init")
    for m in cs.methods:
        margs = fresh_vars(f"{m.name}.a", m.params[len(fields):])
        outs = fresh_vars(f"{m.name}.o", checked.return_types[m.name])
        mv = [A.Var(v) for v in margs]
        ov = [A.Var(v) for v in outs]
        ranges = L.conj(*[_range(checked, v, q.type) for v, q in zip(margs, m.params[len(fields):])])
        after = _instantiate(phi, fields, ov[:len(fields)])
        psi.goal(L.implies(L.conj(here, A.Apply(sum_name(m.name), tuple(xv + mv + ov))), after),
                 dict(env), f"psi:close:{m.name}")
        psi.goal(L.implies(L.conj(here, ranges), A.Apply(pre_name(m.name), tuple(xv + mv))),
                 dict(env), f"psi:pre:{m.name}")
    for c in cs.clients:
        cargs = fresh_vars(f"{c.name}.a", c.params[len(fields):])
        cv = [A.Var(v) for v in cargs]
        ranges = L.conj(*[_range(checked, v, q.type) for v, q in zip(cargs, c.params[len(fields):])])
        psi.goal(L.implies(L.conj(here, ranges), A.Apply(sum_name(c.name), tuple(xv + cv))),
                 dict(env), f"psi:suffice:{c.name}")
        psi.goal(L.implies(L.conj(here, ranges), A.Apply(pre_name(c.name), tuple(xv + cv))),
                 dict(env), f"psi:pre:{c.name}")
    return psi.holds(config)


def _check_ring(checked, phi, config) -> bool:
    tr = ring_shape(checked)
    psi = _Psi(checked)
    formals = tr.params
    lt, st, _ = (p.type for p in formals)
    env = {"l": L.smt_sort(lt), "s": L.smt_sort(st), "r": L.smt_sort(lt), "i": L.smt_sort(st),
           "l'": L.smt_sort(lt), "s'": L.smt_sort(st), "r'": L.smt_sort(lt)}
    l, s, r, i, l2, s2, r2 = (A.Var(v) for v in env)
    rng = L.conj(_range(checked, "l", lt), _range(checked, "s", st), _range(checked, "r", lt),
                 _range(checked, "i", st))
    own = _instantiate(phi, formals, [l, s, r])
    # neighbour view: simultaneous l -> r, s -> i, r -> l
    inf = _instantiate(phi, formals, [r, i, l])
    own2 = _instantiate(phi, formals, [l2, s2, r2])
    inf2 = _instantiate(phi, formals, [r2, i, l2])
    step = A.Apply(sum_name(tr.name), (l, s, r, l2, s2, r2))
    init = A.Apply("init", (l, s, r))
    psi.goal(L.implies(L.conj(rng, init), own), env, "psi:init")
    psi.goal(L.implies(L.conj(own, inf, step), own2), env, "psi:close")
    psi.goal(L.implies(L.conj(rng, own), A.Apply("property", (l, s, r))), env, "psi:adequate")
    psi.goal(L.implies(L.conj(own, inf, step), inf2), env, "psi:interference")
    psi.goal(L.implies(L.conj(rng, own, inf), A.Apply(pre_name(tr.name), (l, s, r))), env, "psi:pre")
    return psi.holds(config)


def _check_loop(checked, phi, config) -> bool:
    ls = loop_shape(checked)
    psi = _Psi(checked)
    ctx = psi.ctx
    main = checked.program.procedure(checked.program.entry)
    env = ctx.enter(main)
    rng = L.conj(*[_range(checked, p.name, p.type) for p in ls.scope])
    guard = ls.loop.cond
    psi.goal(L.implies(rng, wlp(ls.before, phi, ctx)), env, "psi:pre")
    psi.goal(L.implies(L.conj(rng, phi, guard), wlp(ls.loop.body, phi, ctx)), env, "psi:step")
    psi.goal(L.implies(L.conj(rng, phi, L.negate(guard)), wlp(ls.after, L.TRUE, ctx)), env, "psi:post")
    return psi.holds(config)
