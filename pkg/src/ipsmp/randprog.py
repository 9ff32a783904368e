"""Random Boolean programs and a reference interpreter, for differential testing.

Two generators live here.  :func:`random_boolean_program` builds a
:class:`BooleanProgram` directly (random relations on a small control
graph), which exercises the decision procedure on shapes no source program
would produce.  :func:`random_source_program` builds a source-level Boolean
program; :func:`interpret` runs it with a set-of-stores big-step semantics
that shares no code with the lowering, so the two can be compared.
"""
from __future__ import annotations

import random
from itertools import product
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from . import symbool as sb
from .boolcfg import FAIL, BooleanProgram, arg_slot
from .frontend import ast as A
from .symbool import Formula, Universe


# -- direct Boolean programs ------------------------------------------------------------------


def random_formula(rng: random.Random, u: Universe, names: Sequence[Tuple[str, int]], density: float = 0.5) -> Formula:
    """A uniformly random truth table over ``names``."""
    f = u.false
    for bits in product((False, True), repeat=len(names)):
        if rng.random() < density:
            cube = u.true
            for (n, c), b in zip(names, bits):
                v = u.var(n, c)
                cube = cube & (v if b else ~v)
            f = f | cube
    return f


def _random_relation(rng: random.Random, u: Universe, V: Sequence[str]) -> Formula:
    plain = sb.copies(V, sb.PLAIN)
    guard = u.true
    if V and rng.random() < 0.6:
        guard = random_formula(rng, u, rng.sample(plain, k=min(len(plain), rng.randint(1, 2))), 0.6)
    rel = guard
    for v in V:
        choice = rng.random()
        vp = u.var(v, sb.PRIMED)
        if choice < 0.55:
            rel = rel & u.keep([v])
        elif choice < 0.7:
            rel = rel & (vp if rng.random() < 0.5 else ~vp)
        elif choice < 0.85:
            src = u.var(rng.choice(V))
            rel = rel & vp.iff(src if rng.random() < 0.5 else ~src)
        # otherwise v is havocked
    return rel


def random_boolean_program(rng: random.Random, max_vars: int = 3, max_locs: int = 8, max_preds: int = 2,
                           max_pred_vars: int = 2, proc_probability: float = 0.3,
                           template_probability: float = 0.25) -> BooleanProgram:
    """A well-formed random program within the given size limits (locations include fail and predicate entries)."""
    n_preds = rng.randint(1, max_preds)
    n_g = rng.randint(1, min(max_pred_vars * n_preds, max_vars))
    n_l = rng.randint(0, max_vars - n_g)
    gv = tuple(f"g{i}" for i in range(n_g))
    lv = tuple(f"l{i}" for i in range(n_l))
    V = gv + lv
    u = Universe(list(V))
    preds = [f"p{i}" for i in range(n_preds)]
    pred_entry = {p: f"{p}@pred" for p in preds}
    pred_vars = {p: tuple(sorted(rng.sample(gv, k=rng.randint(1, min(max_pred_vars, n_g))))) for p in preds}
    templates = {}
    for p in preds:
        if rng.random() < template_probability:
            templates[p] = random_formula(rng, u, sb.copies(pred_vars[p], sb.PLAIN), 0.3)
    with_proc = rng.random() < proc_probability
    fixed = 3 + n_preds + (2 if with_proc else 0)
    budget = max(1, max_locs - fixed)
    inner = [f"main@{k}" for k in range(rng.randint(1, budget))]
    main_locs = ["main@in"] + inner + ["main@out"]
    locs = [FAIL, "main@in", "main@out"] + inner + list(pred_entry.values())
    ne = []
    pe = [("main@in", "main@out")]
    ce = []
    # a spine keeps every location on some path from the entry
    for a, b in zip(main_locs, main_locs[1:]):
        ne.append((a, _random_relation(rng, u, V), b))
    sources = [l for l in main_locs if l != "main@out"]
    for _ in range(rng.randint(0, 3)):
        a = rng.choice(sources)
        b = FAIL if rng.random() < 0.35 else rng.choice(main_locs)
        ne.append((a, _random_relation(rng, u, V), b))
    if with_proc:
        locs += ["f@in", "f@out"]
        pe.append(("f@in", "f@out"))
        ne.append(("f@in", _random_relation(rng, u, V), "f@out"))
        if rng.random() < 0.3:
            ne.append(("f@in", _random_relation(rng, u, V), FAIL))
        a = rng.choice(sources)
        ce.append((a, "f@in", rng.choice(main_locs[main_locs.index(a) + 1:])))
    fe, ae = [], []
    for p in preds:
        for kind in (fe, ae):
            if rng.random() < 0.7:
                a = rng.choice(sources)
                kind.append((a, pred_entry[p], rng.choice(main_locs)))
    if not fe and not ae:
        ae.append((rng.choice(sources), pred_entry[preds[0]], "main@out"))
    bp = BooleanProgram(
        universe=u, gv=gv, lv=lv, locs=tuple(locs), main="main@in", ne=tuple(ne), ce=tuple(ce),
        fe=tuple(fe), ae=tuple(ae), pe=tuple(pe), pred_entry=pred_entry, pred_vars=pred_vars,
        templates=templates, proc_entry={"main": "main@in", **({"f": "f@in"} if with_proc else {})},
    )
    bp.validate()
    return bp


# -- source-level Boolean programs -------------------------------------------------------------


def _rand_expr(rng: random.Random, names: Sequence[str], depth: int = 2) -> A.Expr:
    if depth == 0 or rng.random() < 0.4:
        if rng.random() < 0.15:
            return A.BoolLit(rng.random() < 0.5)
        return A.Var(rng.choice(names))
    op = rng.choice(["!", "&&", "||", "==", "!="])
    if op == "!":
        return A.Unary("!", _rand_expr(rng, names, depth - 1))
    return A.Binary(op, _rand_expr(rng, names, depth - 1), _rand_expr(rng, names, depth - 1))


def random_source_program(rng: random.Random, n_preds: int = 1, helper: bool = True,
                          max_stmts: int = 5) -> A.Program:
    """A Boolean program over ``main(bool a)`` with locals ``b, c``, predicates ``p0..`` and a helper ``h``."""
    names = ["a", "b", "c"]
    preds = [A.Predicate(f"p{i}", (A.Param("x", A.BOOL), A.Param("y", A.BOOL))[: rng.randint(1, 2)])
             for i in range(n_preds)]
    loop_ids = iter(range(1, 1000))

    def block(depth: int, scope: Sequence[str], allow_call: bool) -> A.Stmt:
        return A.seq(*[stmt(depth, scope, allow_call) for _ in range(rng.randint(1, max_stmts))])

    def stmt(depth: int, scope: Sequence[str], allow_call: bool) -> A.Stmt:
        r = rng.random()
        if r < 0.25:
            return A.Assign(rng.choice(scope), _rand_expr(rng, scope))
        if r < 0.32:
            return A.Havoc(rng.choice(scope))
        if r < 0.42:
            return A.Assume(_rand_expr(rng, scope, 1))
        if r < 0.52:
            return A.Assert(_rand_expr(rng, scope, 1))
        if r < 0.7 and preds:
            p = rng.choice(preds)
            app = A.Apply(p.name, tuple(_rand_expr(rng, scope, 0) for _ in p.params))
            return A.Assert(app) if rng.random() < 0.5 else A.Assume(app)
        if r < 0.8 and depth > 0:
            return A.If(_rand_expr(rng, scope, 1), block(depth - 1, scope, allow_call),
                        block(depth - 1, scope, allow_call) if rng.random() < 0.5 else A.Skip())
        if r < 0.88 and depth > 0:
            return A.While(_rand_expr(rng, scope, 1), block(depth - 1, scope, allow_call), next(loop_ids))
        if allow_call and helper:
            return A.Call((rng.choice(scope),), "h", (_rand_expr(rng, scope, 1),))
        return A.Assign(rng.choice(scope), _rand_expr(rng, scope))

    procs = []
    if helper:
        hscope = ["x", "t"]
        procs.append(A.Procedure("h", (A.Param("x", A.BOOL),), (A.Param("t", A.BOOL),),
                                 block(1, hscope, False), (_rand_expr(rng, hscope, 1),)))
    main = A.Procedure("main", (A.Param("a", A.BOOL),), (A.Param("b", A.BOOL), A.Param("c", A.BOOL)),
                       block(2, names, True), ())
    procs.append(main)
    return A.Program(tuple(procs), tuple(preds))


# -- reference interpreter ----------------------------------------------------------------------

Store = Tuple[Tuple[str, bool], ...]
Impl = Mapping[str, Callable[..., bool]]


class _Fail(Exception):
    pass


def _eval(e: A.Expr, env: Mapping[str, bool], impl: Impl) -> bool:
    if isinstance(e, A.BoolLit):
        return e.value
    if isinstance(e, A.Var):
        return env[e.name]
    if isinstance(e, A.Unary):
        return not _eval(e.arg, env, impl)
    if isinstance(e, A.Apply):
        return impl[e.name](*[_eval(a, env, impl) for a in e.args])
    a, b = _eval(e.lhs, env, impl), _eval(e.rhs, env, impl)
    return {"&&": a and b, "||": a or b, "==>": (not a) or b, "==": a == b, "!=": a != b}[e.op]


def _freeze(env: Mapping[str, bool]) -> Store:
    return tuple(sorted(env.items()))


class Interpreter:
    """Collecting semantics over sets of stores; assertion failure aborts with ``_Fail``."""

    def __init__(self, program: A.Program, impl: Impl, max_iterations: int = 1000):
        self.prog = program
        self.impl = dict(impl)
        self.max_iterations = max_iterations
        for pred in program.predicates:
            if pred.body is not None and pred.name not in self.impl:
                body = pred.body
                params = [p.name for p in pred.params]
                self.impl[pred.name] = self._closed(body, params)

    def _closed(self, body: A.Stmt, params: List[str]):
        def run(*vals):
            env = dict(zip(params, vals))
            return self._pred_body(body, env)
        return run

    def _pred_body(self, s: A.Stmt, env) -> bool:
        if isinstance(s, A.Return):
            return _eval(s.values[0], env, self.impl)
        if isinstance(s, A.If):
            return self._pred_body(s.then if _eval(s.cond, env, self.impl) else s.els, env)
        if isinstance(s, A.Seq):
            head = s.stmts[0]
            if isinstance(head, A.If) and _eval(head.cond, env, self.impl):
                return self._pred_body(head.then, env)
            if isinstance(head, A.If):
                rest = A.seq(*s.stmts[1:])
                return self._pred_body(A.seq(head.els, rest) if not isinstance(head.els, A.Skip) else rest, env)
            return self._pred_body(head, env)
        raise ValueError("unsupported predicate body")

    def stmt(self, s: A.Stmt, stores: FrozenSet[Store]) -> FrozenSet[Store]:
        if not stores:
            return stores
        if isinstance(s, A.Seq):
            for x in s.stmts:
                stores = self.stmt(x, stores)
            return stores
        if isinstance(s, A.Skip):
            return stores
        out = set()
        if isinstance(s, A.While):
            seen = set(stores)
            frontier = set(stores)
            exits = set()
            for _ in range(self.max_iterations):
                inside = set()
                for st in frontier:
                    (inside if _eval(s.cond, dict(st), self.impl) else exits).add(st)
                nxt = self.stmt(s.body, frozenset(inside)) - seen
                if not nxt:
                    return frozenset(exits)
                seen |= nxt
                frontier = nxt
            raise RuntimeError("loop did not stabilize")
        for st in stores:
            env = dict(st)
            if isinstance(s, A.Assign):
                env[s.var] = _eval(s.expr, env, self.impl)
                out.add(_freeze(env))
            elif isinstance(s, A.Havoc):
                for b in (False, True):
                    env[s.var] = b
                    out.add(_freeze(env))
            elif isinstance(s, A.Assume):
                if _eval(s.cond, env, self.impl):
                    out.add(st)
            elif isinstance(s, A.Assert):
                if not _eval(s.cond, env, self.impl):
                    raise _Fail()
                out.add(st)
            elif isinstance(s, A.If):
                branch = s.then if _eval(s.cond, env, self.impl) else s.els
                out |= self.stmt(branch, frozenset([st]))
            elif isinstance(s, A.Call):
                for vals in self.call(s.proc, [_eval(a, env, self.impl) for a in s.args]):
                    env2 = dict(env)
                    for v, r in zip(s.lhs, vals):
                        env2[v] = r
                    out.add(_freeze(env2))
            else:
                raise ValueError(f"cannot interpret {type(s).__name__}")
        return frozenset(out)

    def call(self, name: str, args: Sequence[bool]):
        proc = self.prog.procedure(name)
        starts = set()
        for bits in product((False, True), repeat=len(proc.locals)):
            env = {p.name: v for p, v in zip(proc.params, args)}
            env.update({p.name: b for p, b in zip(proc.locals, bits)})
            starts.add(_freeze(env))
        finals = self.stmt(proc.body, frozenset(starts))
        return {tuple(_eval(e, dict(st), self.impl) for e in proc.returns) for st in finals}

    def run(self) -> bool:
        """True when no execution of main fails an assertion."""
        main = self.prog.procedure(self.prog.entry)
        scope = main.params + main.locals
        starts = frozenset(_freeze(dict(zip([p.name for p in scope], bits)))
                           for bits in product((False, True), repeat=len(scope)))
        try:
            self.stmt(main.body, starts)
        except _Fail:
            return False
        return True


def interpret(program: A.Program, impl: Optional[Impl] = None) -> str:
    """``"Safe"`` or ``"Fails"`` under the given implementations of the partial predicates."""
    return "Safe" if Interpreter(program, impl or {}).run() else "Fails"


def table_impl(params: Sequence[str], rows: Sequence[Mapping[str, bool]]) -> Callable[..., bool]:
    """Implementation from the assignment rows the CLI prints."""
    allowed = {tuple(r[p] for p in params) for r in rows}
    return lambda *vals: tuple(vals) in allowed


def slot_formula(u: Universe, name: str, arity: int, fn: Callable[..., bool]) -> Formula:
    """Formula over a predicate's argument slots equal to ``fn`` on every input."""
    slots = [(arg_slot(name, i), sb.PLAIN) for i in range(arity)]
    f = u.false
    for bits in product((False, True), repeat=arity):
        if fn(*bits):
            f = f | u.cube({n: b for (n, _), b in zip(slots, bits)})
    return f
