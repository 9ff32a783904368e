"""Boolean programs as control-flow graphs, lowering from the AST, and an explicit-state oracle.

Conventions
-----------
* Every procedure shares the same local variables ``LV`` (the union of all
  procedure variables).  Globals ``GV`` are the parameter-passing slots:
  ``f.arg<i>`` and ``f.ret<i>`` per procedure and ``p.arg<i>`` per predicate.
* A partial predicate has an entry location but no edges.  ``pred_vars[p]``
  lists the globals its implementation may read.
* FE/AE triples are (call site, predicate entry, return site), the same
  layout as call edges.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from . import symbool as sb
from .frontend import ast as A
from .frontend.validate import CLOSED, CheckedProgram
from .symbool import Formula, Universe

FAIL = "fail"


class LoweringError(Exception):
    pass


class NonBooleanVariable(LoweringError):
    pass


class UnsupportedConstruct(LoweringError):
    pass


class BoundExceeded(RuntimeError):
    pass


Edge = Tuple[str, Formula, str]
Triple = Tuple[str, str, str]


@dataclass
class BooleanProgram:
    universe: Universe
    gv: Tuple[str, ...]
    lv: Tuple[str, ...]
    locs: Tuple[str, ...]
    main: str
    ne: Tuple[Edge, ...]
    ce: Tuple[Triple, ...] = ()
    fe: Tuple[Triple, ...] = ()
    ae: Tuple[Triple, ...] = ()
    pe: Tuple[Tuple[str, str], ...] = ()
    fail: str = FAIL
    # partial predicate name -> entry location, readable globals, template over those globals
    pred_entry: Dict[str, str] = field(default_factory=dict)
    pred_vars: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    templates: Dict[str, Formula] = field(default_factory=dict)
    proc_entry: Dict[str, str] = field(default_factory=dict)

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.gv + self.lv

    def entry_pred(self, loc: str) -> Optional[str]:
        for name, l in self.pred_entry.items():
            if l == loc:
                return name
        return None

    def template_for(self, name: str) -> Formula:
        return self.templates.get(name, self.universe.false)

    def validate(self) -> None:
        """Check the structural invariants of a Boolean program."""
        locs = set(self.locs)
        if self.main not in locs or self.fail not in locs:
            raise ValueError("main and the failure location must be locations")
        if set(self.gv) & set(self.lv):
            raise ValueError("globals and locals must be disjoint")
        for l1, rel, l2 in self.ne:
            if l1 == self.fail:
                raise ValueError("the failure location has outgoing edges")
            if l1 not in locs or l2 not in locs:
                raise ValueError(f"edge {l1}->{l2} leaves the location set")
            if any(c == sb.DOUBLE for _, c in rel.support()):
                raise ValueError("normal-edge relations may only mention V and V'")
        entries = {a for a, _ in self.pe}
        if len(entries) != len(self.pe):
            raise ValueError("each procedure has a single exit")
        for l_call, l_in, l_ret in self.ce:
            if l_in not in entries:
                raise ValueError(f"call target {l_in} is not a procedure entry")
            if l_call == self.fail:
                raise ValueError("the failure location has outgoing edges")
        preds = set(self.pred_entry.values())
        for l_call, l_in, l_ret in self.fe + self.ae:
            if l_in not in preds:
                raise ValueError(f"{l_in} is not a partial predicate entry")
            if l_call == self.fail:
                raise ValueError("the failure location has outgoing edges")
        for name, vs in self.pred_vars.items():
            if not set(vs) <= set(self.gv):
                raise ValueError(f"predicate {name} reads non-global variables")


# -- lowering ------------------------------------------------------------------


def arg_slot(callee: str, i: int) -> str:
    return f"{callee}.arg{i}"


def ret_slot(callee: str, i: int) -> str:
    return f"{callee}.ret{i}"


class _Lowerer:
    def __init__(self, checked: CheckedProgram):
        self.checked = checked
        prog = checked.program
        self.prog = prog
        for proc, scope in checked.var_types.items():
            for v, t in scope.items():
                if t != A.BOOL:
                    raise NonBooleanVariable(f"variable {v!r} of {proc} is {t}, not bool")
        for name in checked.predicates:
            for p in prog.predicate(name).params:
                if p.type != A.BOOL:
                    raise NonBooleanVariable(f"parameter {p.name!r} of predicate {name} is {p.type}")
        gv: List[str] = []
        for proc in prog.procedures:
            if proc.name != prog.entry:
                gv += [arg_slot(proc.name, i) for i in range(len(proc.params))]
            gv += [ret_slot(proc.name, i) for i in range(len(proc.returns))]
        self.partial = [n for n in checked.partial]
        for name in self.partial:
            gv += [arg_slot(name, i) for i in range(len(prog.predicate(name).params))]
        lv: List[str] = []
        for proc in prog.procedures:
            for p in proc.params + proc.locals:
                if p.name not in lv:
                    lv.append(p.name)
        clash = set(gv) & set(lv)
        if clash:
            raise UnsupportedConstruct(f"variable names clash with parameter slots: {sorted(clash)}")
        self.gv, self.lv = tuple(gv), tuple(lv)
        self.u = Universe(list(gv) + list(lv))
        self.all_vars = self.gv + self.lv
        self.ne: List[Edge] = []
        self.ce: List[Triple] = []
        self.fe: List[Triple] = []
        self.ae: List[Triple] = []
        self.pe: List[Tuple[str, str]] = []
        self.locs: List[str] = [FAIL]
        self.counter: Dict[str, int] = {}

    # expressions over the plain copy
    def expr(self, e: A.Expr) -> Formula:
        u = self.u
        if isinstance(e, A.BoolLit):
            return u.const(e.value)
        if isinstance(e, A.Var):
            return u.var(e.name)
        if isinstance(e, A.Unary) and e.op == "!":
            return ~self.expr(e.arg)
        if isinstance(e, A.Binary):
            a, b = self.expr(e.lhs), self.expr(e.rhs)
            if e.op == "&&":
                return a & b
            if e.op == "||":
                return a | b
            if e.op == "==>":
                return a.implies(b)
            if e.op == "==":
                return a.iff(b)
            if e.op == "!=":
                return a ^ b
        raise UnsupportedConstruct(f"expression not Boolean: {e!r}")

    def fresh(self, proc: str) -> str:
        k = self.counter.get(proc, 0)
        self.counter[proc] = k + 1
        loc = f"{proc}@{k}"
        self.locs.append(loc)
        return loc

    def keep_except(self, changed: Iterable[str]) -> Formula:
        changed = set(changed)
        return self.u.keep([v for v in self.all_vars if v not in changed])

    def assign_rel(self, targets: Sequence[str], values: Sequence[Formula]) -> Formula:
        rel = self.keep_except(targets)
        for t, val in zip(targets, values):
            rel = rel & self.u.var(t, sb.PRIMED).iff(val)
        return rel

    def edge(self, l1: str, rel: Formula, l2: str) -> None:
        self.ne.append((l1, rel, l2))

    def closed_pred_expr(self, app: A.Apply) -> A.Expr:
        pred = self.prog.predicate(app.name)
        body = self.checked.predicates[app.name].expr
        return A.subst_expr(body, {p.name: a for p, a in zip(pred.params, app.args)})

    def stmt(self, s: A.Stmt, l1: str, l2: str, proc: str) -> None:
        keep_all = self.u.keep(self.all_vars)
        if isinstance(s, A.Seq):
            cur = l1
            for k, x in enumerate(s.stmts):
                nxt = l2 if k == len(s.stmts) - 1 else self.fresh(proc)
                self.stmt(x, cur, nxt, proc)
                cur = nxt
        elif isinstance(s, A.Skip):
            self.edge(l1, keep_all, l2)
        elif isinstance(s, A.Assign):
            self.edge(l1, self.assign_rel([s.var], [self.expr(s.expr)]), l2)
        elif isinstance(s, A.Havoc):
            self.edge(l1, self.keep_except([s.var]), l2)
        elif isinstance(s, (A.Assume, A.Assert)):
            c = s.cond
            if isinstance(c, A.Apply) and c.name in self.checked.predicates:
                if self.checked.predicates[c.name].kind == CLOSED:
                    c = self.closed_pred_expr(c)
                else:
                    self.pred_call(s, c, l1, l2, proc)
                    return
            g = self.expr(c)
            self.edge(l1, g & keep_all, l2)
            if isinstance(s, A.Assert):
                self.edge(l1, ~g & keep_all, FAIL)
        elif isinstance(s, A.If):
            g = self.expr(s.cond)
            a, b = self.fresh(proc), self.fresh(proc)
            self.edge(l1, g & keep_all, a)
            self.edge(l1, ~g & keep_all, b)
            self.stmt(s.then, a, l2, proc)
            self.stmt(s.els, b, l2, proc)
        elif isinstance(s, A.While):
            g = self.expr(s.cond)
            head, body = self.fresh(proc), self.fresh(proc)
            self.edge(l1, keep_all, head)
            self.edge(head, g & keep_all, body)
            self.edge(head, ~g & keep_all, l2)
            self.stmt(s.body, body, head, proc)
        elif isinstance(s, A.Call):
            if s.proc == self.prog.entry:
                raise UnsupportedConstruct("calls to main are not supported in Boolean programs")
            callee = self.prog.procedure(s.proc)
            slots = [arg_slot(s.proc, i) for i in range(len(callee.params))]
            l_call, l_ret = self.fresh(proc), self.fresh(proc)
            self.edge(l1, self.assign_rel(slots, [self.expr(a) for a in s.args]), l_call)
            self.ce.append((l_call, f"{s.proc}@in", l_ret))
            rets = [self.u.var(ret_slot(s.proc, i)) for i in range(len(s.lhs))]
            self.edge(l_ret, self.assign_rel(list(s.lhs), rets), l2)
        else:
            raise UnsupportedConstruct(f"cannot lower {type(s).__name__}")

    def pred_call(self, s: A.Stmt, app: A.Apply, l1: str, l2: str, proc: str) -> None:
        slots = [arg_slot(app.name, i) for i in range(len(app.args))]
        l_call = self.fresh(proc)
        self.edge(l1, self.assign_rel(slots, [self.expr(a) for a in app.args]), l_call)
        triple = (l_call, f"{app.name}@pred", l2)
        (self.ae if isinstance(s, A.Assert) else self.fe).append(triple)

    def procedure(self, proc: A.Procedure) -> None:
        l_in, l_out = f"{proc.name}@in", f"{proc.name}@out"
        self.locs += [l_in, l_out]
        self.pe.append((l_in, l_out))
        start = l_in
        if proc.name != self.prog.entry and proc.params:
            start = self.fresh(proc.name)
            params = [p.name for p in proc.params]
            slots = [self.u.var(arg_slot(proc.name, i)) for i in range(len(params))]
            # fresh frame: locals other than the parameters are arbitrary
            rel = self.u.keep(self.gv)
            for p, slot in zip(params, slots):
                rel = rel & self.u.var(p, sb.PRIMED).iff(slot)
            self.edge(l_in, rel, start)
        if proc.returns:
            before = self.fresh(proc.name)
            self.stmt(proc.body, start, before, proc.name)
            slots = [ret_slot(proc.name, i) for i in range(len(proc.returns))]
            self.edge(before, self.assign_rel(slots, [self.expr(e) for e in proc.returns]), l_out)
        else:
            self.stmt(proc.body, start, l_out, proc.name)

    def run(self) -> BooleanProgram:
        pred_entry, pred_vars, templates = {}, {}, {}
        for name in self.partial:
            pred = self.prog.predicate(name)
            loc = f"{name}@pred"
            self.locs.append(loc)
            slots = tuple(arg_slot(name, i) for i in range(len(pred.params)))
            pred_entry[name], pred_vars[name] = loc, slots
            tmpl = A.subst_expr(self.checked.predicates[name].expr,
                                {p.name: A.Var(s) for p, s in zip(pred.params, slots)})
            templates[name] = self.expr(tmpl)
        for proc in self.prog.procedures:
            self.procedure(proc)
        bp = BooleanProgram(
            universe=self.u, gv=self.gv, lv=self.lv, locs=tuple(self.locs),
            main=f"{self.prog.entry}@in", ne=tuple(self.ne), ce=tuple(self.ce),
            fe=tuple(self.fe), ae=tuple(self.ae), pe=tuple(self.pe),
            pred_entry=pred_entry, pred_vars=pred_vars, templates=templates,
            proc_entry={p.name: f"{p.name}@in" for p in self.prog.procedures},
        )
        bp.validate()
        return bp


def lower(checked: CheckedProgram) -> BooleanProgram:
    """Lower a Boolean-typed checked program to a :class:`BooleanProgram`."""
    return _Lowerer(checked).run()


def implementation_formula(bp: BooleanProgram, checked: CheckedProgram, name: str, expr: A.Expr) -> Formula:
    """Translate an implementation over a predicate's parameters into a formula over its slots."""
    pred = checked.program.predicate(name)
    body = A.subst_expr(expr, {p.name: A.Var(s) for p, s in zip(pred.params, bp.pred_vars[name])})
    low = _Lowerer.__new__(_Lowerer)
    low.u = bp.universe
    return low.expr(body)


# -- explicit-state semantics --------------------------------------------------------


SAFE, FAILS = "Safe", "Fails"


class ExplicitModel:
    """Concrete transition tables of a Boolean program, computed once and reused across runs."""

    def __init__(self, bp: BooleanProgram):
        self.bp = bp
        self.vars = bp.variables
        self.n = len(self.vars)
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.gmask = sum(1 << self.index[v] for v in bp.gv)
        self.lmask = sum(1 << self.index[v] for v in bp.lv)
        plain = [(v, sb.PLAIN) for v in self.vars]
        primed = [(v, sb.PRIMED) for v in self.vars]
        self.succ: Dict[str, List[Tuple[Dict[int, List[int]], str]]] = {}
        for l1, rel, l2 in bp.ne:
            table: Dict[int, List[int]] = {}
            for bits in sb.iter_models(rel, plain + primed):
                s1 = _pack(bits[: self.n])
                s2 = _pack(bits[self.n:])
                table.setdefault(s1, []).append(s2)
            self.succ.setdefault(l1, []).append((table, l2))
        self.calls: Dict[str, List[Tuple[str, str]]] = {}
        for l_call, l_in, l_ret in bp.ce:
            self.calls.setdefault(l_call, []).append((l_in, l_ret))
        self.exit_of = dict(bp.pe)
        self.pred_calls: Dict[str, List[Tuple[str, str, bool]]] = {}
        entry_name = {loc: name for name, loc in bp.pred_entry.items()}
        for l_call, l_in, l_ret in bp.fe:
            self.pred_calls.setdefault(l_call, []).append((entry_name[l_in], l_ret, False))
        for l_call, l_in, l_ret in bp.ae:
            self.pred_calls.setdefault(l_call, []).append((entry_name[l_in], l_ret, True))

    def truth_table(self, name: str, impl: Formula) -> Set[int]:
        """Stores (as bit masks over the predicate's globals) on which ``impl`` holds."""
        vs = self.bp.pred_vars[name]
        out = set()
        for bits in sb.iter_models(impl, [(v, sb.PLAIN) for v in vs]):
            out.add(sum(1 << self.index[v] for v, b in zip(vs, bits) if b))
        return out

    def pred_mask(self, name: str) -> int:
        return sum(1 << self.index[v] for v in self.bp.pred_vars[name])

    def run(self, impl: Mapping[str, Formula], max_depth: int = 64) -> str:
        tables = {name: self.truth_table(name, impl[name]) for name in self.bp.pred_entry}
        masks = {name: self.pred_mask(name) for name in self.bp.pred_entry}
        return self.run_tables(tables, masks, max_depth)

    def run_tables(self, tables: Mapping[str, Set[int]], masks: Mapping[str, int], max_depth: int = 64) -> str:
        bp = self.bp
        all_stores = range(1 << self.n)
        start = [(bp.main, s, ()) for s in all_stores]
        seen = set(start)
        work = deque(start)
        local_choices = [s for s in all_stores if s & ~self.lmask == 0]
        while work:
            loc, store, stack = work.popleft()
            if loc == bp.fail:
                return FAILS
            nxt = []
            for table, l2 in self.succ.get(loc, ()):
                for s2 in table.get(store, ()):
                    nxt.append((l2, s2, stack))
            for l_in, l_ret in self.calls.get(loc, ()):
                if len(stack) >= max_depth:
                    raise BoundExceeded(f"call stack deeper than {max_depth}")
                frame = (self.exit_of[l_in], l_ret, store & self.lmask)
                g = store & self.gmask
                for loc_bits in local_choices:
                    nxt.append((l_in, g | loc_bits, stack + (frame,)))
            for name, l_ret, is_assert in self.pred_calls.get(loc, ()):
                holds = (store & masks[name]) in tables[name]
                if holds:
                    nxt.append((l_ret, store, stack))
                elif is_assert:
                    nxt.append((bp.fail, store, stack))
            if stack and loc == stack[-1][0]:
                _, l_ret, saved = stack[-1]
                nxt.append((l_ret, (store & self.gmask) | saved, stack[:-1]))
            for cfg in nxt:
                if cfg not in seen:
                    seen.add(cfg)
                    work.append(cfg)
        return SAFE


def _pack(bits: Sequence[bool]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b:
            out |= 1 << i
    return out


def explicit_run(bp: BooleanProgram, impl: Optional[Mapping[str, Formula]] = None, max_depth: int = 64) -> str:
    """Exhaustive concrete reachability; returns ``"Safe"`` or ``"Fails"``.

    ``impl`` maps each partial predicate to a formula over its globals.
    Raises :class:`BoundExceeded` when a reachable call would exceed ``max_depth`` frames.
    """
    impl = dict(impl or {})
    missing = set(bp.pred_entry) - set(impl)
    if missing:
        raise ValueError(f"no implementation for {sorted(missing)}")
    return ExplicitModel(bp).run(impl, max_depth)


# -- DOT rendering ---------------------------------------------------------------


def to_dot(bp: BooleanProgram) -> str:
    def q(s: str) -> str:
        return '"' + s.replace('"', '\\"') + '"'

    lines = ["digraph cfg {", "  node [shape=circle];"]
    for loc in bp.locs:
        shape = "doublecircle" if loc in (bp.main, bp.fail) else "circle"
        lines.append(f"  {q(loc)} [shape={shape}];")
    for k, (l1, _, l2) in enumerate(bp.ne):
        lines.append(f"  {q(l1)} -> {q(l2)} [label=\"NE{k}\"];")
    for kind, triples in (("CE", bp.ce), ("FE", bp.fe), ("AE", bp.ae)):
        for l_call, l_in, l_ret in triples:
            lines.append(f"  {q(l_call)} -> {q(l_in)} [label=\"{kind}\", style=dashed];")
            lines.append(f"  {q(l_call)} -> {q(l_ret)} [label=\"{kind}-ret\", style=dotted];")
    for l_in, l_out in bp.pe:
        lines.append(f"  {q(l_in)} -> {q(l_out)} [label=\"PE\", style=bold];")
    lines.append("}")
    return "\n".join(lines) + "\n"
