"""Decision procedure for predicate synthesis over Boolean programs.

The worklist engine of :mod:`ipsmp.summarize` is extended with the
call-under-assume and call-under-assert edges.  ``pi[l]`` accumulates, for
the predicate with entry ``l``, every argument vector some reachable assert
passes to it.  It is kept over the plain copy of the predicate's globals
and primed before it meets a state relation.

Besides :func:`bool_synth` this module holds two independent oracles used
by the test-suite: :func:`enumeration_oracle`, which tries every candidate
implementation against the explicit-state semantics, and
:func:`saturate`, which computes the least summary over explicit sets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Mapping, Optional, Set, Tuple

from . import symbool as sb
from .boolcfg import FAILS, SAFE, BooleanProgram, BoundExceeded, ExplicitModel
from .summarize import ReachEngine, Summary, entry_state, rule_violations
from .symbool import Formula

REALIZABLE, UNREALIZABLE = "Realizable", "Unrealizable"


@dataclass
class SynthVerdict:
    status: str
    pi: Dict[str, Formula]  # predicate name -> formula over its globals
    summary: Summary
    failure: Formula  # theta at the failure location; false when realizable

    @property
    def realizable(self) -> bool:
        return self.status == REALIZABLE


class SynthEngine(ReachEngine):
    def __init__(self, bp: BooleanProgram, templates: Optional[Mapping[str, Formula]] = None, **kw):
        self.templates = dict(bp.templates)
        self.templates.update(templates or {})
        self.fe_from: Dict[str, List] = {}
        self.ae_from: Dict[str, List] = {}
        self.sites: Dict[str, List] = {}
        for l_call, l_in, l_ret in bp.fe:
            self.fe_from.setdefault(l_call, []).append((l_in, l_ret))
            self.sites.setdefault(l_in, []).append((l_call, l_ret))
        for l_call, l_in, l_ret in bp.ae:
            self.ae_from.setdefault(l_call, []).append((l_in, l_ret))
            self.sites.setdefault(l_in, []).append((l_call, l_ret))
        self.pred_of = {loc: name for name, loc in bp.pred_entry.items()}
        super().__init__(bp, **kw)

    def init(self) -> None:
        super().init()
        u = self.u
        self.pi = {}
        for name, loc in self.bp.pred_entry.items():
            tmpl = self.templates.get(name, u.false)
            if not {n for n, _ in tmpl.support()} <= set(self.bp.pred_vars[name]):
                raise ValueError(f"template of {name} reads variables outside its globals")
            self.pi[loc] = tmpl

    def summary(self) -> Summary:
        s = super().summary()
        s.pi = dict(self.pi)
        return s

    def primed_pi(self, loc: str) -> Formula:
        return sb.rename_copy(self.pi[loc], sb.PLAIN, sb.PRIMED, self.bp.pred_vars[self.pred_of[loc]])

    def arguments(self, loc: str, s: Formula) -> Formula:
        """Values of the predicate's globals in states ``s``, over the plain copy."""
        keep = set(self.bp.pred_vars[self.pred_of[loc]])
        hidden = sb.copies(self.V, sb.PLAIN) + [(v, sb.PRIMED) for v in self.V if v not in keep]
        return sb.rename_copy(sb.elim(s, hidden), sb.PRIMED, sb.PLAIN, sorted(keep))

    def do_assumes(self, l_wk: str, s_wk: Formula) -> None:
        for l_in, l_ret in self.fe_from.get(l_wk, ()):
            self.update_reach(l_ret, s_wk & self.primed_pi(l_in))

    def do_asserts(self, l_wk: str, s_wk: Formula) -> None:
        for l_in, l_ret in self.ae_from.get(l_wk, ()):
            self.update_reach(l_ret, s_wk & self.primed_pi(l_in))
            self.update_reach(l_in, self.arguments(l_in, s_wk))

    def do_func_sum(self, l_wk: str, s_wk: Formula) -> None:
        name = self.pred_of.get(l_wk)
        if name is None:
            return
        self.pi[l_wk] = self.pi[l_wk] | s_wk
        grown = sb.rename_copy(s_wk, sb.PLAIN, sb.PRIMED, self.bp.pred_vars[name])
        for l_call, l_ret in self.sites.get(l_wk, ()):
            self.update_reach(l_ret, self.theta[l_call] & grown)

    def step(self, l_wk: str, s_wk: Formula) -> None:
        self.do_intraproc(l_wk, s_wk)
        self.do_procs(l_wk, s_wk)
        self.do_assumes(l_wk, s_wk)
        self.do_asserts(l_wk, s_wk)
        self.do_proc_sum(l_wk, s_wk)
        self.do_func_sum(l_wk, s_wk)


def bool_synth(bp: BooleanProgram, templates: Optional[Mapping[str, Formula]] = None,
               policy: str = "fifo", seed: int = 0, observer=None) -> SynthVerdict:
    """Decide the synthesis problem for ``bp``.

    ``templates`` overrides the lower bounds recorded in ``bp``; missing
    entries default to false.  On ``Realizable`` the returned implementation
    is the least one; on ``Unrealizable`` that same least implementation is
    the witness: it is forced by the asserts and still lets a failure through.
    """
    eng = SynthEngine(bp, templates, policy=policy, seed=seed, observer=observer)
    summ = eng.run()
    pi = {name: summ.pi[loc] for name, loc in bp.pred_entry.items()}
    fail = summ.theta[bp.fail]
    return SynthVerdict(REALIZABLE if fail.is_false() else UNREALIZABLE, pi, summ, fail)


def iteration_bound(bp: BooleanProgram) -> int:
    """|Locs| * 2^(2k) with k the number of program variables."""
    return len(bp.locs) * 2 ** (2 * len(bp.variables))


def partial_rule_violations(bp: BooleanProgram, summ: Summary,
                            templates: Optional[Mapping[str, Formula]] = None) -> List[str]:
    """Summary rules plus the assert/assume rules and template respect."""
    bad = rule_violations(bp, summ)
    tmpl = dict(bp.templates)
    tmpl.update(templates or {})
    pred_of = {loc: name for name, loc in bp.pred_entry.items()}

    def primed(loc):
        return sb.rename_copy(summ.pi[loc], sb.PLAIN, sb.PRIMED, bp.pred_vars[pred_of[loc]])

    for l_call, l_in, l_ret in bp.ae:
        if not summ.theta[l_call].entails(primed(l_in)):
            bad.append(f"rule3: assert at {l_call} not covered by the implementation")
        if not summ.theta[l_call].entails(summ.theta[l_ret]):
            bad.append(f"rule4: assert {l_call}->{l_ret}")
    for l_call, l_in, l_ret in bp.fe:
        if not (summ.theta[l_call] & primed(l_in)).entails(summ.theta[l_ret]):
            bad.append(f"rule5: assume {l_call}->{l_ret}")
    for name, loc in bp.pred_entry.items():
        if not tmpl.get(name, bp.universe.false).entails(summ.pi[loc]):
            bad.append(f"template: {name} does not contain its template")
    return bad


# -- oracle 1: enumerate candidate implementations ----------------------------------


def candidate_tables(model: ExplicitModel, name: str, template: Formula) -> List[Set[int]]:
    """Every truth table over the predicate's globals that contains the template."""
    vs = model.bp.pred_vars[name]
    points = []
    for bits in product((False, True), repeat=len(vs)):
        points.append(sum(1 << model.index[v] for v, b in zip(vs, bits) if b))
    forced = model.truth_table(name, template)
    free = [p for p in points if p not in forced]
    out = []
    for choice in product((False, True), repeat=len(free)):
        out.append(set(forced) | {p for p, c in zip(free, choice) if c})
    return out


def enumeration_oracle(bp: BooleanProgram, templates: Optional[Mapping[str, Formula]] = None,
                       max_depth: int = 64, max_candidates: int = 1 << 16) -> str:
    """Realizable iff some implementation containing the templates makes the program safe."""
    tmpl = dict(bp.templates)
    tmpl.update(templates or {})
    model = ExplicitModel(bp)
    names = list(bp.pred_entry)
    per_pred = [candidate_tables(model, n, tmpl.get(n, bp.universe.false)) for n in names]
    total = 1
    for c in per_pred:
        total *= len(c)
    if total > max_candidates:
        raise BoundExceeded(f"{total} candidate implementations exceed the limit {max_candidates}")
    masks = {n: model.pred_mask(n) for n in names}
    for combo in product(*per_pred):
        if model.run_tables(dict(zip(names, combo)), masks, max_depth) == SAFE:
            return REALIZABLE
    return UNREALIZABLE


# -- oracle 2: explicit rule saturation -----------------------------------------------


@dataclass
class ExplicitSummary:
    theta: Dict[str, Set[Tuple[int, int]]]
    sigma: Dict[str, Set[Tuple[int, int]]]
    pi: Dict[str, Set[int]] = field(default_factory=dict)  # predicate name -> masked stores


def saturate(bp: BooleanProgram, templates: Optional[Mapping[str, Formula]] = None) -> ExplicitSummary:
    """Least solution of the summary rules by naive iteration over explicit sets."""
    tmpl = dict(bp.templates)
    tmpl.update(templates or {})
    model = ExplicitModel(bp)
    G, L = model.gmask, model.lmask
    n = model.n
    stores = range(1 << n)
    local_parts = [s for s in stores if s & ~L == 0]
    theta: Dict[str, Set[Tuple[int, int]]] = {l: set() for l in bp.locs}
    sigma: Dict[str, Set[Tuple[int, int]]] = {l_in: set() for l_in, _ in bp.pe}
    pi = {name: set(model.truth_table(name, tmpl.get(name, bp.universe.false))) for name in bp.pred_entry}
    masks = {name: model.pred_mask(name) for name in bp.pred_entry}
    entry_name = {loc: name for name, loc in bp.pred_entry.items()}
    theta[bp.main] = {(a, b) for a in stores for b in stores}
    if bp.main in sigma:
        sigma[bp.main] = {(a & G, b & G) for a in stores for b in stores}
    changed = True
    while changed:
        changed = False

        def add(target: Set, items) -> None:
            nonlocal changed
            before = len(target)
            target.update(items)
            if len(target) != before:
                changed = True

        for l1, succs in model.succ.items():
            for table, l2 in succs:
                add(theta[l2], [(a, c) for a, b in theta[l1] for c in table.get(b, ())])
        for l_call, l_in, l_ret in bp.ce:
            gs = {b & G for _, b in theta[l_call]}
            add(theta[l_in], [(g | x, g | y) for g in gs for x in local_parts for y in local_parts])
            outs: Dict[int, List[int]] = {}
            for g, g2 in sigma[l_in]:
                outs.setdefault(g, []).append(g2)
            add(theta[l_ret], [(a, g2 | (b & L)) for a, b in theta[l_call] for g2 in outs.get(b & G, ())])
        for l_in, l_out in bp.pe:
            add(sigma[l_in], [(a & G, b & G) for a, b in theta[l_out]])
        for l_call, l_in, l_ret in bp.ae:
            name = entry_name[l_in]
            add(pi[name], [b & masks[name] for _, b in theta[l_call]])
            add(theta[l_ret], [(a, b) for a, b in theta[l_call] if b & masks[name] in pi[name]])
        for l_call, l_in, l_ret in bp.fe:
            name = entry_name[l_in]
            add(theta[l_ret], [(a, b) for a, b in theta[l_call] if b & masks[name] in pi[name]])
    return ExplicitSummary(theta, sigma, pi)


def explicit_relation(model: ExplicitModel, f: Formula, plain: List[str], primed: List[str]) -> Set[Tuple[int, int]]:
    """Convert a symbolic relation into pairs of bit masks (plain part, primed part)."""
    vars_ = [(v, sb.PLAIN) for v in plain] + [(v, sb.PRIMED) for v in primed]
    out = set()
    for bits in sb.iter_models(f, vars_):
        a = sum(1 << model.index[v] for v, b in zip(plain, bits[: len(plain)]) if b)
        c = sum(1 << model.index[v] for v, b in zip(primed, bits[len(plain):]) if b)
        out.add((a, c))
    return out


def compare_with_saturation(bp: BooleanProgram, verdict: SynthVerdict,
                            templates: Optional[Mapping[str, Formula]] = None) -> List[str]:
    """Differences between the symbolic fixpoint and the explicit least solution."""
    exp = saturate(bp, templates)
    model = ExplicitModel(bp)
    V = list(bp.variables)
    diffs = []
    pred_locs = set(bp.pred_entry.values())
    for loc in bp.locs:
        if loc in pred_locs:
            continue
        if explicit_relation(model, verdict.summary.theta[loc], V, V) != exp.theta[loc]:
            diffs.append(f"theta({loc})")
    for l_in in exp.sigma:
        got = explicit_relation(model, verdict.summary.sigma[l_in], list(bp.gv), list(bp.gv))
        if got != exp.sigma[l_in]:
            diffs.append(f"sigma({l_in})")
    for name in bp.pred_entry:
        got = {a for a, _ in explicit_relation(model, verdict.pi[name], list(bp.pred_vars[name]), [])}
        if got != exp.pi[name]:
            diffs.append(f"pi({name})")
    return diffs


def soundness_check(bp: BooleanProgram, verdict: SynthVerdict, max_depth: int = 64) -> bool:
    """Realizable: the returned implementation runs safely.  Unrealizable: failure is reachable symbolically."""
    if verdict.realizable:
        return ExplicitModel(bp).run(verdict.pi, max_depth) == SAFE
    return not verdict.failure.is_false()
