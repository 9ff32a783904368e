"""Least Boolean program summaries by symbolic worklist iteration.

Relational convention: ``theta[l]`` is a formula over ``V`` (procedure-entry
values) and ``V'`` (current values).  ``sigma[l_in]`` relates entry globals
``GV`` to exit globals ``GV'``.

A callee entry is seeded with the identity on the globals passed in,
``elim(s, V | LV')[V'/V] & keep(GV)``; without the ``keep(GV)`` conjunct
the callee would start from an arbitrary current state and its summary
would forget how outputs depend on inputs.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from . import symbool as sb
from .boolcfg import BooleanProgram
from .symbool import Formula


@dataclass
class Summary:
    theta: Dict[str, Formula]
    sigma: Dict[str, Formula]
    work: Dict[str, Formula]
    pi: Dict[str, Formula] = field(default_factory=dict)  # keyed by predicate entry location
    iterations: int = 0

    def reach(self, loc: str) -> Formula:
        return self.theta[loc]


class ReachEngine:
    """Worklist fixpoint over the normal, call and summary edges.

    ``policy`` chooses which pending location is dequeued: ``"fifo"``
    (default), ``"lifo"`` or ``"random"`` (seeded by ``seed``).  The
    result does not depend on the policy; only the iteration count does.
    """

    def __init__(self, bp: BooleanProgram, policy: str = "fifo", seed: int = 0,
                 observer: Optional[Callable[["ReachEngine"], None]] = None):
        self.bp = bp
        self.u = bp.universe
        u = self.u
        self.V = bp.variables
        self.V_plain = sb.copies(self.V, sb.PLAIN)
        self.V_primed = sb.copies(self.V, sb.PRIMED)
        self.LV_primed = sb.copies(bp.lv, sb.PRIMED)
        self.LV_both = sb.copies(bp.lv, sb.PLAIN) + self.LV_primed
        self.keep_lv_primed = u.keep(bp.lv, sb.PRIMED, sb.DOUBLE)
        self.ne_from: Dict[str, List] = {}
        for l1, rel, l2 in bp.ne:
            self.ne_from.setdefault(l1, []).append((sb.shift_up(rel), l2))
        self.ce_from: Dict[str, List] = {}
        self.ce_to: Dict[str, List] = {}
        for l_call, l_in, l_ret in bp.ce:
            self.ce_from.setdefault(l_call, []).append((l_in, l_ret))
            self.ce_to.setdefault(l_in, []).append((l_call, l_ret))
        self.pe_out: Dict[str, List[str]] = {}
        for l_in, l_out in bp.pe:
            self.pe_out.setdefault(l_out, []).append(l_in)
        self.policy = policy
        self.rng = random.Random(seed)
        self.observer = observer
        self.queue: deque = deque()
        self.init()

    # -- state --------------------------------------------------------------
    def init(self) -> None:
        u, bp = self.u, self.bp
        self.theta = {l: u.false for l in bp.locs}
        self.sigma = {l_in: u.false for l_in, _ in bp.pe}
        self.work = {l: u.false for l in bp.locs}
        self.iterations = 0
        self.theta[bp.main] = u.true
        self.work[bp.main] = u.true
        self.queue.append(bp.main)
        if bp.main in self.sigma:
            # main needs no summary constraint
            self.sigma[bp.main] = u.true

    def summary(self) -> Summary:
        return Summary(dict(self.theta), dict(self.sigma), dict(self.work), {}, self.iterations)

    # -- primitive steps -------------------------------------------------------
    def update_reach(self, loc: str, value: Formula) -> None:
        diff = value & ~self.theta[loc]
        if diff.is_false():
            return
        self.theta[loc] = self.theta[loc] | diff
        if self.work[loc].is_false():
            self.queue.append(loc)
        self.work[loc] = self.work[loc] | diff

    def post(self, s: Formula, rel_star: Formula) -> Formula:
        """``elim(s & rel_star, V')[V''/V']``."""
        img = sb.elim(s & rel_star, self.V_primed)
        return sb.rename_copy(img, sb.DOUBLE, sb.PRIMED)

    def entry_state(self, s: Formula) -> Formula:
        return entry_state(self.bp, s)

    def apply_summary(self, s: Formula, summ: Formula) -> Formula:
        x = sb.shift_up(summ) & self.keep_lv_primed
        return self.post(s, x)

    # -- rule applications -------------------------------------------------------
    def do_intraproc(self, l_wk: str, s_wk: Formula) -> None:
        for rel_star, l2 in self.ne_from.get(l_wk, ()):
            self.update_reach(l2, self.post(s_wk, rel_star))

    def do_procs(self, l_wk: str, s_wk: Formula) -> None:
        for l_in, l_ret in self.ce_from.get(l_wk, ()):
            self.update_reach(l_in, self.entry_state(s_wk))
            self.update_reach(l_ret, self.apply_summary(s_wk, self.sigma[l_in]))

    def do_proc_sum(self, l_wk: str, s_wk: Formula) -> None:
        for l_in in self.pe_out.get(l_wk, ()):
            s_sum = sb.elim(s_wk, self.LV_both) & ~self.sigma[l_in]
            if s_sum.is_false():
                continue
            self.sigma[l_in] = self.sigma[l_in] | s_sum
            for l_call, l_ret in self.ce_to.get(l_in, ()):
                self.update_reach(l_ret, self.apply_summary(self.theta[l_call], s_sum))

    def step(self, l_wk: str, s_wk: Formula) -> None:
        self.do_intraproc(l_wk, s_wk)
        self.do_procs(l_wk, s_wk)
        self.do_proc_sum(l_wk, s_wk)

    def dequeue(self) -> str:
        if self.policy == "fifo":
            return self.queue.popleft()
        if self.policy == "lifo":
            return self.queue.pop()
        k = self.rng.randrange(len(self.queue))
        loc = self.queue[k]
        del self.queue[k]
        return loc

    def run(self) -> Summary:
        while self.queue:
            l_wk = self.dequeue()
            s_wk = self.work[l_wk]
            self.work[l_wk] = self.u.false
            self.iterations += 1
            self.step(l_wk, s_wk)
            if self.observer is not None:
                self.observer(self)
        return self.summary()


def entry_state(bp: BooleanProgram, s: Formula) -> Formula:
    """Callee entry relation for call-site states ``s``."""
    g = sb.elim(s, sb.copies(bp.variables, sb.PLAIN) + sb.copies(bp.lv, sb.PRIMED))
    return sb.rename_copy(g, sb.PRIMED, sb.PLAIN, bp.gv) & bp.universe.keep(bp.gv)


def compute_bool_reach(bp: BooleanProgram, policy: str = "fifo", seed: int = 0,
                       observer=None) -> Summary:
    """Least summary of a program with no partial-predicate edges."""
    if bp.fe or bp.ae:
        raise ValueError("program has partial-predicate call edges; use boolsynth.bool_synth")
    return ReachEngine(bp, policy, seed, observer).run()


def is_safe(bp: BooleanProgram, summary: Summary) -> bool:
    return summary.theta[bp.fail].is_false()


def rule_violations(bp: BooleanProgram, summary: Summary) -> List[str]:
    """Check the summary rules as validity of implications; returns the violated ones."""
    u = bp.universe
    theta, sigma = summary.theta, summary.sigma
    bad: List[str] = []
    if bp.main in sigma and not sigma[bp.main].is_true():
        bad.append("rule2: sigma(main) is not true")
    if not theta[bp.main].is_true():
        bad.append("init: theta(main) is not true")
    for l1, rel, l2 in bp.ne:
        lhs = theta[l1] & sb.shift_up(rel)
        rhs = sb.rename_copy(theta[l2], sb.PRIMED, sb.DOUBLE)
        if not lhs.entails(rhs):
            bad.append(f"rule3: normal edge {l1}->{l2}")
    keep_lv = u.keep(bp.lv, sb.PRIMED, sb.DOUBLE)
    for l_call, l_in, l_ret in bp.ce:
        lhs = theta[l_call] & sb.shift_up(sigma[l_in]) & keep_lv
        if not lhs.entails(sb.rename_copy(theta[l_ret], sb.PRIMED, sb.DOUBLE)):
            bad.append(f"rule4: call {l_call}->{l_ret}")
        if not entry_state(bp, theta[l_call]).entails(theta[l_in]):
            bad.append(f"rule5: entry {l_call}->{l_in}")
    for l_in, l_out in bp.pe:
        if not theta[l_out].entails(sigma[l_in]):
            bad.append(f"rule6: exit {l_out}->{l_in}")
    return bad
