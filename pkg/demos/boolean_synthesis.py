"""Deciding synthesis for a Boolean program, then breaking it.

Runs without an external solver.
"""
from pathlib import Path

from ipsmp import symbool as sb
from ipsmp.boolcfg import explicit_run, lower
from ipsmp.boolsynth import bool_synth, enumeration_oracle
from ipsmp.frontend import load_file

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# %% A loop post-condition over Booleans: x and i toggle together until i == y.
checked = load_file(CORPUS / "loop_post_bool.imp")
bp = lower(checked)
print(f"{len(bp.locs)} locations, globals {bp.gv}, locals {bp.lv}")

# %% The symbolic fixpoint returns the least implementation of Post.
verdict = bool_synth(bp)
slots = sb.copies(bp.pred_vars["Post"], sb.PLAIN)
print(verdict.status, "after", verdict.summary.iterations, "iterations")
print("Post holds on", sb.sat_assignments(verdict.pi["Post"], slots))

# %% That implementation really makes the program safe, and brute force agrees.
print("explicit run:", explicit_run(bp, verdict.pi))
print("enumeration oracle:", enumeration_oracle(bp))

# %% Without the x update no implementation works; the least one is the witness.
broken = lower(load_file(CORPUS / "loop_post_bool_fault.imp"))
witness = bool_synth(broken)
print(witness.status, "witness Post =", sb.sat_assignments(witness.pi["Post"], slots))
print("failure reachable:", not witness.failure.is_false())
