"""Verification conditions, Horn encodings and the external solver bridge."""
from .chc import ChcClause, ChcSystem, NotHorn, UnsupportedSort, emit_smtlib, horn_clauses
from .solver import (
    REALIZABLE, UNKNOWN_STATUS, UNREALIZABLE, ModelParseError, SolveResult, SolverConfig,
    SolverNotFound, Timeout, is_correct, parse_model, run_solver, solve,
)
from .wlp import WlpContext, chc_synth, loop_name, pre_name, sum_name, to_chc, wlp

__all__ = [
    "ChcClause", "ChcSystem", "NotHorn", "UnsupportedSort", "emit_smtlib", "horn_clauses",
    "REALIZABLE", "UNREALIZABLE", "UNKNOWN_STATUS", "ModelParseError", "SolveResult",
    "SolverConfig", "SolverNotFound", "Timeout", "is_correct", "parse_model", "run_solver",
    "solve", "WlpContext", "chc_synth", "loop_name", "pre_name", "sum_name", "to_chc", "wlp",
]
