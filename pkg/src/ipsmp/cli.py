"""Command-line front end: ``ipsmp <subcommand> ...``.

Exit codes: 0 realizable or valid, 1 unrealizable or failing, 2 unknown,
3 usage or input error.  Output never contains timings, so repeated runs
are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import reductions as R
from . import symbool as sb
from .boolcfg import LoweringError, lower, to_dot
from .boolsynth import REALIZABLE, bool_synth
from .frontend import FrontendError, load, parse, to_json
from .frontend.printer import expr_text
from .summarize import compute_bool_reach, is_safe
from .vcgen import NotHorn, UnsupportedSort, chc_synth, emit_smtlib
from .vcgen.solver import (
    SAT, UNKNOWN_STATUS, UNREALIZABLE, UNSAT, ModelParseError, SolverConfig, SolverNotFound, is_correct, solve,
)

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3
STATUS_EXIT = {REALIZABLE: EXIT_OK, UNREALIZABLE: EXIT_NO, UNKNOWN_STATUS: EXIT_UNKNOWN}


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _load(path: str, require_main: bool = True):
    return load(_read(path), require_main)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _solver_config(args) -> SolverConfig:
    extra = tuple(shlex.split(args.solver_args)) if args.solver_args is not None else None
    return SolverConfig(path=args.solver, args=extra, timeout=args.timeout)


# -- Boolean rendering ------------------------------------------------------------------------


def _rows(f: sb.Formula, variables) -> List[Dict[str, bool]]:
    return sb.sat_assignments(f, variables)


def _pred_rows(bp, checked, name: str, f: sb.Formula) -> List[Dict[str, bool]]:
    slots = bp.pred_vars[name]
    params = [p.name for p in checked.program.predicate(name).params]
    rows = _rows(f, sb.copies(slots, sb.PLAIN))
    return [{p: row[s] for p, s in zip(params, slots)} for row in rows]


def _summary_json(bp, summ) -> dict:
    both = sb.copies(bp.variables, sb.PLAIN) + sb.copies(bp.variables, sb.PRIMED)
    return {
        "theta": {loc: _rows(summ.theta[loc], both) for loc in bp.locs},
        "sigma": {loc: _rows(f, both) for loc, f in sorted(summ.sigma.items())},
    }


# -- subcommands ----------------------------------------------------------------------------


def cmd_check(args, out) -> int:
    text = _read(args.file)
    if args.dump_ast:
        out.write(_dump(to_json(parse(text))))
    checked = load(text, require_main=not args.library)
    if args.dump_cfg or args.dump_summary:
        bp = lower(checked)
        if args.dump_cfg:
            out.write(to_dot(bp))
        if args.dump_summary:
            out.write(_dump(_summary_json(bp, compute_bool_reach(bp))))
    if args.verify:
        if checked.partial:
            raise UsageError("--verify needs a program without partial predicates")
        answer = is_correct(checked, _solver_config(args))
        out.write(f"{args.file}: {'correct' if answer == SAT else 'incorrect' if answer == UNSAT else 'unknown'}\n")
        return {SAT: EXIT_OK, UNSAT: EXIT_NO}.get(answer, EXIT_UNKNOWN)
    if not (args.dump_ast or args.dump_cfg or args.dump_summary):
        out.write(f"{args.file}: ok\n")
    return EXIT_OK


def cmd_boolsynth(args, out) -> int:
    checked = _load(args.file)
    bp = lower(checked)
    verdict = bool_synth(bp, policy=args.policy, seed=args.seed)
    report = {
        "status": verdict.status,
        "predicates": {name: _pred_rows(bp, checked, name, f) for name, f in sorted(verdict.pi.items())},
        "iterations": verdict.summary.iterations,
    }
    if not verdict.realizable:
        # states reaching the failure location, over the current copy
        states = sb.rename_copy(sb.elim(verdict.failure, sb.copies(bp.variables, sb.PLAIN)), sb.PRIMED, sb.PLAIN)
        report["failure"] = _rows(states, sb.copies(bp.variables, sb.PLAIN))
    if not checked.partial:
        report["safe"] = is_safe(bp, verdict.summary)
    if args.dump_summary:
        report["summary"] = _summary_json(bp, verdict.summary)
    out.write(_dump(report))
    return STATUS_EXIT[verdict.status]


def cmd_emit(args, out) -> int:
    checked = _load(args.file)
    out.write(emit_smtlib(chc_synth(checked)))
    return EXIT_OK


def _solve_report(result) -> dict:
    report = {"status": result.status,
              "predicates": {n: expr_text(e) for n, e in sorted(result.predicates.items())}}
    if result.reason:
        report["reason"] = result.reason
    return report


def cmd_solve(args, out) -> int:
    checked = _load(args.file)
    result = solve(checked, _solver_config(args))
    if args.format == "text":
        out.write(f"{result.status}\n")
        for n, e in sorted(result.predicates.items()):
            out.write(f"{n} := {expr_text(e)}\n")
    else:
        out.write(_dump(_solve_report(result)))
    return STATUS_EXIT[result.status]


def _shape(path: Optional[str], checked) -> tuple:
    if path is None:
        return ()
    try:
        items = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if not isinstance(items, list):
        raise UsageError(f"{path}: a shape is a JSON list")
    return R.parse_shape(items, checked.program.enums)


def cmd_reduce(args, out) -> int:
    checked = _load(args.file, require_main=args.kind == R.LOOP)
    inst = R.reduce(args.kind, checked, _shape(args.shape, checked))
    text = inst.text()
    load(text)  # the generated program must pass the checker
    if args.output in (None, "-"):
        out.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    return EXIT_OK


# -- corpus regression ------------------------------------------------------------------------


def run_entry(directory: Path, entry: dict, config: SolverConfig) -> dict:
    """Run one manifest entry; returns the observed status and whether it matched."""
    path = directory / entry["file"]
    mode = entry.get("mode", "solve")
    kind = entry.get("kind")
    expect = entry["expect"]
    row = {"file": entry["file"], "mode": mode, "expect": expect}
    if kind:
        row["kind"] = kind
    if entry.get("shape"):
        row["shape"] = entry["shape"]
    try:
        checked = load(path.read_text(encoding="utf-8"), require_main=kind in (None, R.LOOP))
        if mode == "boolsynth":
            status = bool_synth(lower(checked)).status
            valid = None
        else:
            shape = ()
            if entry.get("shape"):
                shape = R.parse_shape(json.loads((directory / entry["shape"]).read_text(encoding="utf-8")),
                                      checked.program.enums)
            target = checked
            inst = None
            if kind:
                inst = R.reduce(kind, checked, shape)
                target = load(inst.text())
            result = solve(target, config)
            status = result.status
            valid = None
            if entry.get("check_solution") and status == REALIZABLE:
                if inst is None:
                    valid = R.check_solution(R.PROGRAM, checked, result.predicates, config)
                else:
                    valid = R.check_solution(kind, checked, R.invariant_formula(inst, result.predicates),
                                             config, shape)
    except (FrontendError, LoweringError, R.ShapeMismatch, NotHorn, UnsupportedSort, ModelParseError,
            OSError) as exc:
        status, valid = "Error", None
        row["error"] = str(exc)
    row["status"] = status
    if valid is not None:
        row["valid"] = valid
    row["pass"] = status == expect and valid is not False
    return row


def cmd_corpus(args, out) -> int:
    directory = Path(args.dir)
    manifest = directory / "manifest.json"
    try:
        entries = json.loads(manifest.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{manifest}: {exc}") from None
    config = _solver_config(args)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda e: run_entry(directory, e, config), entries))
    passed = sum(r["pass"] for r in rows)
    if args.format == "json":
        out.write(_dump({"entries": rows, "passed": passed, "total": len(rows)}))
    else:
        for r in rows:
            tag = "PASS" if r["pass"] else "FAIL"
            extra = "" if "valid" not in r else f" valid={str(r['valid']).lower()}"
            how = ", ".join([r["mode"]] + [r[k] for k in ("kind", "shape") if k in r])
            out.write(f"{tag} {r['file']} [{how}] expected {r['expect']}, got {r['status']}{extra}\n")
        out.write(f"{passed}/{len(rows)} passed\n")
    return EXIT_OK if passed == len(rows) else EXIT_NO


# -- argument parsing ------------------------------------------------------------------------


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", help="HORN solver executable (default: z3 on PATH)")
    p.add_argument("--solver-args", help="arguments for the solver, replacing the defaults")
    p.add_argument("--timeout", type=float, default=120.0, help="seconds per solver call")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipsmp", description="Predicate synthesis modulo programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a program")
    p.add_argument("file")
    p.add_argument("--dump-ast", action="store_true", help="print the AST as JSON")
    p.add_argument("--dump-cfg", action="store_true", help="print the Boolean CFG in DOT")
    p.add_argument("--dump-summary", action="store_true", help="print the reachability summary")
    p.add_argument("--library", action="store_true", help="accept inputs without main")
    p.add_argument("--verify", action="store_true", help="verify a closed program with the solver")
    _solver_flags(p)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("boolsynth", help="decide synthesis for a Boolean program")
    p.add_argument("file")
    p.add_argument("--policy", choices=("fifo", "lifo", "random"), default="fifo")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-summary", action="store_true")
    p.set_defaults(run=cmd_boolsynth)

    p = sub.add_parser("emit", help="print the Horn clauses as SMT-LIB")
    p.add_argument("file")
    p.set_defaults(run=cmd_emit)

    p = sub.add_parser("solve", help="synthesize through an external HORN solver")
    p.add_argument("file")
    p.add_argument("--format", choices=("json", "text"), default="json")
    _solver_flags(p)
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("reduce", help="encode an invariant problem as a synthesis instance")
    p.add_argument("file")
    p.add_argument("--kind", choices=R.KINDS, required=True)
    p.add_argument("--shape", help="JSON list of {guard, name, args}")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(run=cmd_reduce)

    p = sub.add_parser("corpus", help="run a corpus directory against its manifest.json")
    p.add_argument("dir")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--jobs", type=int, default=1)
    _solver_flags(p)
    p.set_defaults(run=cmd_corpus)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.run(args, out)
    except UsageError as exc:
        print(f"ipsmp: {exc}", file=sys.stderr)
    except FrontendError as exc:
        print(f"{getattr(args, 'file', '')}:{exc}", file=sys.stderr)
    except (LoweringError, R.ShapeMismatch, NotHorn, UnsupportedSort, ModelParseError, SolverNotFound) as exc:
        print(f"ipsmp: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
