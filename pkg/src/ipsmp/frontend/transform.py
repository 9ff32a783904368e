"""Program transformations: implementing partial predicates."""
from __future__ import annotations

from dataclasses import replace
from typing import Mapping, Union

from . import ast as A
from .errors import FrontendError, IllFormedImplementation, MissingImplementation
from .validate import CheckedProgram, _Checker, validate


def substitute(program: Union[A.Program, CheckedProgram], impl: Mapping[str, A.Expr]) -> A.Program:
    """Return ``P[impl]``: every partial predicate re-declared as ``return impl[p];``.

    The input program is not modified.
    """
    checked = program if isinstance(program, CheckedProgram) else validate(program)
    prog = checked.program
    partial = set(checked.partial)
    missing = sorted(partial - set(impl))
    if missing:
        raise MissingImplementation(f"no implementation given for {', '.join(missing)}")
    extra = sorted(set(impl) - partial)
    if extra:
        raise IllFormedImplementation(f"not a partial predicate: {', '.join(extra)}")
    checker = _Checker(prog)
    preds = []
    for p in prog.predicates:
        if p.name not in partial:
            preds.append(p)
            continue
        body = impl[p.name]
        params = {q.name: q.type for q in p.params}
        free = A.expr_vars(body) - set(params)
        if free:
            raise IllFormedImplementation(
                f"implementation of {p.name!r} mentions {', '.join(sorted(free))} outside its parameters")
        try:
            checker.expect_bool(body, params, f"implementation of {p.name}")
        except FrontendError as err:
            raise IllFormedImplementation(err.message, err.pos) from None
        preds.append(replace(p, body=A.Return((body,)), template=False))
    return replace(prog, predicates=tuple(preds))
