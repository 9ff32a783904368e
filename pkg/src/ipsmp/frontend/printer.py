"""Pretty-printer producing concrete syntax that parses back to the same AST."""
from __future__ import annotations

from typing import List

from . import ast as A

_PREC = {"==>": 0, "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5, "*": 6}


def expr_text(e: A.Expr, ctx: int = -1) -> str:
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.IntLit):
        if e.label is not None:
            return e.label
        return str(e.value) if e.value >= 0 or ctx < 0 else f"({e.value})"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Apply):
        return f"{e.name}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        inner = expr_text(e.arg, 7)
        if e.op == "-" and inner.startswith("-"):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        if e.op == "==>":
            text = f"{expr_text(e.lhs, p + 1)} ==> {expr_text(e.rhs, p)}"
        else:
            text = f"{expr_text(e.lhs, p)} {e.op} {expr_text(e.rhs, p + 1)}"
        return f"({text})" if p < ctx else text
    raise TypeError(f"not an expression: {e!r}")


def _block(s: A.Stmt, indent: int) -> List[str]:
    return ["{"] + _stmt_lines(s, indent + 1) + ["    " * indent + "}"]


def _stmt_lines(s: A.Stmt, indent: int) -> List[str]:
    pad = "    " * indent
    if isinstance(s, A.Seq):
        out: List[str] = []
        for x in s.stmts:
            out.extend(_stmt_lines(x, indent))
        return out
    if isinstance(s, A.Skip):
        return [pad + "skip;"]
    if isinstance(s, A.Assign):
        return [pad + f"{s.var} = {expr_text(s.expr)};"]
    if isinstance(s, A.Havoc):
        return [pad + f"{s.var} = *;"]
    if isinstance(s, A.Assume):
        return [pad + f"assume({expr_text(s.cond)});"]
    if isinstance(s, A.Assert):
        return [pad + f"assert({expr_text(s.cond)});"]
    if isinstance(s, A.Return):
        vals = ", ".join(expr_text(v) for v in s.values)
        return [pad + (f"return {vals};" if vals else "return;")]
    if isinstance(s, A.Synth):
        return [pad + "return synth();"]
    if isinstance(s, A.Call):
        call = f"{s.proc}({', '.join(expr_text(a) for a in s.args)});"
        return [pad + (f"{', '.join(s.lhs)} = {call}" if s.lhs else call)]
    if isinstance(s, A.While):
        head = pad + f"while@{s.loop_id} ({expr_text(s.cond)}) "
        body = _block(s.body, indent)
        return [head + body[0]] + body[1:]
    if isinstance(s, A.If):
        then = _block(s.then, indent)
        lines = [pad + f"if ({expr_text(s.cond)}) " + then[0]] + then[1:]
        if isinstance(s.els, A.If):
            chain = _stmt_lines(s.els, indent)
            lines[-1] += " else " + chain[0].lstrip()
            lines += chain[1:]
        elif not isinstance(s.els, A.Skip):
            els = _block(s.els, indent)
            lines[-1] += " else " + els[0]
            lines += els[1:]
        return lines
    raise TypeError(f"not a statement: {s!r}")


def _params(params) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in params)


def program_text(program: A.Program) -> str:
    out: List[str] = []
    for e in program.enums:
        out.append(f"enum {e.name} {{ {', '.join(e.members)} }};")
    if program.enums:
        out.append("")
    for p in program.predicates:
        head = ("PRED_TEMPLATE " if p.template else "") + f"pred {p.name}({_params(p.params)})"
        if p.body is None:
            out.append(head + ";")
        else:
            body = _block(p.body, 0)
            out.append(head + " " + body[0])
            out.extend(body[1:])
        out.append("")
    for proc in program.procedures:
        out.append(f"{proc.name}({_params(proc.params)}) {{")
        groups: List[list] = []
        for v in proc.locals:
            if groups and groups[-1][0] == v.type:
                groups[-1][1].append(v.name)
            else:
                groups.append([v.type, [v.name]])
        for t, names in groups:
            out.append(f"    {t} {', '.join(names)};")
        if not isinstance(proc.body, A.Skip):
            out.extend(_stmt_lines(proc.body, 1))
        if proc.returns:
            out.append(f"    return {', '.join(expr_text(v) for v in proc.returns)};")
        out.append("}")
        out.append("")
    return "\n".join(out).rstrip() + "\n"
