"""Lexer and recursive-descent parser for ``.imp`` sources.

Concrete syntax, in brief::

    enum Lock { Free, Left, Right };
    pred Post(int x, int y);                     // partial predicate
    pred Pos(int x) { return x > 0; }            // closed predicate
    PRED_TEMPLATE pred Inv(int m, int v) {       // template with one hole
        if (m == 0 && v == 0) { return true; }
        return synth();
    }
    main(int y) {
        int x; bool b;
        x = 0; b = *;
        while (x < y) { x = x + 1; }
        assert(Post(x, y));
        r1, r2 = f(x, y);
        return;
    }

Loops are labelled with the line of their ``while`` keyword unless written
``while@7 (...)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import ast as A
from .errors import DuplicateDeclaration, ParseError

KEYWORDS = {
    "while", "if", "else", "assume", "assert", "skip", "return", "true", "false",
    "pred", "PRED_TEMPLATE", "enum", "int", "bool", "synth",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==>|==|!=|<=|>=|&&|\|\||[-+*<>=!(){};,@])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int

    @property
    def pos(self) -> Tuple[int, int]:
        return (self.line, self.col)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i, line, line_start = 0, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", (line, i - line_start + 1))
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ident" and chunk in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, i - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = i + chunk.rindex("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


# binary operator precedence, loosest first
_LEVELS: List[Tuple[str, ...]] = [
    ("==>",),
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*",),
]


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.enum_values: Dict[str, Tuple[int, str]] = {}
        self.type_names = {A.INT, A.BOOL}

    # -- token helpers ----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def eat(self, text: Optional[str] = None, kind: Optional[str] = None) -> Token:
        t = self.tok
        if text is not None and not (t.text == text and t.kind in ("op", "kw")):
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)
        if kind is not None and t.kind != kind:
            raise ParseError(f"expected {kind}, found {t.text or 'end of input'!r}", t.pos)
        self.i += 1
        return t

    def ident(self) -> Token:
        return self.eat(kind="ident")

    # -- top level ----------------------------------------------------------
    def program(self) -> A.Program:
        procs: List[A.Procedure] = []
        preds: List[A.Predicate] = []
        enums: List[A.Enum] = []
        seen: Dict[str, Tuple[int, int]] = {}

        def declare(name: str, pos):
            if name in seen:
                raise DuplicateDeclaration(f"{name!r} already declared at line {seen[name][0]}", pos)
            seen[name] = pos

        while self.tok.kind != "eof":
            if self.at("enum"):
                e = self.enum_decl()
                declare(e.name, e.pos)
                for m in e.members:
                    declare(m, e.pos)
                enums.append(e)
            elif self.at("pred") or self.at("PRED_TEMPLATE"):
                p = self.pred_decl()
                declare(p.name, p.pos)
                preds.append(p)
            else:
                p = self.proc_decl()
                declare(p.name, p.pos)
                procs.append(p)
        return A.Program(tuple(procs), tuple(preds), tuple(enums))

    def enum_decl(self) -> A.Enum:
        start = self.eat("enum")
        name = self.ident().text
        self.eat("{")
        members = [self.ident().text]
        while self.at(","):
            self.eat(",")
            members.append(self.ident().text)
        self.eat("}")
        self.eat(";")
        for k, m in enumerate(members):
            self.enum_values[m] = (k, name)
        self.type_names.add(name)
        return A.Enum(name, tuple(members), start.pos)

    def params(self) -> Tuple[A.Param, ...]:
        self.eat("(")
        out: List[A.Param] = []
        if not self.at(")"):
            out.append(self.param())
            while self.at(","):
                self.eat(",")
                out.append(self.param())
        self.eat(")")
        names = [p.name for p in out]
        for k, n in enumerate(names):
            if n in names[:k]:
                raise DuplicateDeclaration(f"parameter {n!r} declared twice", out[k].pos)
        return tuple(out)

    def param(self) -> A.Param:
        t = self.tok
        if self.is_type_token(t) and self.peek().kind == "ident":
            self.i += 1
            name = self.ident()
            return A.Param(name.text, t.text, name.pos)
        name = self.ident()
        return A.Param(name.text, A.INT, name.pos)

    def is_type_token(self, t: Token) -> bool:
        return t.text in self.type_names and t.kind in ("kw", "ident")

    def pred_decl(self) -> A.Predicate:
        template = False
        start = self.tok
        if self.at("PRED_TEMPLATE"):
            self.eat("PRED_TEMPLATE")
            template = True
        self.eat("pred")
        name = self.ident()
        params = self.params()
        if self.at(";"):
            self.eat(";")
            return A.Predicate(name.text, params, None, template, start.pos)
        body = self.block()
        return A.Predicate(name.text, params, body, template, start.pos)

    def proc_decl(self) -> A.Procedure:
        name = self.ident()
        params = self.params()
        self.eat("{")
        self.locals: List[A.Param] = []
        stmts = self.stmt_list()
        self.eat("}")
        returns: Tuple[A.Expr, ...] = ()
        if stmts and isinstance(stmts[-1], A.Return):
            returns = stmts[-1].values
            stmts = stmts[:-1]
        local_decls = tuple(self.locals)
        names = [p.name for p in params] + [p.name for p in local_decls]
        for k, n in enumerate(names):
            if n in names[:k]:
                pos = local_decls[k - len(params)].pos if k >= len(params) else None
                raise DuplicateDeclaration(f"variable {n!r} declared twice in {name.text}", pos)
        return A.Procedure(name.text, params, local_decls, A.seq(*stmts), returns, name.pos)

    # -- statements ---------------------------------------------------------------
    def block(self) -> A.Stmt:
        self.eat("{")
        stmts = self.stmt_list()
        self.eat("}")
        return A.seq(*stmts) if not (len(stmts) == 1 and isinstance(stmts[0], (A.Return, A.Synth))) else stmts[0]

    def stmt_list(self) -> List[A.Stmt]:
        out: List[A.Stmt] = []
        while not self.at("}") and self.tok.kind != "eof":
            s = self.stmt()
            if s is not None:
                out.append(s)
        return out

    def stmt(self) -> Optional[A.Stmt]:
        t = self.tok
        if self.is_type_token(t) and self.peek().kind == "ident":
            return self.local_decl()
        if self.at("skip"):
            self.eat("skip")
            self.eat(";")
            return A.Skip(t.pos)
        if self.at(";"):
            self.eat(";")
            return None
        if self.at("assume") or self.at("assert"):
            self.i += 1
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            self.eat(";")
            return A.Assume(cond, t.pos) if t.text == "assume" else A.Assert(cond, t.pos)
        if self.at("while"):
            self.eat("while")
            loop_id = t.line
            if self.at("@"):
                self.eat("@")
                loop_id = int(self.eat(kind="int").text)
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            body = self.block()
            return A.While(cond, body, loop_id, t.pos)
        if self.at("if"):
            self.eat("if")
            self.eat("(")
            cond = self.expr()
            self.eat(")")
            then = self.block()
            els: A.Stmt = A.Skip()
            if self.at("else"):
                self.eat("else")
                if self.at("if"):
                    els = self.stmt()
                else:
                    els = self.block()
            return A.If(cond, then, els, t.pos)
        if self.at("return"):
            self.eat("return")
            if self.at("synth"):
                self.eat("synth")
                self.eat("(")
                self.eat(")")
                self.eat(";")
                return A.Synth(t.pos)
            values: List[A.Expr] = []
            if not self.at(";"):
                values.append(self.expr())
                while self.at(","):
                    self.eat(",")
                    values.append(self.expr())
            self.eat(";")
            return A.Return(tuple(values), t.pos)
        if t.kind == "ident":
            return self.assignment_or_call()
        raise ParseError(f"unexpected {t.text or 'end of input'!r} at start of statement", t.pos)

    def local_decl(self) -> Optional[A.Stmt]:
        typ = self.tok.text
        self.i += 1
        inits: List[A.Stmt] = []
        while True:
            name = self.ident()
            self.locals.append(A.Param(name.text, typ, name.pos))
            if self.at("="):
                self.eat("=")
                if self.at("*"):
                    self.eat("*")
                    inits.append(A.Havoc(name.text, name.pos))
                else:
                    inits.append(A.Assign(name.text, self.expr(), name.pos))
            if not self.at(","):
                break
            self.eat(",")
        self.eat(";")
        if not inits:
            return None
        return A.seq(*inits)

    def assignment_or_call(self) -> A.Stmt:
        first = self.ident()
        if self.at("("):
            args = self.call_args()
            self.eat(";")
            return A.Call((), first.text, args, first.pos)
        lhs = [first.text]
        while self.at(","):
            self.eat(",")
            lhs.append(self.ident().text)
        self.eat("=")
        if self.at("*") and len(lhs) == 1:
            self.eat("*")
            self.eat(";")
            return A.Havoc(first.text, first.pos)
        if self.tok.kind == "ident" and self.peek().text == "(" and self.tok.text not in self.enum_values:
            callee = self.ident()
            args = self.call_args()
            self.eat(";")
            return A.Call(tuple(lhs), callee.text, args, first.pos)
        if len(lhs) != 1:
            raise ParseError("multiple assignment targets require a procedure call", first.pos)
        value = self.expr()
        self.eat(";")
        return A.Assign(first.text, value, first.pos)

    def call_args(self) -> Tuple[A.Expr, ...]:
        self.eat("(")
        args: List[A.Expr] = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.eat(",")
                args.append(self.expr())
        self.eat(")")
        return tuple(args)

    # -- expressions ------------------------------------------------------------
    def expr(self, level: int = 0) -> A.Expr:
        if level == len(_LEVELS):
            return self.unary()
        ops = _LEVELS[level]
        lhs = self.expr(level + 1)
        if ops == ("==>",):
            if self.tok.kind == "op" and self.tok.text == "==>":
                t = self.eat()
                rhs = self.expr(level)  # right associative
                return A.Binary("==>", lhs, rhs, t.pos)
            return lhs
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.eat()
            rhs = self.expr(level + 1)
            lhs = A.Binary(t.text, lhs, rhs, t.pos)
        return lhs

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("!", "-"):
            self.eat()
            arg = self.unary()
            if t.text == "-" and isinstance(arg, A.IntLit) and arg.label is None:
                return A.IntLit(-arg.value, None, t.pos)
            return A.Unary(t.text, arg, t.pos)
        return self.primary()

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.eat()
            return A.IntLit(int(t.text), None, t.pos)
        if self.at("true") or self.at("false"):
            self.eat()
            return A.BoolLit(t.text == "true", t.pos)
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "ident":
            self.eat()
            if t.text in self.enum_values:
                value, _ = self.enum_values[t.text]
                return A.IntLit(value, t.text, t.pos)
            if self.at("("):
                return A.Apply(t.text, self.call_args(), t.pos)
            return A.Var(t.text, t.pos)
        raise ParseError(f"unexpected {t.text or 'end of input'!r} in expression", t.pos)


def parse(text: str) -> A.Program:
    """Parse ``.imp`` source text into a :class:`Program`."""
    return Parser(text).program()


def parse_expr(text: str, enums: Tuple[A.Enum, ...] = ()) -> A.Expr:
    p = Parser(text)
    for e in enums:
        p.type_names.add(e.name)
        for k, m in enumerate(e.members):
            p.enum_values[m] = (k, e.name)
    e = p.expr()
    if p.tok.kind != "eof":
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.pos)
    return e
