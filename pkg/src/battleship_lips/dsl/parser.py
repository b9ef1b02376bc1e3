"""S-expression reader for question programs."""
from __future__ import annotations

import re

from ..board import WATER, GameConfig
from .ast import BOOL, COLOR, LOCATION, NUMBER, ORIENTATION, SETNAME, App, Expr, Lambda, Lit, Var
from .primitives import PRIMITIVES, SET_NAMES


class DSLError(Exception):
    """Base class for program errors."""


class ParseError(DSLError):
    def __init__(self, message: str, pos: int = -1):
        self.pos = pos
        super().__init__(f"{message} (at offset {pos})" if pos >= 0 else message)


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_LOCATION = re.compile(r"^[1-9][A-Z]$")
_IDENT = re.compile(r"^[a-z][A-Za-z0-9_]*$")


def tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        tok = m.group(1) or m.group(2) or m.group(3)
        out.append((tok, m.start(m.lastindex)))
        pos = m.end()
    return out


def literal_kind(token: str, config: GameConfig) -> str | None:
    if token in ("TRUE", "FALSE"):
        return BOOL
    if len(token) == 1 and token.isdigit():
        return NUMBER
    if token in ("H", "V"):
        return ORIENTATION
    if token == WATER or token in config.ship_ids:
        return COLOR
    if _LOCATION.match(token):
        return LOCATION
    if token in SET_NAMES:
        return SETNAME
    return None


class _Reader:
    def __init__(self, text: str, config: GameConfig):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.config = config

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self, scope: tuple[str, ...]) -> Expr:
        tok, pos = self.next()
        if tok is None:
            raise ParseError("unexpected end of program", pos)
        if tok == ")":
            raise ParseError("unbalanced ')'", pos)
        if tok == "(":
            return self.form(pos, scope)
        return self.atom(tok, pos, scope)

    def atom(self, tok: str, pos: int, scope: tuple[str, ...]) -> Expr:
        kind = literal_kind(tok, self.config)
        if kind is not None:
            return Lit(tok, kind, pos)
        if tok in scope:
            return Var(tok, pos)
        if tok in PRIMITIVES or tok == "lambda":
            raise ParseError(f"primitive {tok!r} used as a value", pos)
        if tok.isdigit():
            raise ParseError(f"number literal {tok!r} out of range 0-9", pos)
        if _IDENT.match(tok):
            raise ParseError(f"unbound variable {tok!r}", pos)
        raise ParseError(f"unknown token {tok!r}", pos)

    def form(self, open_pos: int, scope: tuple[str, ...]) -> Expr:
        head, pos = self.next()
        if head is None:
            raise ParseError("unbalanced '(': missing ')'", open_pos)
        if head in ("(", ")"):
            raise ParseError("expected a primitive name after '('", pos)
        if head == "lambda":
            param, ppos = self.next()
            if param is None or param in ("(", ")") or not _IDENT.match(param) \
                    or param in PRIMITIVES or literal_kind(param, self.config):
                raise ParseError("lambda needs a variable name", ppos)
            body = self.expr(scope + (param,))
            tok, tpos = self.next()
            if tok is None:
                raise ParseError("unbalanced '(': missing ')'", open_pos)
            if tok != ")":
                raise ParseError("lambda takes a variable and a single body", tpos)
            return Lambda(param, body, open_pos)
        prim = PRIMITIVES.get(head)
        if prim is None:
            raise ParseError(f"unknown primitive {head!r}", pos)
        args = []
        while self.peek()[0] not in (")", None):
            args.append(self.expr(scope))
        self.close(open_pos, head, prim.arity, len(args))
        return App(head, tuple(args), open_pos)

    def close(self, open_pos: int, head: str, arity: int, got: int) -> None:
        tok, _ = self.next()
        if tok is None:
            raise ParseError("unbalanced '(': missing ')'", open_pos)
        if got != arity:
            raise ParseError(f"{head!r} takes {arity} argument(s), got {got}", open_pos)


def parse_program(text: str, config: GameConfig | None = None) -> Expr:
    """Parse one program; raises ParseError with the offending offset."""
    reader = _Reader(text, config or GameConfig())
    if not reader.tokens:
        raise ParseError("empty program", 0)
    e = reader.expr(())
    tok, pos = reader.peek()
    if tok is not None:
        raise ParseError("unbalanced ')'" if tok == ")" else "trailing input after program", pos)
    return e
