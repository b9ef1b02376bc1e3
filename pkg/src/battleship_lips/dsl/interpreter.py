"""Reference interpreter: evaluates a program against one complete board.

Values are plain Python objects: ``bool``, ``int``, color names (``str``),
:class:`Orientation`, :class:`Coord`, tuples for collections and
:class:`Closure` for lambdas. Sets are duplicate-free and canonically
ordered; ``map`` results keep repeats (see ``unique``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..board import WATER, Coord, FullBoard, Orientation
from .ast import BOOL, COLOR, LOCATION, NUMBER, ORIENTATION, SETNAME, App, Expr, Lambda, Lit, Var
from .parser import DSLError

Value = Any


class DomainError(DSLError):
    """Runtime failure of a partial primitive (e.g. topleft of an empty set)."""


@dataclass(frozen=True)
class Closure:
    param: str
    body: Expr
    env: tuple[tuple[str, Any], ...]


def literal_value(lit: Lit, board: FullBoard) -> Value:
    tok, kind = lit.token, lit.kind
    if kind == BOOL:
        return tok == "TRUE"
    if kind == NUMBER:
        return int(tok)
    if kind == COLOR:
        return tok
    if kind == ORIENTATION:
        return Orientation(tok)
    if kind == LOCATION:
        c = Coord.from_label(tok)
        if not c.in_bounds(board.config):
            raise DomainError(f"location {tok} is off the board")
        return c
    if kind == SETNAME:
        return tok
    raise DSLError(f"bad literal {tok!r}")


def _num(v: Value) -> int:
    return int(v)


def _color_key(board: FullBoard):
    order = {c: i for i, c in enumerate(board.config.colors)}
    return order.__getitem__


def _canon(items, board: FullBoard) -> tuple:
    """Deduplicate and order a collection canonically."""
    items = list(dict.fromkeys(items))
    if not items:
        return ()
    first = items[0]
    # Orientation subclasses str, so it must be tested before colors.
    if isinstance(first, Orientation):
        return tuple(sorted(items, key=lambda o: o.value))
    if isinstance(first, str):
        return tuple(sorted(items, key=_color_key(board)))
    return tuple(sorted(items))


def _ship(board: FullBoard, color: str):
    if color == WATER:
        raise DomainError("Water is not a ship")
    return board.placement(color)


def _touch(board: FullBoard, a: str, b: str) -> bool:
    pa, pb = _ship(board, a), _ship(board, b)
    if a == b:
        return False
    cells_b = set(pb.coords())
    for c in pa.coords():
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if Coord(c.row + dr, c.col + dc) in cells_b:
                return True
    return False


def evaluate(e: Expr, board: FullBoard, env: Mapping[str, Value] | None = None) -> Value:
    """Denotation of ``e`` on ``board``; raises DomainError for partial primitives."""
    env = env or {}
    if isinstance(e, Lit):
        return literal_value(e, board)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Lambda):
        return Closure(e.param, e.body, tuple(env.items()))
    assert isinstance(e, App)
    op = e.op
    if op == "map":
        fn = evaluate(e.args[0], board, env)
        src = evaluate(e.args[1], board, env)
        base = dict(fn.env)
        return tuple(evaluate(fn.body, board, {**base, fn.param: x}) for x in src)
    if op == "set":
        name = e.args[0].token
        if name == "AllTiles":
            return tuple(board.config.coords())
        return board.config.ship_ids
    args = [evaluate(a, board, env) for a in e.args]
    if op == "and":
        return bool(args[0] and args[1])
    if op == "or":
        return bool(args[0] or args[1])
    if op == "not":
        return not args[0]
    if op == "==":
        return args[0] == args[1]
    if op == ">":
        return _num(args[0]) > _num(args[1])
    if op == "<":
        return _num(args[0]) < _num(args[1])
    if op == "any":
        return any(args[0])
    if op == "all":
        return all(args[0])
    if op == "touch":
        return _touch(board, args[0], args[1])
    if op == "+":
        return _num(args[0]) + _num(args[1])
    if op == "-":
        return _num(args[0]) - _num(args[1])
    if op == "++":
        return sum(_num(x) for x in args[0])
    if op == "size":
        return _ship(board, args[0]).length
    if op == "rowL":
        return args[0].row
    if op == "colL":
        return args[0].col
    if op == "setSize":
        return len(args[0])
    if op == "color":
        return board.color_at(args[0])
    if op == "orient":
        return _ship(board, args[0]).orientation
    if op in ("topleft", "bottomright"):
        if not args[0]:
            raise DomainError(f"{op} of an empty set")
        return min(args[0]) if op == "topleft" else max(args[0])
    if op == "coloredTiles":
        color = args[0]
        if color == WATER:
            return tuple(c for c in board.config.coords() if board.color_at(c) == WATER)
        return tuple(sorted(board.placement(color).coords()))
    if op == "union":
        return _canon(args[0] + args[1], board)
    if op == "intersection":
        other = set(args[1])
        return _canon([x for x in args[0] if x in other], board)
    if op == "setDifference":
        other = set(args[1])
        return _canon([x for x in args[0] if x not in other], board)
    if op == "unique":
        return _canon(args[0], board)
    raise DSLError(f"unknown primitive {op!r}")
