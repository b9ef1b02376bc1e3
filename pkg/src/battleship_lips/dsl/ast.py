"""Program syntax trees, type tags and structural measures."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union


class Ground(str, Enum):
    BOOLEAN = "Boolean"
    NUMBER = "Number"
    COLOR = "Color"
    ORIENTATION = "Orientation"
    LOCATION = "Location"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SetOf:
    elem: "TypeTag"

    def __str__(self) -> str:
        return f"Set({self.elem})"


@dataclass(frozen=True)
class FunctionOf:
    arg: "TypeTag"
    result: "TypeTag"

    def __str__(self) -> str:
        return f"({self.arg} -> {self.result})"


class _SetName:
    """Type of the symbolic constants AllTiles / AllColors (argument of ``set``)."""

    def __repr__(self) -> str:
        return "SetName"

    __str__ = __repr__


SET_NAME = _SetName()

TypeTag = Union[Ground, SetOf, FunctionOf, _SetName]

ANSWER_TYPES = tuple(Ground)


# Literal kinds
BOOL, NUMBER, COLOR, ORIENTATION, LOCATION, SETNAME = (
    "bool", "number", "color", "orientation", "location", "setname",
)


@dataclass(frozen=True)
class Lit:
    token: str
    kind: str
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Lambda:
    param: str
    body: "Expr"
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Expr", ...]
    pos: int = field(default=-1, compare=False, repr=False)


Expr = Union[Lit, Var, Lambda, App]


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, App):
        return e.args
    if isinstance(e, Lambda):
        return (e.body,)
    return ()


def ast_depth(e: Expr) -> int:
    """Longest root-to-leaf path, counting nodes."""
    kids = children(e)
    return 1 + (max(ast_depth(k) for k in kids) if kids else 0)


def ast_size(e: Expr) -> int:
    return 1 + sum(ast_size(k) for k in children(e))


def iter_nodes(e: Expr):
    yield e
    for k in children(e):
        yield from iter_nodes(k)


def contains_lambda(e: Expr) -> bool:
    return any(isinstance(n, Lambda) for n in iter_nodes(e))


def pretty_print(e: Expr) -> str:
    if isinstance(e, Lit):
        return e.token
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lambda):
        return f"(lambda {e.param} {pretty_print(e.body)})"
    return "(" + " ".join([e.op] + [pretty_print(a) for a in e.args]) + ")"
