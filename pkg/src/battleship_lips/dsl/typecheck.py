"""Static typing of question programs."""
from __future__ import annotations

from typing import Mapping

from .ast import (
    ANSWER_TYPES,
    BOOL,
    COLOR,
    LOCATION,
    NUMBER,
    ORIENTATION,
    SET_NAME,
    SETNAME,
    App,
    Expr,
    FunctionOf,
    Ground,
    Lambda,
    Lit,
    SetOf,
    TypeTag,
    Var,
)
from .parser import DSLError

B, N, C, O, L = Ground.BOOLEAN, Ground.NUMBER, Ground.COLOR, Ground.ORIENTATION, Ground.LOCATION

_LIT_TYPES = {BOOL: B, NUMBER: N, COLOR: C, ORIENTATION: O, LOCATION: L, SETNAME: SET_NAME}

# Fixed monomorphic signatures; Number parameters also accept Boolean (0/1).
_SIGNATURES: dict[str, tuple[tuple[TypeTag, ...], TypeTag]] = {
    "and": ((B, B), B),
    "or": ((B, B), B),
    "not": ((B,), B),
    ">": ((N, N), B),
    "<": ((N, N), B),
    "any": ((SetOf(B),), B),
    "all": ((SetOf(B),), B),
    "touch": ((C, C), B),
    "+": ((N, N), N),
    "-": ((N, N), N),
    "size": ((C,), N),
    "rowL": ((L,), N),
    "colL": ((L,), N),
    "color": ((L,), C),
    "orient": ((C,), O),
    "topleft": ((SetOf(L),), L),
    "bottomright": ((SetOf(L),), L),
    "coloredTiles": ((C,), SetOf(L)),
}

_NUMERIC_ARGS = {">", "<", "+", "-"}
_SET_ALGEBRA = {"union", "intersection", "setDifference"}


class TypeCheckError(DSLError):
    def __init__(self, message: str, pos: int = -1):
        self.pos = pos
        super().__init__(f"{message} (at offset {pos})" if pos >= 0 else message)


def _accepts(expected: TypeTag, got: TypeTag, numeric: bool) -> bool:
    if expected == got:
        return True
    return numeric and expected == N and got == B


def infer(e: Expr, env: Mapping[str, TypeTag] | None = None) -> TypeTag:
    """Principal type of ``e`` under variable typing ``env``."""
    env = env or {}
    if isinstance(e, Lit):
        return _LIT_TYPES[e.kind]
    if isinstance(e, Var):
        if e.name not in env:
            raise TypeCheckError(f"unbound variable {e.name!r}", e.pos)
        return env[e.name]
    if isinstance(e, Lambda):
        raise TypeCheckError("lambda is only allowed as the first argument of map", e.pos)
    op, args = e.op, e.args

    if op == "map":
        fn, src = args
        src_t = infer(src, env)
        if not isinstance(src_t, SetOf):
            raise TypeCheckError(f"map expects a set, got {src_t}", src.pos)
        if not isinstance(fn, Lambda):
            raise TypeCheckError("map expects a lambda as its first argument", fn.pos)
        body_t = infer(fn.body, {**env, fn.param: src_t.elem})
        if not isinstance(body_t, Ground):
            raise TypeCheckError(f"map body must have a ground type, got {body_t}", fn.body.pos)
        return SetOf(body_t)

    types = [infer(a, env) for a in args]

    if op in _SIGNATURES:
        params, result = _SIGNATURES[op]
        for a, want, got in zip(args, params, types):
            if not _accepts(want, got, op in _NUMERIC_ARGS):
                raise TypeCheckError(f"{op!r} expects {want}, got {got}", a.pos)
        return result
    if op == "==":
        a, b = types
        if not isinstance(a, Ground) or not isinstance(b, Ground):
            raise TypeCheckError(f"'==' compares ground values, got {a} and {b}", e.pos)
        if a != b:
            raise TypeCheckError(f"'==' operands differ in type: {a} vs {b}", e.pos)
        return B
    if op == "++":
        (t,) = types
        if t not in (SetOf(N), SetOf(B)):
            raise TypeCheckError(f"'++' expects a set of numbers, got {t}", args[0].pos)
        return N
    if op == "setSize":
        (t,) = types
        if not isinstance(t, SetOf):
            raise TypeCheckError(f"'setSize' expects a set, got {t}", args[0].pos)
        return N
    if op == "unique":
        (t,) = types
        if not isinstance(t, SetOf):
            raise TypeCheckError(f"'unique' expects a set, got {t}", args[0].pos)
        return t
    if op in _SET_ALGEBRA:
        a, b = types
        if not isinstance(a, SetOf) or a != b or a.elem not in (L, C):
            raise TypeCheckError(f"{op!r} expects two location sets or two color sets, got {a} and {b}", e.pos)
        return a
    if op == "set":
        (arg,) = args
        if not (isinstance(arg, Lit) and arg.kind == SETNAME):
            raise TypeCheckError("'set' expects AllTiles or AllColors", arg.pos)
        return SetOf(L) if arg.token == "AllTiles" else SetOf(C)
    raise TypeCheckError(f"unknown primitive {op!r}", e.pos)


def typecheck(e: Expr) -> TypeTag:
    """Type of a top-level program; naked lambdas and bare set names are rejected."""
    t = infer(e)
    if isinstance(t, FunctionOf) or t is SET_NAME:
        raise TypeCheckError(f"top-level program has non-answer type {t}", e.pos)
    return t


def top_level_type(e: Expr) -> Ground:
    """Question-type label: one of the five ground answer types."""
    t = typecheck(e)
    if t not in ANSWER_TYPES:
        raise TypeCheckError(f"untypeable question: top-level type {t} is not an answer type", e.pos)
    return t
