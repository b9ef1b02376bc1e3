"""Evaluate a program on every board of a hypothesis space at once.

Same semantics as :mod:`.interpreter`, over numpy arrays. Scalars become
``(n,)`` arrays of codes (colors: index into ``config.colors``; orientations:
0=H, 1=V; locations: row-major tile index). Collections become a
:class:`Coll` of ``(n, K)`` values plus a validity mask.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..board import Coord, GameConfig, HypothesisSpace, Orientation
from .ast import (
    BOOL,
    COLOR,
    LOCATION,
    NUMBER,
    ORIENTATION,
    App,
    Expr,
    Ground,
    Lambda,
    Lit,
    SetOf,
    TypeTag,
    Var,
)
from .interpreter import DomainError
from .typecheck import infer, typecheck

DEFAULT_CHUNK = 1 << 17
# Padding code for collection answer rows; never a valid element.
PAD = np.iinfo(np.int64).min

_DTYPES = {
    Ground.BOOLEAN: np.bool_,
    Ground.NUMBER: np.int64,
    Ground.COLOR: np.int8,
    Ground.ORIENTATION: np.int8,
    Ground.LOCATION: np.int16,
}


@dataclass
class Coll:
    """A batch of collections over K slots.

    ``values`` is None for the canonical domain ``0..K-1`` (a set of locations
    or colors held as a membership mask), a ``(K,)`` vector when every board
    shares the slot values, or a full ``(n, K)`` array.
    """

    values: np.ndarray | None
    mask: np.ndarray
    elem: TypeTag

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        if self.values is None:
            v = np.arange(self.width, dtype=np.int64)
        else:
            v = self.values
        return np.broadcast_to(v, self.mask.shape), self.mask

    def slot_constant(self) -> np.ndarray | None:
        if self.values is None:
            return np.arange(self.width, dtype=np.int64)
        return self.values if self.values.ndim == 1 else None


class _Batch:
    def __init__(self, space: HypothesisSpace, index: np.ndarray):
        self.space = space
        self.config: GameConfig = space.config
        self.idx = index
        self.n = len(index)
        self.err = np.zeros(self.n, dtype=bool)
        self._occ: dict[int, np.ndarray] = {}
        self._grid: np.ndarray | None = None

    # board tables ---------------------------------------------------------

    def occ(self, ship: int) -> np.ndarray:
        if ship not in self._occ:
            self._occ[ship] = self.space.occupancy_tables[ship][self.idx[:, ship]]
        return self._occ[ship]

    def grid(self) -> np.ndarray:
        if self._grid is None:
            g = np.zeros((self.n, self.config.n_tiles), dtype=np.int8)
            for s in range(len(self.config.ships)):
                g[self.occ(s)] = s + 1
            self._grid = g
        return self._grid

    def domain(self, elem: TypeTag) -> int:
        if elem == Ground.LOCATION:
            return self.config.n_tiles
        if elem == Ground.COLOR:
            return len(self.config.colors)
        raise TypeError(f"no finite domain for {elem}")

    def as_mask(self, c: Coll) -> np.ndarray:
        if c.values is None:
            return c.mask
        out = np.zeros((self.n, self.domain(c.elem)), dtype=bool)
        vals, mask = c.pairs()
        rows, cols = np.nonzero(mask)
        out[rows, vals[rows, cols]] = True
        return out

    def fail(self, where: np.ndarray) -> None:
        self.err |= where

    def per_ship(self, colors: np.ndarray, table_of, dtype) -> np.ndarray:
        """Look up a per-placement table for the ship named by ``colors``."""
        out = np.zeros(self.n, dtype=dtype)
        self.fail(colors == 0)
        for s in range(len(self.config.ships)):
            sel = colors == s + 1
            if sel.all():
                return table_of(s)[self.idx[:, s]].astype(dtype)
            if sel.any():
                out[sel] = table_of(s)[self.idx[sel, s]]
        return out

    # evaluation -----------------------------------------------------------

    def literal(self, e: Lit):
        # Constants stay 0-d and broadcast against per-board arrays.
        cfg = self.config
        if e.kind == BOOL:
            return np.array(e.token == "TRUE")
        if e.kind == NUMBER:
            return np.array(int(e.token), dtype=np.int64)
        if e.kind == COLOR:
            return np.array(cfg.color_code(e.token), dtype=np.int8)
        if e.kind == ORIENTATION:
            return np.array(0 if e.token == "H" else 1, dtype=np.int8)
        if e.kind == LOCATION:
            c = Coord.from_label(e.token)
            if not c.in_bounds(cfg):
                raise DomainError(f"location {e.token} is off the board")
            return np.array(c.index(cfg), dtype=np.int16)
        raise TypeError(f"literal {e.token} is not a value")

    def full(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(x, (self.n,))

    def eval(self, e: Expr, env: Mapping[str, tuple[np.ndarray, TypeTag]]):
        if isinstance(e, Lit):
            return self.literal(e)
        if isinstance(e, Var):
            return env[e.name][0]
        if isinstance(e, Lambda):
            raise TypeError("lambda outside map")
        op = e.op
        if op == "map":
            return self.map(e, env)
        if op == "set":
            if e.args[0].token == "AllTiles":
                return Coll(None, np.ones((self.n, self.config.n_tiles), dtype=bool), Ground.LOCATION)
            m = np.ones((self.n, len(self.config.colors)), dtype=bool)
            m[:, 0] = False
            return Coll(None, m, Ground.COLOR)
        a = [self.eval(x, env) for x in e.args]
        cfg = self.config
        if op == "and":
            return a[0] & a[1]
        if op == "or":
            return a[0] | a[1]
        if op == "not":
            return ~a[0]
        if op == "==":
            return a[0] == a[1]
        if op == ">":
            return a[0].astype(np.int64) > a[1].astype(np.int64)
        if op == "<":
            return a[0].astype(np.int64) < a[1].astype(np.int64)
        if op == "+":
            return a[0].astype(np.int64) + a[1].astype(np.int64)
        if op == "-":
            return a[0].astype(np.int64) - a[1].astype(np.int64)
        if op in ("any", "all", "++"):
            return self.reduce(op, a[0])
        if op == "setSize":
            return np.count_nonzero(a[0].mask, axis=1).astype(np.int64)
        if op == "size":
            return self.per_ship(a[0], lambda s: self.space.length_tables[s], np.int64)
        if op == "orient":
            return self.per_ship(a[0], lambda s: self.space.orientation_tables[s], np.int8)
        if op == "touch":
            return self.touch(a[0], a[1])
        if op == "rowL":
            return (a[0] // cfg.cols + 1).astype(np.int64)
        if op == "colL":
            return (a[0] % cfg.cols + 1).astype(np.int64)
        if op == "color":
            if a[0].ndim == 0:
                return self.grid()[:, int(a[0])]
            return self.grid()[np.arange(self.n), a[0]]
        if op in ("topleft", "bottomright"):
            mask = self.as_mask(a[0])
            self.fail(~mask.any(axis=1))
            if op == "topleft":
                return mask.argmax(axis=1).astype(np.int16)
            return (mask.shape[1] - 1 - mask[:, ::-1].argmax(axis=1)).astype(np.int16)
        if op == "coloredTiles":
            return Coll(None, self.colored_tiles(a[0]), Ground.LOCATION)
        if op in ("union", "intersection", "setDifference"):
            x, y = self.as_mask(a[0]), self.as_mask(a[1])
            m = x | y if op == "union" else x & y if op == "intersection" else x & ~y
            return Coll(None, m, a[0].elem)
        if op == "unique":
            return self.unique(a[0])
        raise TypeError(f"unknown primitive {op!r}")

    def reduce(self, op: str, c: Coll) -> np.ndarray:
        const = c.slot_constant()
        if const is not None:
            # Shared slot values: count members per distinct value.
            if op == "any":
                return np.count_nonzero(c.mask[:, const != 0], axis=1) > 0
            if op == "all":
                return np.count_nonzero(c.mask[:, const == 0], axis=1) == 0
            total = np.zeros(self.n, dtype=np.int64)
            for v in np.unique(const):
                if v != 0:
                    total += int(v) * np.count_nonzero(c.mask[:, const == v], axis=1)
            return total
        vals, mask = c.pairs()
        if op == "any":
            return ((vals != 0) & mask).any(axis=1)
        if op == "all":
            return ((vals != 0) | ~mask).all(axis=1)
        return np.where(mask, vals, 0).astype(np.int64).sum(axis=1)

    def colored_tiles(self, colors: np.ndarray) -> np.ndarray:
        if colors.ndim == 0:
            code = int(colors)
            return self.grid() == 0 if code == 0 else self.occ(code - 1)
        out = np.zeros((self.n, self.config.n_tiles), dtype=bool)
        for code in np.unique(colors):
            sel = colors == code
            out[sel] = (self.grid()[sel] == 0) if code == 0 else self.occ(int(code) - 1)[sel]
        return out

    def touch(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = self.full(a), self.full(b)
        out = np.zeros(self.n, dtype=bool)
        self.fail((a == 0) | (b == 0))
        n_ships = len(self.config.ships)
        for s1 in range(n_ships):
            for s2 in range(n_ships):
                if s1 == s2:
                    continue
                sel = (a == s1 + 1) & (b == s2 + 1)
                if sel.any():
                    table = self.space.touch_table(s1, s2)
                    out[sel] = table[self.idx[sel, s1], self.idx[sel, s2]]
        return out

    def unique(self, c: Coll) -> Coll:
        if c.values is None:
            return c
        if c.elem in (Ground.LOCATION, Ground.COLOR):
            return Coll(None, self.as_mask(c), c.elem)
        big = np.iinfo(np.int64).max
        vals = np.sort(np.where(c.mask, c.values, big), axis=1)
        keep = vals != big
        keep[:, 1:] &= vals[:, 1:] != vals[:, :-1]
        return Coll(np.where(keep, vals, 0), keep, c.elem)

    def map(self, e: App, env):
        fn, src_expr = e.args
        src = self.eval(src_expr, env)
        vals, mask = src.pairs()
        if not _mentions(fn.body, fn.param):
            return self._map_constant(fn, src, mask, env)
        shared = src.slot_constant()
        types = {k: t for k, (_, t) in env.items()}
        body_t = infer(fn.body, {**types, fn.param: src.elem})
        dtype = _DTYPES[src.elem]
        mask_t = np.ascontiguousarray(mask.T)
        results: list[np.ndarray | None] = []
        outer_err = self.err
        for k in range(mask.shape[1]):
            col = mask_t[k]
            if not col.any():
                results.append(None)
                continue
            self.err = np.zeros(self.n, dtype=bool)
            x = np.array(shared[k], dtype=dtype) if shared is not None else vals[:, k].astype(dtype)
            results.append(np.asarray(self.eval(fn.body, {**env, fn.param: (x, src.elem)})))
            if self.err.any():
                outer_err |= self.err & col
        self.err = outer_err
        if all(r is None or r.ndim == 0 for r in results):
            out = np.array([0 if r is None else int(r) for r in results], dtype=np.int64)
            return Coll(out, mask, body_t)
        out_t = np.zeros((mask.shape[1], self.n), dtype=np.int64)
        for k, r in enumerate(results):
            if r is not None:
                out_t[k] = r
        return Coll(out_t.T, mask, body_t)

    def _map_constant(self, fn: Lambda, src: Coll, mask: np.ndarray, env) -> Coll:
        """A body that ignores its parameter is evaluated once and broadcast to every slot."""
        types = {k: t for k, (_, t) in env.items()}
        body_t = infer(fn.body, {**types, fn.param: src.elem})
        live = mask.any(axis=1)
        outer_err = self.err
        self.err = np.zeros(self.n, dtype=bool)
        r = np.asarray(self.eval(fn.body, env))
        outer_err |= self.err & live
        self.err = outer_err
        if r.ndim == 0:
            return Coll(np.full(mask.shape[1], int(r), dtype=np.int64), mask, body_t)
        return Coll(np.repeat(r.astype(np.int64)[:, None], mask.shape[1], axis=1), mask, body_t)


@dataclass
class SpaceAnswers:
    """Per-board answers of one program over a hypothesis space."""

    keys: np.ndarray  # (N,) codes, or (N, K) rows for collection answers
    type: TypeTag
    config: GameConfig

    def decode(self, key) -> object:
        return decode_value(key, self.type, self.config)


def _scalar_decode(code: int, t: TypeTag, config: GameConfig):
    if t == Ground.BOOLEAN:
        return bool(code)
    if t == Ground.NUMBER:
        return int(code)
    if t == Ground.COLOR:
        return config.colors[int(code)]
    if t == Ground.ORIENTATION:
        return Orientation.H if int(code) == 0 else Orientation.V
    if t == Ground.LOCATION:
        return Coord.from_index(int(code), config)
    raise TypeError(f"cannot decode {t}")


def decode_value(key, t: TypeTag, config: GameConfig):
    if isinstance(t, SetOf):
        return tuple(_scalar_decode(v, t.elem, config) for v in np.asarray(key) if v != PAD)
    return _scalar_decode(key, t, config)


def _mentions(e: Expr, name: str) -> bool:
    """True if ``name`` occurs free in ``e``."""
    if isinstance(e, Var):
        return e.name == name
    if isinstance(e, Lambda):
        return e.param != name and _mentions(e.body, name)
    if isinstance(e, App):
        return any(_mentions(a, name) for a in e.args)
    return False


def _collection_keys(c: Coll) -> np.ndarray:
    """Left-justified element codes per row, padded with PAD."""
    vals, mask = c.pairs()
    order = np.argsort(~mask, axis=1, kind="stable")
    vals = np.take_along_axis(np.asarray(vals, dtype=np.int64), order, axis=1)
    mask = np.take_along_axis(mask, order, axis=1)
    return np.where(mask, vals, PAD)


def evaluate_space(expr: Expr, space: HypothesisSpace, chunk: int = DEFAULT_CHUNK) -> SpaceAnswers:
    """Answers of ``expr`` on every board of ``space``.

    Raises DomainError if the program fails on any board.
    """
    t = typecheck(expr)
    parts = []
    for start in range(0, len(space), chunk):
        batch = _Batch(space, space.index[start:start + chunk])
        v = batch.eval(expr, {})
        if batch.err.any():
            bad = start + int(np.argmax(batch.err))
            raise DomainError(f"program fails on hypothesis {bad}")
        if isinstance(v, Coll):
            parts.append(_collection_keys(v))
        else:
            parts.append(np.broadcast_to(np.asarray(v, dtype=np.int64), (batch.n,)))
    if isinstance(t, SetOf):
        width = max(p.shape[1] for p in parts)
        parts = [np.pad(p, ((0, 0), (0, width - p.shape[1])), constant_values=PAD) for p in parts]
    return SpaceAnswers(np.concatenate(parts), t, space.config)
