"""Boards, game configuration, renderings and hypothesis-space enumeration."""
from __future__ import annotations

import json
import string
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

WATER = "Water"
HIDDEN_SYMBOL = "H"
WATER_SYMBOL = "W"
COLUMN_LETTERS = string.ascii_uppercase

# Combination chunk for the vectorised enumeration; bounds peak memory.
_COMBINE_CHUNK = 4096


class BoardError(ValueError):
    """Malformed board, config or board document."""


class ConfigError(BoardError):
    pass


class InconsistentBoardError(BoardError):
    """No complete board agrees with the revealed tiles."""


class Orientation(str, Enum):
    H = "H"
    V = "V"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ShipSpec:
    id: str
    lengths: tuple[int, ...] = (2, 3, 4)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengths", tuple(sorted(set(int(n) for n in self.lengths))))
        if not self.lengths:
            raise ConfigError(f"ship {self.id!r} has no allowed lengths")


DEFAULT_SHIPS = (ShipSpec("Red"), ShipSpec("Blue"), ShipSpec("Purple"))


@dataclass(frozen=True)
class GameConfig:
    """Board dimensions and the ships that may be hidden on it.

    Ship lengths are chosen independently per ship unless ``distinct_lengths``
    is set, in which case no two ships share a length.
    """

    rows: int = 6
    cols: int = 6
    ships: tuple[ShipSpec, ...] = DEFAULT_SHIPS
    distinct_lengths: bool = False

    def __post_init__(self) -> None:
        ships = tuple(s if isinstance(s, ShipSpec) else ShipSpec(*s) for s in self.ships)
        object.__setattr__(self, "ships", ships)
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be >= 1")
        if self.cols > len(COLUMN_LETTERS):
            raise ConfigError(f"at most {len(COLUMN_LETTERS)} columns are labelable")
        ids = [s.id for s in ships]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"ship ids must be distinct: {ids}")
        if WATER in ids:
            raise ConfigError("'Water' is reserved")
        longest = max(self.rows, self.cols)
        for s in ships:
            if min(s.lengths) < 2 or max(s.lengths) > longest:
                raise ConfigError(f"ship {s.id!r}: lengths must lie in [2, {longest}]")
        symbols = [s.id[:1].upper() for s in ships]
        if len(set(symbols)) != len(symbols) or {HIDDEN_SYMBOL, WATER_SYMBOL} & set(symbols):
            raise ConfigError(f"ship ids need distinct initials other than H/W: {ids}")

    @property
    def ship_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.ships)

    @property
    def colors(self) -> tuple[str, ...]:
        """Tile colors in declaration order; Water first (code 0)."""
        return (WATER,) + self.ship_ids

    @property
    def n_tiles(self) -> int:
        return self.rows * self.cols

    def color_code(self, color: str) -> int:
        try:
            return self.colors.index(color)
        except ValueError:
            raise BoardError(f"unknown color {color!r}") from None

    def symbol(self, color: str | None) -> str:
        if color is None:
            return HIDDEN_SYMBOL
        if color == WATER:
            return WATER_SYMBOL
        self.color_code(color)
        return color[:1].upper()

    def color_for_symbol(self, symbol: str) -> str | None:
        if symbol == HIDDEN_SYMBOL:
            return None
        if symbol == WATER_SYMBOL:
            return WATER
        for ship_id in self.ship_ids:
            if ship_id[:1].upper() == symbol:
                return ship_id
        raise BoardError(f"bad board symbol {symbol!r}")

    def coords(self) -> Iterator["Coord"]:
        for r in range(1, self.rows + 1):
            for c in range(1, self.cols + 1):
                yield Coord(r, c)

    def to_dict(self) -> dict:
        d = {
            "rows": self.rows,
            "cols": self.cols,
            "ships": [{"id": s.id, "lengths": list(s.lengths)} for s in self.ships],
        }
        if self.distinct_lengths:
            d["distinct_lengths"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        ships = d.get("ships")
        ships = DEFAULT_SHIPS if ships is None else tuple(
            ShipSpec(s["id"], tuple(s.get("lengths", (2, 3, 4)))) for s in ships
        )
        return cls(int(d.get("rows", 6)), int(d.get("cols", 6)), ships, bool(d.get("distinct_lengths", False)))


@dataclass(frozen=True, order=True)
class Coord:
    """A 1-based tile position; label ``2C`` is row 2, column C."""

    row: int
    col: int

    @property
    def label(self) -> str:
        return f"{self.row}{COLUMN_LETTERS[self.col - 1]}"

    @classmethod
    def from_label(cls, label: str) -> "Coord":
        label = label.strip()
        if len(label) < 2 or not label[:-1].isdigit() or label[-1] not in COLUMN_LETTERS:
            raise BoardError(f"bad location label {label!r}")
        return cls(int(label[:-1]), COLUMN_LETTERS.index(label[-1]) + 1)

    def in_bounds(self, config: GameConfig) -> bool:
        return 1 <= self.row <= config.rows and 1 <= self.col <= config.cols

    def index(self, config: GameConfig) -> int:
        """Row-major tile index (0-based)."""
        return (self.row - 1) * config.cols + (self.col - 1)

    @classmethod
    def from_index(cls, index: int, config: GameConfig) -> "Coord":
        return cls(index // config.cols + 1, index % config.cols + 1)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True, order=True)
class Placement:
    """One ship's position: top-left origin, orientation and length."""

    row: int
    col: int
    orientation: Orientation
    length: int

    def coords(self) -> tuple[Coord, ...]:
        if self.orientation is Orientation.H:
            return tuple(Coord(self.row, self.col + i) for i in range(self.length))
        return tuple(Coord(self.row + i, self.col) for i in range(self.length))

    def fits(self, config: GameConfig) -> bool:
        return all(c.in_bounds(config) for c in self.coords())


def _check_grid_shape(config: GameConfig, tiles) -> None:
    if len(tiles) != config.rows or any(len(row) != config.cols for row in tiles):
        raise BoardError(f"tile grid does not match {config.rows}x{config.cols} config")


@dataclass(frozen=True)
class PartialBoard:
    """Observed board: each tile is a color, or None when hidden."""

    config: GameConfig
    tiles: tuple[tuple[str | None, ...], ...]

    def __post_init__(self) -> None:
        tiles = tuple(tuple(row) for row in self.tiles)
        object.__setattr__(self, "tiles", tiles)
        _check_grid_shape(self.config, tiles)
        allowed = set(self.config.colors) | {None}
        for row in tiles:
            for t in row:
                if t not in allowed:
                    raise BoardError(f"unknown tile value {t!r}")

    @classmethod
    def hidden(cls, config: GameConfig | None = None) -> "PartialBoard":
        config = config or GameConfig()
        return cls(config, tuple((None,) * config.cols for _ in range(config.rows)))

    @classmethod
    def from_grid(cls, rows: Sequence[str], config: GameConfig | None = None) -> "PartialBoard":
        config = config or GameConfig()
        if len(rows) != config.rows:
            raise BoardError(f"expected {config.rows} grid rows, got {len(rows)}")
        tiles = []
        for i, row in enumerate(rows, start=1):
            if len(row) != config.cols:
                raise BoardError(f"grid row {i} has {len(row)} symbols, expected {config.cols}")
            tiles.append(tuple(config.color_for_symbol(ch) for ch in row))
        return cls(config, tuple(tiles))

    def to_grid(self) -> list[str]:
        return ["".join(self.config.symbol(t) for t in row) for row in self.tiles]

    def tile(self, coord: Coord) -> str | None:
        return self.tiles[coord.row - 1][coord.col - 1]

    def revealed(self) -> Iterator[tuple[Coord, str]]:
        """Revealed tiles in row-major order."""
        for r, row in enumerate(self.tiles, start=1):
            for c, t in enumerate(row, start=1):
                if t is not None:
                    yield Coord(r, c), t

    def reveal(self, coord: Coord, color: str) -> "PartialBoard":
        tiles = [list(row) for row in self.tiles]
        tiles[coord.row - 1][coord.col - 1] = color
        return PartialBoard(self.config, tuple(tuple(r) for r in tiles))


@dataclass(frozen=True)
class FullBoard:
    """A complete hypothesis: one placement per ship, Water elsewhere."""

    config: GameConfig
    placements: tuple[Placement, ...]

    def __post_init__(self) -> None:
        placements = tuple(self.placements)
        object.__setattr__(self, "placements", placements)
        if len(placements) != len(self.config.ships):
            raise BoardError("need exactly one placement per ship")
        seen: set[Coord] = set()
        for spec, p in zip(self.config.ships, placements):
            if p.length not in spec.lengths:
                raise BoardError(f"ship {spec.id} cannot have length {p.length}")
            if not p.fits(self.config):
                raise BoardError(f"ship {spec.id} leaves the board")
            cells = set(p.coords())
            if cells & seen:
                raise BoardError("ships overlap")
            seen |= cells
        if self.config.distinct_lengths and len({p.length for p in placements}) != len(placements):
            raise BoardError("ship lengths must be distinct under this config")

    @cached_property
    def tiles(self) -> tuple[tuple[str, ...], ...]:
        grid = [[WATER] * self.config.cols for _ in range(self.config.rows)]
        for ship_id, p in zip(self.config.ship_ids, self.placements):
            for c in p.coords():
                grid[c.row - 1][c.col - 1] = ship_id
        return tuple(tuple(row) for row in grid)

    def color_at(self, coord: Coord) -> str:
        return self.tiles[coord.row - 1][coord.col - 1]

    def placement(self, ship_id: str) -> Placement:
        return self.placements[self.config.ship_ids.index(ship_id)]

    def as_partial(self) -> PartialBoard:
        return PartialBoard(self.config, self.tiles)


def is_consistent(full: FullBoard, partial: PartialBoard) -> bool:
    """True iff every revealed tile of ``partial`` matches ``full``."""
    if full.config != partial.config:
        raise BoardError("config mismatch between boards")
    return all(full.color_at(coord) == color for coord, color in partial.revealed())


# --------------------------------------------------------------------------
# Renderings and the board document format


def render_grid(board: PartialBoard) -> str:
    cfg = board.config
    if cfg.rows > 9 or cfg.cols > 26:
        raise ConfigError("unrenderable config: grid rendering supports at most 9 rows and 26 columns")
    lines = ["  " + " ".join(COLUMN_LETTERS[: cfg.cols])]
    for r, row in enumerate(board.tiles, start=1):
        lines.append(f"{r} " + " ".join(cfg.symbol(t) for t in row))
    return "".join(line + "\n" for line in lines)


def render_textual(board: PartialBoard) -> str:
    out = []
    for coord, color in board.revealed():
        where = f"{coord.row}-{COLUMN_LETTERS[coord.col - 1]}"
        if color == WATER:
            out.append(f"{where} is a water tile.\n")
        else:
            out.append(f"{where} is a {color.lower()} ship tile.\n")
    return "".join(out)


def board_to_dict(board: PartialBoard) -> dict:
    d = board.config.to_dict()
    d["grid"] = board.to_grid()
    return d


def dump_board(board: PartialBoard) -> str:
    return json.dumps(board_to_dict(board), indent=2) + "\n"


def parse_board(text: str, check_consistent: bool = True) -> PartialBoard:
    """Load a board document (JSON with rows/cols/ships/grid)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BoardError(f"board document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "grid" not in doc:
        raise BoardError("board document needs a 'grid' field")
    config = GameConfig.from_dict(doc)
    grid = doc["grid"]
    if not isinstance(grid, list) or not all(isinstance(r, str) for r in grid):
        raise BoardError("'grid' must be a list of strings")
    board = PartialBoard.from_grid(grid, config)
    if check_consistent and not has_consistent_board(board):
        raise InconsistentBoardError("inconsistent board: no placement of the ships matches the revealed tiles")
    return board


def load_board(path) -> PartialBoard:
    with open(path, encoding="utf-8") as fh:
        return parse_board(fh.read())


# --------------------------------------------------------------------------
# Placement tables and enumeration


def ship_placements(config: GameConfig, ship_index: int) -> tuple[Placement, ...]:
    """All in-bounds placements of one ship, sorted (row, col, orientation, length)."""
    spec = config.ships[ship_index]
    out = []
    for r in range(1, config.rows + 1):
        for c in range(1, config.cols + 1):
            for o in (Orientation.H, Orientation.V):
                for n in spec.lengths:
                    p = Placement(r, c, o, n)
                    if p.fits(config):
                        out.append(p)
    return tuple(out)


def _placement_bits(p: Placement, config: GameConfig) -> int:
    bits = 0
    for c in p.coords():
        bits |= 1 << c.index(config)
    return bits


def _to_words(bits: Sequence[int], n_words: int) -> np.ndarray:
    out = np.zeros((len(bits), n_words), dtype=np.uint64)
    for i, b in enumerate(bits):
        for w in range(n_words):
            out[i, w] = (b >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


def _board_bits(board: PartialBoard) -> tuple[int, dict[str, int]]:
    """Bitmask of hidden tiles, and of revealed tiles per color."""
    cfg = board.config
    hidden = 0
    by_color = {c: 0 for c in cfg.colors}
    for coord in cfg.coords():
        t = board.tile(coord)
        bit = 1 << coord.index(cfg)
        if t is None:
            hidden |= bit
        else:
            by_color[t] |= bit
    return hidden, by_color


def _candidate_placements(board: PartialBoard) -> list[list[int]]:
    """Per ship, indices of placements compatible with the revealed tiles."""
    cfg = board.config
    hidden, by_color = _board_bits(board)
    out = []
    for s, ship_id in enumerate(cfg.ship_ids):
        own = by_color[ship_id]
        allowed = hidden | own
        keep = []
        for i, p in enumerate(ship_placements(cfg, s)):
            bits = _placement_bits(p, cfg)
            if bits & ~allowed == 0 and own & ~bits == 0:
                keep.append(i)
        out.append(keep)
    return out


def has_consistent_board(board: PartialBoard) -> bool:
    """Depth-first existence check; much cheaper than full enumeration."""
    cfg = board.config
    cands = _candidate_placements(board)
    tables = [ship_placements(cfg, s) for s in range(len(cfg.ships))]
    bits = [[(_placement_bits(tables[s][i], cfg), tables[s][i].length) for i in cands[s]]
            for s in range(len(cfg.ships))]

    def search(s: int, used: int, lengths: frozenset) -> bool:
        if s == len(bits):
            return True
        for b, n in bits[s]:
            if b & used:
                continue
            if cfg.distinct_lengths and n in lengths:
                continue
            if search(s + 1, used | b, lengths | {n}):
                return True
        return False

    return search(0, 0, frozenset())


class HypothesisSpace:
    """Weighted set of complete boards, stored as per-ship placement indices.

    ``index[n, s]`` selects board n's placement of ship s from
    ``placements[s]``. Boards are materialised lazily; the numeric tables
    (occupancy, lengths, orientations) drive vectorised evaluation.
    """

    def __init__(
        self,
        config: GameConfig,
        placements: Sequence[Sequence[Placement]],
        index: np.ndarray,
        weights: np.ndarray | None = None,
    ):
        self.config = config
        self.placements = tuple(tuple(p) for p in placements)
        self.index = np.ascontiguousarray(index, dtype=np.int32).reshape(-1, len(config.ships))
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != (len(self.index),):
                raise ValueError("one weight per board required")
            if (weights < 0).any():
                raise ValueError("weights must be nonnegative")
            total = weights.sum()
            if not total > 0:
                raise ValueError("weights must not all be zero")
            weights = weights / total
        self._weights = weights

    def __len__(self) -> int:
        return len(self.index)

    def __repr__(self) -> str:
        return f"HypothesisSpace({self.config.rows}x{self.config.cols}, {len(self)} boards)"

    @property
    def is_uniform(self) -> bool:
        return self._weights is None

    @property
    def weights(self) -> np.ndarray:
        if self._weights is None:
            return np.full(len(self), 1.0 / len(self)) if len(self) else np.zeros(0)
        return self._weights

    def board(self, i: int) -> FullBoard:
        return FullBoard(self.config, tuple(self.placements[s][j] for s, j in enumerate(self.index[i])))

    @cached_property
    def boards(self) -> tuple[FullBoard, ...]:
        return tuple(self.board(i) for i in range(len(self)))

    def __iter__(self) -> Iterator[FullBoard]:
        for i in range(len(self)):
            yield self.board(i)

    def subset(self, keep: np.ndarray) -> "HypothesisSpace":
        """Boards selected by a boolean mask or index array, renormalised."""
        keep = np.asarray(keep)
        idx = self.index[keep]
        w = None if self._weights is None else self._weights[keep]
        return HypothesisSpace(self.config, self.placements, idx, w)

    # numeric tables -------------------------------------------------------

    @cached_property
    def occupancy_tables(self) -> tuple[np.ndarray, ...]:
        """Per ship, a (placements, tiles) boolean table of covered tiles."""
        cfg = self.config
        out = []
        for plist in self.placements:
            t = np.zeros((len(plist), cfg.n_tiles), dtype=bool)
            for i, p in enumerate(plist):
                for c in p.coords():
                    t[i, c.index(cfg)] = True
            out.append(t)
        return tuple(out)

    @cached_property
    def length_tables(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array([p.length for p in plist], dtype=np.int64) for plist in self.placements)

    @cached_property
    def orientation_tables(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.array([0 if p.orientation is Orientation.H else 1 for p in plist], dtype=np.int8)
            for plist in self.placements
        )

    @cached_property
    def _touch_tables(self) -> dict[tuple[int, int], np.ndarray]:
        return {}

    def touch_table(self, a: int, b: int) -> np.ndarray:
        """(P_a, P_b) table: do the two placements share an edge."""
        key = (a, b)
        cache = self._touch_tables
        if key not in cache:
            cfg = self.config
            occ_a = self.occupancy_tables[a].reshape(-1, cfg.rows, cfg.cols)
            nb = np.zeros_like(occ_a)
            nb[:, 1:, :] |= occ_a[:, :-1, :]
            nb[:, :-1, :] |= occ_a[:, 1:, :]
            nb[:, :, 1:] |= occ_a[:, :, :-1]
            nb[:, :, :-1] |= occ_a[:, :, 1:]
            nb = nb.reshape(len(occ_a), -1).astype(np.int32)
            occ_b = self.occupancy_tables[b].astype(np.int32)
            cache[key] = (nb @ occ_b.T) > 0
        return cache[key]

    @classmethod
    def from_boards(cls, boards: Sequence[FullBoard], weights: Sequence[float] | None = None) -> "HypothesisSpace":
        """Build a space from explicit boards (duplicates are rejected)."""
        if not boards:
            raise InconsistentBoardError("inconsistent board: empty hypothesis space")
        config = boards[0].config
        n_ships = len(config.ships)
        tables = [sorted({b.placements[s] for b in boards}) for s in range(n_ships)]
        lookup = [{p: i for i, p in enumerate(t)} for t in tables]
        index = np.array([[lookup[s][b.placements[s]] for s in range(n_ships)] for b in boards], dtype=np.int32)
        if len({tuple(r) for r in index.tolist()}) != len(index):
            raise ValueError("hypothesis boards must be distinct")
        return cls(config, tables, index, None if weights is None else np.asarray(weights, dtype=float))


def enumerate_hypotheses(board: PartialBoard) -> HypothesisSpace:
    """Every complete board consistent with ``board``, uniformly weighted.

    Boards are ordered lexicographically by their per-ship placement tuples.
    """
    cfg = board.config
    n_words = (cfg.n_tiles + 63) // 64
    cands = _candidate_placements(board)
    tables = [ship_placements(cfg, s) for s in range(len(cfg.ships))]
    idx = np.zeros((1, 0), dtype=np.int32)
    used = np.zeros((1, n_words), dtype=np.uint64)
    lens = np.zeros((1, 0), dtype=np.int64)
    for s, keep in enumerate(cands):
        keep = np.asarray(keep, dtype=np.int32)
        masks = _to_words([_placement_bits(tables[s][i], cfg) for i in keep], n_words)
        plens = np.array([tables[s][i].length for i in keep], dtype=np.int64)
        parts_idx, parts_used, parts_lens = [], [], []
        for start in range(0, len(idx), _COMBINE_CHUNK):
            u = used[start:start + _COMBINE_CHUNK]
            ok = ((u[:, None, :] & masks[None, :, :]) == 0).all(axis=2)
            if cfg.distinct_lengths and lens.shape[1]:
                l = lens[start:start + _COMBINE_CHUNK]
                ok &= ~(l[:, :, None] == plens[None, None, :]).any(axis=1)
            rows, cols = np.nonzero(ok)
            rows += start
            parts_idx.append(np.concatenate([idx[rows], keep[cols][:, None]], axis=1))
            parts_used.append(used[rows] | masks[cols])
            parts_lens.append(np.concatenate([lens[rows], plens[cols][:, None]], axis=1))
        if parts_idx:
            idx = np.concatenate(parts_idx)
            used = np.concatenate(parts_used)
            lens = np.concatenate(parts_lens)
        else:
            idx = np.zeros((0, s + 1), dtype=np.int32)
        if len(idx) == 0:
            raise InconsistentBoardError("inconsistent board: no complete board matches the revealed tiles")
    return HypothesisSpace(cfg, tables, idx)


# --------------------------------------------------------------------------
# Random boards (tests and experiment scripts)


def sample_full_board(config: GameConfig, rng: np.random.Generator, max_tries: int = 100_000) -> FullBoard:
    """Rejection-sample a valid complete board."""
    tables = [ship_placements(config, s) for s in range(len(config.ships))]
    for _ in range(max_tries):
        chosen = tuple(t[rng.integers(len(t))] for t in tables)
        try:
            return FullBoard(config, chosen)
        except BoardError:
            continue
    if not has_consistent_board(PartialBoard.hidden(config)):
        raise ConfigError("no complete board exists for this config")
    raise BoardError(f"no valid board found in {max_tries} draws")


def sample_partial_board(
    config: GameConfig, rng: np.random.Generator, n_reveal: int, truth: FullBoard | None = None
) -> tuple[PartialBoard, FullBoard]:
    """Reveal ``n_reveal`` random tiles of a (random) complete board."""
    truth = truth or sample_full_board(config, rng)
    coords = list(config.coords())
    picks = rng.choice(len(coords), size=min(n_reveal, len(coords)), replace=False)
    board = PartialBoard.hidden(config)
    for i in sorted(picks):
        board = board.reveal(coords[i], truth.color_at(coords[i]))
    return board, truth
