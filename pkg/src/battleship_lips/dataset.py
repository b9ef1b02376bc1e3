"""Human question datasets and board collections.

A dataset is JSONL with one ``{"board_id", "question", "program"}`` object per
line. A board collection is a directory of ``<board_id>.json`` files in the
format written by :func:`battleship_lips.board.dump_board`.

A small synthetic stand-in ships under ``battleship_lips/data``; it is written
by ``scripts/make_synthetic_data.py`` and is not real participant data.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .board import GameConfig, PartialBoard, load_board
from .dsl import DSLError, parse_program


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class QAExample:
    board_id: str
    question: str
    program: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


def parse_dataset(text: str, config: GameConfig | None = None) -> list[QAExample]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            ex = QAExample(str(row["board_id"]), str(row["question"]).strip(), str(row["program"]).strip())
        except (json.JSONDecodeError, KeyError, TypeError) as err:
            raise DatasetError(f"line {lineno}: expected an object with board_id, question, program ({err})") from None
        try:
            parse_program(ex.program, config)
        except DSLError as err:
            raise DatasetError(f"line {lineno}: program does not parse: {err}") from None
        out.append(ex)
    return out


def load_dataset(path, config: GameConfig | None = None) -> list[QAExample]:
    return parse_dataset(Path(path).read_text(encoding="utf-8"), config)


def load_board_dir(path) -> dict[str, PartialBoard]:
    d = Path(path)
    boards = {p.stem: load_board(p) for p in sorted(d.glob("*.json"))}
    if not boards:
        raise DatasetError(f"no board files (*.json) in {d}")
    return boards


def bundled_data_dir() -> Path:
    return Path(str(resources.files("battleship_lips") / "data"))


def load_synthetic() -> tuple[dict[str, PartialBoard], list[QAExample]]:
    """The bundled synthetic boards and question/program pairs."""
    root = bundled_data_dir()
    return load_board_dir(root / "boards"), load_dataset(root / "synthetic_human.jsonl")


def by_board(examples: list[QAExample]) -> dict[str, list[QAExample]]:
    out: dict[str, list[QAExample]] = {}
    for ex in examples:
        out.setdefault(ex.board_id, []).append(ex)
    return out
