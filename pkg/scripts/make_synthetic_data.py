"""Regenerate the bundled synthetic boards and question/program pairs.

The rows are hand-written stand-ins for a real human question dataset, just
large enough for leave-one-out prompting (3 example boards x 10 questions plus
12 translation pairs from boards other than the target).

    python3 scripts/make_synthetic_data.py [--out src/battleship_lips/data]
"""
from __future__ import annotations

import argparse
import random
from pathlib import Path

import numpy as np

from battleship_lips.board import GameConfig, PartialBoard, dump_board, has_consistent_board, sample_partial_board
from battleship_lips.dataset import QAExample
from battleship_lips.dsl import parse_program, typecheck

ROW4 = "(++ (map (lambda x0 (++ (map (lambda y0 (== (rowL y0) {r})) (coloredTiles x0)))) (set AllColors)))"
COLF = "(> (++ (map (lambda x0 (++ (map (lambda y0 (== (colL y0) 6)) (coloredTiles x0)))) (set AllColors))) 0)"
HORIZ = "(++ (map (lambda x0 (== (orient x0) H)) (set AllColors)))"
VERT = "(++ (map (lambda x0 (== (orient x0) V)) (set AllColors)))"

POOL = [
    ("How many tiles is the red ship?", "(size Red)"),
    ("How many tiles is the blue ship?", "(size Blue)"),
    ("How many tiles is the purple ship?", "(size Purple)"),
    ("Do the red ship and the purple ship touch?", "(touch Red Purple)"),
    ("Is there a ship at 1F?", "(not (== (color 1F) Water))"),
    ("Is the blue ship horizontal?", "(== (orient Blue) H)"),
    ("How many ships are horizontal?", HORIZ),
    ("At what location is the top left part of the red ship?", "(topleft (coloredTiles Red))"),
    ("Is the red ship horizontal?", "(== (orient Red) H)"),
    ("Is there any ship in column F?", COLF),
    ("What color is at 4C?", "(color 4C)"),
    ("Is the purple ship vertical?", "(== (orient Purple) V)"),
    ("Where is the bottom right part of the blue ship?", "(bottomright (coloredTiles Blue))"),
    ("How many tiles are occupied by ships?", "(++ (map (lambda x0 (size x0)) (set AllColors)))"),
    ("Is the blue ship longer than the red ship?", "(> (size Blue) (size Red))"),
    ("Does the blue ship touch any other ship?", "(or (touch Blue Red) (touch Blue Purple))"),
    ("What row is the top of the purple ship in?", "(rowL (topleft (coloredTiles Purple)))"),
    ("What column is the left end of the red ship in?", "(colL (topleft (coloredTiles Red)))"),
    ("Is there a ship at 3D?", "(not (== (color 3D) Water))"),
    ("Are all three ships the same size?", "(and (== (size Red) (size Blue)) (== (size Blue) (size Purple)))"),
    ("What orientation is the purple ship?", "(orient Purple)"),
    ("How many tiles in row 3 are occupied by ships?", ROW4.format(r=3)),
    ("Is any part of the red ship in row 5?", "(any (map (lambda y0 (== (rowL y0) 5)) (coloredTiles Red)))"),
    ("Is the red ship 4 tiles long?", "(== (size Red) 4)"),
    ("What color is the tile at 5C?", "(color 5C)"),
    ("Where is the top left part of the blue ship?", "(topleft (coloredTiles Blue))"),
    ("Are the red and blue ships parallel?", "(== (orient Red) (orient Blue))"),
    ("How many water tiles are in row 1?", "(++ (map (lambda y0 (== (rowL y0) 1)) (coloredTiles Water)))"),
    ("Is the purple ship 2 tiles long?", "(== (size Purple) 2)"),
    ("Are there more horizontal ships than vertical ships?", f"(> {HORIZ} {VERT})"),
]

FIXED_BOARDS = {
    "b02": ["HHHHHH", "HHWHWH", "HHPHHH", "HHHWHH", "HWHHHH", "HHHHWH"],
    "b16": ["HPWHWH", "HHHRBH", "HWHHHH", "WHWHHW", "HHWWHH", "HWHHHH"],
}
N_RANDOM = 3
PER_BOARD = 12


def build_boards(config: GameConfig) -> dict[str, PartialBoard]:
    boards = {k: PartialBoard.from_grid(v, config) for k, v in FIXED_BOARDS.items()}
    for i in range(N_RANDOM):
        rng = np.random.default_rng(1000 + i)
        board, _ = sample_partial_board(config, rng, n_reveal=8)
        boards[f"s{i + 1:02d}"] = board
    for bid, b in boards.items():
        assert has_consistent_board(b), bid
    return boards


def build_questions(board_ids) -> list[QAExample]:
    for q, p in POOL:
        typecheck(parse_program(p))
    rows = []
    for bid in board_ids:
        picks = random.Random(f"synthetic:{bid}").sample(POOL, PER_BOARD)
        rows.extend(QAExample(bid, q, p) for q, p in picks)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "src/battleship_lips/data")
    args = ap.parse_args()
    config = GameConfig()
    boards = build_boards(config)
    (args.out / "boards").mkdir(parents=True, exist_ok=True)
    for bid, b in boards.items():
        (args.out / "boards" / f"{bid}.json").write_text(dump_board(b), encoding="utf-8")
    rows = build_questions(boards)
    (args.out / "synthetic_human.jsonl").write_text("".join(r.to_json() + "\n" for r in rows), encoding="utf-8")
    print(f"wrote {len(boards)} boards and {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
