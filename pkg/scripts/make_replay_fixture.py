"""Write a replay fixture that stands in for a language model on the bundled boards.

Questions for a board are that board's synthetic human questions, cycled; each
translation is the matching program. A few entries are deliberately broken (an
empty question, a misspelled primitive, prose instead of code) so the invalid
paths get exercised.

    python3 scripts/make_replay_fixture.py --n 20 --out tests/fixtures/replay.jsonl
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from battleship_lips.dataset import by_board, load_synthetic


def fixture_entries(n: int) -> list[dict]:
    boards, rows = load_synthetic()
    grouped = by_board(rows)
    out = []
    for board_id in sorted(boards):
        exs = grouped[board_id]
        for i in range(n):
            ex = exs[i % len(exs)]
            question, program = ex.question, ex.program
            if i == 3:
                question = "   "
            elif i == 5:
                program = program.replace("(", "(sizee ", 1) if program.startswith("(size") else "(sizee Red)"
            elif i == 7:
                program = "I think the answer is the red ship."
            out.append({"board_id": board_id, "purpose": "question", "index": i, "completion": f" {question}\n"})
            out.append({"board_id": board_id, "purpose": "translation", "index": i, "completion": program})
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()
    entries = fixture_entries(args.n)
    args.out.write_text("".join(json.dumps(e) + "\n" for e in entries), encoding="utf-8")
    print(f"wrote {len(entries)} entries to {args.out}")


if __name__ == "__main__":
    main()
