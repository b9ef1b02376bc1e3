"""Regenerate the golden prompt renderings under tests/golden.

Run only after an intentional template change, then review the diff by eye.

    python3 scripts/regen_golden_prompts.py
"""
from __future__ import annotations

import random
from pathlib import Path

from battleship_lips.dataset import by_board, load_synthetic
from battleship_lips.llm import build_generation_prompt, build_translation_prompt, encode_prepended
from battleship_lips.llm.prompts import BoardFormat, Mode

TARGET = "b16"
SEED = 0
GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def golden_prompts() -> dict[str, str]:
    boards, rows = load_synthetic()
    out = {}
    for mode in Mode:
        for fmt in BoardFormat:
            bundle = build_generation_prompt(
                boards[TARGET], mode, fmt, rows, random.Random(SEED), target_board_id=TARGET, boards=boards
            )
            out[f"generation_{mode.value}_{fmt.value}.txt"] = bundle.render()
    examples = [ex for b, exs in sorted(by_board(rows).items()) if b != TARGET for ex in exs][:12]
    bundle = build_translation_prompt("Are there more horizontal ships than vertical ships?", examples)
    out["translation.txt"] = bundle.render()
    out["translation_prepended.txt"] = encode_prepended(bundle.messages) + "\n"
    return out


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, text in golden_prompts().items():
        (GOLDEN / name).write_text(text, encoding="utf-8")
        print(f"wrote {GOLDEN / name}")


if __name__ == "__main__":
    main()
