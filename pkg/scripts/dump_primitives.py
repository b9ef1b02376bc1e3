"""Write docs/primitives.json, the machine-readable table of DSL primitives.

    python3 scripts/dump_primitives.py
"""
from __future__ import annotations

import json
from pathlib import Path

from battleship_lips.dsl import semantics_table

OUT = Path(__file__).resolve().parents[1] / "docs" / "primitives.json"


def main() -> None:
    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(json.dumps(semantics_table(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
