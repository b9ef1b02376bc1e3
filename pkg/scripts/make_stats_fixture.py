"""Write tests/fixtures/stats_pairs.json: 20 seeded sample pairs for the statistics tests.

    python3 scripts/make_stats_fixture.py
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "stats_pairs.json"


def make_pairs(n_pairs: int = 20, seed: int = 2024) -> list[dict]:
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n_pairs):
        na, nb = (int(x) for x in rng.integers(3, 80, size=2))
        # EIG-like data: nonnegative, skewed, with ties at zero
        a = np.round(np.maximum(0, rng.normal(1.2, 0.9, na)), 4)
        b = np.round(np.maximum(0, rng.gamma(1.5, 0.6 + 0.05 * i, nb)), 4)
        pairs.append({"id": i, "a": a.tolist(), "b": b.tolist()})
    return pairs


def main() -> None:
    OUT.write_text(json.dumps(make_pairs(), indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
