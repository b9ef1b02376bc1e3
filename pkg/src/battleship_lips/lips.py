"""Best-of-k question selection and the post-hoc bucketing estimator.

A proposal (grammar or language model) yields candidate programs; each is
scored by EIG against the board's hypothesis space and the best of ``k`` is
asked. Because candidates are i.i.d., one pool of ``n`` samples can be split
into ``n // k`` buckets to estimate the k-sample selector for every k.
"""
from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .board import HypothesisSpace
from .dsl import DSLError, Expr, ast_depth, ast_size, parse_program, pretty_print, top_level_type, typecheck
from .eig import eig
from .llm.proposal import Invalid


@dataclass(frozen=True)
class CandidateRecord:
    question: str | None          # None for grammar samples (no language)
    program: str | None           # None when translation failed
    valid: bool
    eig_bits: float | None
    depth: int | None
    size: int | None
    word_count: int | None
    answer_type: str | None = None
    error: str | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def informative(self) -> bool:
        return self.valid and self.eig_bits is not None and self.eig_bits > 0

    @property
    def score(self) -> float:
        """EIG with invalid candidates counted as 0."""
        return self.eig_bits if self.valid else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["informative"] = self.informative
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateRecord":
        d = {k: v for k, v in d.items() if k != "informative"}
        return cls(**d)


@dataclass(frozen=True)
class RunConfig:
    k: int = 1
    proposal: str = "grammar"
    board_id: str = ""
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.proposal not in ("grammar", "llm"):
            raise ValueError("proposal must be 'grammar' or 'llm'")


def word_count(question: str | None) -> int | None:
    return None if question is None else len(question.split())


def score_candidates(
    raw: Iterable[tuple[str | None, Expr | Invalid | str]],
    S: HypothesisSpace,
    provenance: Sequence[dict] | None = None,
) -> list[CandidateRecord]:
    """Score (question, program) pairs; programs may be Exprs, source text or Invalid.

    Identical programs are evaluated once.
    """
    if len(S) == 0:
        raise ValueError("hypothesis space is empty")
    memo: dict[str, tuple] = {}
    out = []
    for i, (question, prog) in enumerate(raw):
        prov = dict(provenance[i]) if provenance is not None else {"index": i}
        wc = word_count(question)
        if isinstance(prog, Invalid):
            out.append(CandidateRecord(question, None, False, None, None, None, wc, error=prog.reason, provenance=prov))
            continue
        if isinstance(prog, str):
            try:
                prog = parse_program(prog, S.config)
            except DSLError as err:
                out.append(CandidateRecord(question, None, False, None, None, None, wc, error=str(err), provenance=prov))
                continue
        text = pretty_print(prog)
        if text not in memo:
            memo[text] = _score_program(prog, S)
        valid, bits, atype, err = memo[text]
        out.append(CandidateRecord(
            question, text, valid, bits, ast_depth(prog), ast_size(prog), wc,
            answer_type=atype, error=err, provenance=prov,
        ))
    return out


def _score_program(prog: Expr, S: HypothesisSpace):
    try:
        typecheck(prog)
        bits = eig(prog, S).bits
    except DSLError as err:
        return False, None, None, str(err)
    try:
        atype = top_level_type(prog).value
    except DSLError:
        atype = None
    return True, bits, atype, None


@dataclass(frozen=True)
class Selection:
    record: CandidateRecord | None  # None: every candidate was invalid
    n_tied: int = 0

    @property
    def all_invalid(self) -> bool:
        return self.record is None

    @property
    def score(self) -> float:
        return 0.0 if self.record is None else self.record.score


def select_best(records: Sequence[CandidateRecord], rng: random.Random) -> Selection:
    """Argmax of EIG over valid records, ties broken uniformly with ``rng``.

    Exactly one random draw is made per call that has a valid record, so the
    stream advances identically regardless of how many candidates tie.
    """
    if not records:
        raise ValueError("select_best needs at least one record")
    valid = [r for r in records if r.valid]
    if not valid:
        return Selection(None, 0)
    top = max(r.eig_bits for r in valid)
    tied = [r for r in valid if r.eig_bits == top]
    # One random() per call: randrange() may consume a variable number of draws.
    pick = min(int(rng.random() * len(tied)), len(tied) - 1)
    return Selection(tied[pick], len(tied))


@dataclass(frozen=True)
class BucketResult:
    k: int
    selections: tuple[Selection, ...]
    order: tuple[int, ...]

    @property
    def n_buckets(self) -> int:
        return len(self.selections)

    @property
    def scores(self) -> list[float]:
        return [s.score for s in self.selections]

    @property
    def mean_eig(self) -> float:
        return math.fsum(self.scores) / len(self.scores)

    @property
    def n_all_invalid(self) -> int:
        return sum(s.all_invalid for s in self.selections)

    @property
    def mean_eig_dropping_invalid(self) -> float | None:
        kept = [s.score for s in self.selections if not s.all_invalid]
        return math.fsum(kept) / len(kept) if kept else None


def shuffled_order(n: int, rng: random.Random) -> list[int]:
    order = list(range(n))
    rng.shuffle(order)
    return order


def bucketize_estimate(
    records: Sequence[CandidateRecord], k: int, rng: random.Random, order: Sequence[int] | None = None
) -> BucketResult:
    """Shuffle, split into ``len(records) // k`` buckets and select within each.

    All-invalid buckets score 0 and are counted in ``n_all_invalid``.
    """
    n = len(records)
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k:
        raise ValueError(f"need at least k={k} records, got {n}")
    order = list(order) if order is not None else shuffled_order(n, rng)
    sels = []
    for b in range(n // k):
        bucket = [records[i] for i in order[b * k:(b + 1) * k]]
        sels.append(select_best(bucket, rng))
    return BucketResult(k, tuple(sels), tuple(order))


def nested_bucket_means(values: Sequence[float], k_small: int, k_large: int) -> tuple[float, float]:
    """Bucket-max means for two bucket sizes on one aligned prefix.

    The prefix holds ``len(values) // k_large`` large buckets; small buckets are
    formed inside each large one (``k_large // k_small`` of them, left-aligned),
    so every small bucket is a subset of a large bucket and the large mean can
    never be the smaller one.
    """
    if not 1 <= k_small <= k_large <= len(values):
        raise ValueError("need 1 <= k_small <= k_large <= len(values)")
    per = k_large // k_small
    large, small = [], []
    for b in range(len(values) // k_large):
        block = values[b * k_large:(b + 1) * k_large]
        large.append(max(block))
        small.extend(max(block[j * k_small:(j + 1) * k_small]) for j in range(per))
    return math.fsum(small) / len(small), math.fsum(large) / len(large)


def dominance_chain(values: Sequence[float], ks: Sequence[int]) -> list[tuple[int, int, float, float]]:
    """``nested_bucket_means`` for each adjacent pair of sorted ``ks``."""
    ks = sorted(set(ks))
    return [(a, b, *nested_bucket_means(values, a, b)) for a, b in zip(ks, ks[1:])]
