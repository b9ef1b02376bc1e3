import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from battleship_lips.dsl import parse_program
from battleship_lips.lips import (
    CandidateRecord,
    RunConfig,
    bucketize_estimate,
    dominance_chain,
    nested_bucket_means,
    score_candidates,
    select_best,
    shuffled_order,
    word_count,
)
from battleship_lips.llm.proposal import Invalid


def rec(bits, valid=True, q=None):
    return CandidateRecord(q, "(size Red)" if valid else None, valid, bits if valid else None, 2, 2,
                           word_count(q))


def test_score_candidates(b16_space):
    raw = [
        ("How long is blue?", parse_program("(size Blue)")),
        ("Same again?", "(size Blue)"),
        ("Broken", Invalid("(sizee Blue)", "unknown primitive")),
        ("Unparseable", "(size"),
        ("Water size?", "(size Water)"),
        (None, "(== 1 1)"),
    ]
    out = score_candidates(raw, b16_space)
    assert [r.valid for r in out] == [True, True, False, False, False, True]
    assert out[0].eig_bits == pytest.approx(1.5) and out[0].answer_type == "Number"
    assert out[0].program == "(size Blue)" and out[0].word_count == 4
    assert out[2].error == "unknown primitive" and out[2].program is None
    assert out[4].program == "(size Water)" and out[4].eig_bits is None
    assert out[5].eig_bits == 0.0 and not out[5].informative and out[5].word_count is None
    assert [r.score for r in out] == [pytest.approx(1.5), pytest.approx(1.5), 0.0, 0.0, 0.0, 0.0]
    assert out[3].provenance == {"index": 3}


def test_record_roundtrip():
    r = CandidateRecord("q?", "(size Red)", True, 1.25, 2, 2, 1, "Number", None, {"board_id": "b"})
    d = r.to_dict()
    assert d["informative"] is True
    assert CandidateRecord.from_dict(d) == r


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(k=0)
    with pytest.raises(ValueError):
        RunConfig(proposal="oracle")


def test_select_best_picks_max():
    recs = [rec(0.5), rec(1.2), rec(0.0, valid=False), rec(0.9)]
    s = select_best(recs, random.Random(0))
    assert s.record is recs[1] and s.n_tied == 1 and s.score == 1.2


def test_select_best_all_invalid():
    s = select_best([rec(0, valid=False)] * 3, random.Random(0))
    assert s.all_invalid and s.score == 0.0
    with pytest.raises(ValueError):
        select_best([], random.Random(0))


def test_tie_break_uniform():
    a, b = rec(1.0, q="a"), rec(1.0, q="b")
    hits = 0
    trials = 10_000
    for seed in range(trials):
        hits += select_best([a, rec(0.2), b], random.Random(seed)).record is a
    assert abs(hits / trials - 0.5) <= 0.02


def test_select_best_single_draw():
    r1, r2 = random.Random(5), random.Random(5)
    select_best([rec(1.0), rec(1.0), rec(1.0)], r1)
    select_best([rec(1.0), rec(0.5)], r2)
    assert r1.random() == r2.random()


def test_bucketize_estimate():
    recs = [rec(float(i)) for i in range(20)]
    res = bucketize_estimate(recs, 5, random.Random(1))
    assert res.n_buckets == 4
    assert sorted(res.order) == list(range(20))
    for b, sel in enumerate(res.selections):
        bucket = res.order[b * 5:(b + 1) * 5]
        assert sel.score == max(bucket)
    assert res.mean_eig == pytest.approx(np.mean(res.scores))
    k1 = bucketize_estimate(recs, 1, random.Random(1))
    assert k1.mean_eig == pytest.approx(9.5)
    with pytest.raises(ValueError):
        bucketize_estimate(recs, 21, random.Random(0))
    with pytest.raises(ValueError):
        bucketize_estimate(recs, 0, random.Random(0))


def test_bucketize_remainder_dropped_and_invalid_buckets():
    recs = [rec(0, valid=False)] * 3 + [rec(1.0)] * 4
    res = bucketize_estimate(recs, 3, random.Random(0), order=list(range(7)))
    assert res.n_buckets == 2
    assert res.n_all_invalid == 1
    assert res.mean_eig == 0.5
    assert res.mean_eig_dropping_invalid == 1.0


def test_shared_order_is_reused():
    recs = [rec(float(i % 7)) for i in range(30)]
    order = shuffled_order(30, random.Random(4))
    a = bucketize_estimate(recs, 5, random.Random(0), order=order)
    assert list(a.order) == order


def test_nested_buckets_hand_example():
    # contiguous global buckets would give 0.6 at k=20 vs 0.5 at k=50 here
    v = [0.0] * 100
    for i in (0, 20, 40):
        v[i] = 1.0
    small, large = nested_bucket_means(v, 20, 50)
    assert (small, large) == (0.5, 0.5)
    with pytest.raises(ValueError):
        nested_bucket_means(v, 50, 20)


@given(st.lists(st.floats(0, 6, allow_nan=False), min_size=50, max_size=120), st.integers(0, 2**31))
def test_dominance_chain_property(values, seed):
    values = list(values)
    random.Random(seed).shuffle(values)
    for a, b, small, large in dominance_chain(values, [1, 5, 10, 20, 50]):
        assert large >= small, (a, b)


def test_bucket_means_increase_on_average():
    rng = np.random.default_rng(0)
    vals = rng.exponential(size=1000).tolist()
    means = [bucketize_estimate([rec(v) for v in vals], k, random.Random(0)).mean_eig for k in (1, 5, 10, 20, 50)]
    assert means == sorted(means)
