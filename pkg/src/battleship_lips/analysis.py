"""Summary statistics, significance tests, bootstrap intervals and table output."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dsl import ANSWER_TYPES
from .lips import CandidateRecord


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class Metric:
    mean: float | None
    se: float | None
    n: int

    @property
    def single(self) -> bool:
        """True when n == 1 and the standard error is reported as 0 by convention."""
        return self.n == 1


def mean_se(values: Sequence[float]) -> Metric:
    """Mean and standard error (sample sd with ddof=1, over sqrt(n)); se is 0 for n == 1."""
    n = len(values)
    if n == 0:
        return Metric(None, None, 0)
    m = math.fsum(values) / n
    if n == 1:
        return Metric(m, 0.0, 1)
    var = math.fsum((v - m) ** 2 for v in values) / (n - 1)
    return Metric(m, math.sqrt(var / n), n)


METRICS = ("eig", "valid", "informative", "depth", "size", "words")


@dataclass(frozen=True)
class SummaryRow:
    label: str
    k: int
    metrics: dict[str, Metric]

    def cells(self) -> list[str]:
        out = [self.label, str(self.k)]
        for name in METRICS:
            m = self.metrics[name]
            if m.mean is None:
                out += ["--", "--"]
            else:
                out += [f"{m.mean:.6f}", f"{m.se:.6f}"]
        return out


def summarize(records: Sequence[CandidateRecord], label: str = "", k: int = 1) -> SummaryRow:
    """Per-sample statistics over a group of records.

    EIG averages every sample with invalid ones scored 0; % Valid and
    % Informative are fractions of all samples; depth and size use records
    with a parsed program; words use records that carry a question.
    """
    if not records:
        raise StatsError("summarize needs at least one record")
    return SummaryRow(label, k, {
        "eig": mean_se([r.score for r in records]),
        "valid": mean_se([float(r.valid) for r in records]),
        "informative": mean_se([float(r.informative) for r in records]),
        "depth": mean_se([r.depth for r in records if r.depth is not None]),
        "size": mean_se([r.size for r in records if r.size is not None]),
        "words": mean_se([r.word_count for r in records if r.word_count is not None]),
    })


# ---------------------------------------------------------------------------
# Student t distribution


def _betacf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-15) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise StatsError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise StatsError("degrees of freedom must be positive")
    if t == 0:
        return 1.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_sf_two_sided(t, df)
    return 1.0 - tail if t > 0 else tail


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sided Welch test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise StatsError("each sample needs at least 2 values")
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    if va + vb == 0:
        raise StatsError("both samples have zero variance")
    diff = a.mean() - b.mean()
    se2 = va + vb
    t = diff / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
    return WelchResult(float(t), float(df), t_sf_two_sided(float(t), float(df)))


# ---------------------------------------------------------------------------
# Bootstrap and quantiles


def bootstrap_ci(
    values: Sequence[float], level: float = 0.95, n_boot: int = 10_000, seed: int = 0, chunk: int = 1000
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean."""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        raise StatsError("bootstrap needs at least one value")
    if not 0 < level < 1:
        raise StatsError("level must be in (0, 1)")
    rng = np.random.default_rng(seed)
    means = np.empty(n_boot)
    for start in range(0, n_boot, chunk):
        m = min(chunk, n_boot - start)
        idx = rng.integers(0, len(x), size=(m, len(x)))
        means[start:start + m] = x[idx].mean(axis=1)
    alpha = (1 - level) / 2
    lo, hi = np.quantile(means, [alpha, 1 - alpha])
    # Guard float round-off of the resampled means against the data range.
    return float(max(lo, x.min())), float(min(hi, x.max()))


@dataclass(frozen=True)
class QQData:
    percentiles: tuple[float, ...]
    model: tuple[float, ...]
    human: tuple[float, ...]


DEFAULT_GRID = tuple(float(p) for p in range(1, 100))


def quantiles(values: Sequence[float], percentiles: Sequence[float]) -> list[float]:
    """Linear interpolation between order statistics (position p/100 * (n-1))."""
    return [float(q) for q in np.percentile(np.asarray(values, dtype=float), percentiles, method="linear")]


def qq_points(model: Sequence[float], human: Sequence[float], grid: Sequence[float] = DEFAULT_GRID) -> QQData:
    if len(model) == 0 or len(human) == 0:
        raise StatsError("both samples must be nonempty")
    return QQData(tuple(grid), tuple(quantiles(model, grid)), tuple(quantiles(human, grid)))


def type_distribution(records: Iterable[CandidateRecord]) -> dict[str, float]:
    """Share of each top-level answer type among records with a typed program."""
    counts = Counter(r.answer_type for r in records if r.valid and r.answer_type is not None)
    total = sum(counts.values())
    if total == 0:
        return {t.value: 0.0 for t in ANSWER_TYPES}
    return {t.value: counts.get(t.value, 0) / total for t in ANSWER_TYPES}


# ---------------------------------------------------------------------------
# Table output

SUMMARY_HEADER = ["model", "k"] + [f"{m}_{s}" for m in METRICS for s in ("mean", "se")]


def to_csv(header: Sequence[str], rows: Iterable[Sequence], delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    return to_csv(SUMMARY_HEADER, [r.cells() for r in rows])


def mapping_rows(d: Mapping[str, float]) -> list[list[str]]:
    return [[k, f"{v:.6f}"] for k, v in d.items()]
