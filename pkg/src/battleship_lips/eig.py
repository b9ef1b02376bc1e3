"""Exact Bayesian scoring of questions: answer distributions, posteriors and EIG.

All logarithms are base 2, so entropies and information gains are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .board import HypothesisSpace
from .dsl import DomainError, Expr, evaluate_space
from .dsl.interpreter import Value


class ImpossibleAnswerError(ValueError):
    """The answer has zero probability under the current hypothesis space."""


@dataclass(frozen=True)
class AnswerDistribution:
    """Marginal distribution of a program's answer over a hypothesis space."""

    entries: tuple[tuple[Value, float], ...]

    def as_dict(self) -> dict:
        return dict(self.entries)

    @property
    def support_size(self) -> int:
        return len(self.entries)

    def __getitem__(self, answer: Value) -> float:
        for y, p in self.entries:
            if y == answer and type(y) is type(answer):
                return p
        raise KeyError(answer)

    def entropy(self) -> float:
        return _entropy([p for _, p in self.entries])


@dataclass(frozen=True)
class EigScore:
    bits: float
    answer_support_size: int
    prior_entropy: float


@dataclass(frozen=True)
class EigEstimate:
    """Monte Carlo EIG: plug-in estimate from sampled boards."""

    bits: float
    stderr: float
    n_samples: int


@dataclass
class _Groups:
    inverse: np.ndarray   # board -> group id
    keys: np.ndarray      # group id -> answer key (scalar or row)
    mass: np.ndarray      # group probability
    counts: np.ndarray    # boards per group
    answers: object       # SpaceAnswers, for decoding


def _entropy(probs) -> float:
    # Ascending order makes the float result a function of the multiset alone.
    p = np.sort(np.asarray(probs, dtype=float))
    p = p[p > 0]
    if len(p) <= 1:
        return 0.0
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _groups(x: Expr, S: HypothesisSpace) -> _Groups:
    answers = evaluate_space(x, S)
    keys = answers.keys
    if keys.ndim == 1:
        uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    else:
        uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if S.is_uniform:
        mass = counts / len(S)
    else:
        mass = np.bincount(inverse, weights=S.weights, minlength=len(uniq))
    return _Groups(inverse, uniq, mass, counts, answers)


def entropy(S: HypothesisSpace) -> float:
    """Shannon entropy of the board distribution."""
    if S.is_uniform:
        return float(np.log2(len(S))) if len(S) > 1 else 0.0
    return _entropy(S.weights)


def answer_distribution(x: Expr, S: HypothesisSpace) -> AnswerDistribution:
    """Probability of each answer; raises DomainError if ``x`` fails on any board."""
    g = _groups(x, S)
    entries = tuple(
        (g.answers.decode(k), float(p)) for k, p in zip(g.keys, g.mass) if p > 0
    )
    return AnswerDistribution(entries)


def posterior_update(S: HypothesisSpace, x: Expr, y: Value) -> HypothesisSpace:
    """Condition on observing answer ``y`` to question ``x``."""
    g = _groups(x, S)
    for gid, key in enumerate(g.keys):
        v = g.answers.decode(key)
        if v == y and type(v) is type(y) and g.mass[gid] > 0:
            return S.subset(g.inverse == gid)
    raise ImpossibleAnswerError(f"impossible answer {y!r}: zero probability under the hypothesis space")


def _conditional_entropies(g: _Groups, S: HypothesisSpace) -> np.ndarray:
    if S.is_uniform:
        return np.log2(g.counts.astype(float))
    w = S.weights
    wlogw = np.where(w > 0, w * np.log2(np.where(w > 0, w, 1.0)), 0.0)
    sum_wlogw = np.bincount(g.inverse, weights=wlogw, minlength=len(g.keys))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(g.mass > 0, -sum_wlogw / g.mass + np.log2(np.where(g.mass > 0, g.mass, 1.0)), 0.0)
    return np.maximum(h, 0.0)


def eig(x: Expr, S: HypothesisSpace) -> EigScore:
    """Expected information gain of asking ``x``.

    Computed as prior entropy minus expected posterior entropy; equals the
    entropy of the answer distribution since answers are deterministic.
    """
    g = _groups(x, S)
    prior = entropy(S)
    live = g.mass > 0
    support = int(live.sum())
    if support <= 1:
        return EigScore(0.0, support, prior)
    mass, cond = g.mass[live], _conditional_entropies(g, S)[live]
    order = np.lexsort((cond, mass))
    expected_posterior = float(np.sum(mass[order] * cond[order]))
    return EigScore(max(0.0, prior - expected_posterior), support, prior)


def eig_monte_carlo(x: Expr, S: HypothesisSpace, n_samples: int, seed: int) -> EigEstimate:
    """Plug-in EIG over ``n_samples`` boards drawn from S (with replacement).

    The standard error uses the delta-method variance of the plug-in entropy.
    """
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(S), size=n_samples, replace=True, p=None if S.is_uniform else S.weights)
    sample = HypothesisSpace(S.config, S.placements, S.index[picks])
    answers = evaluate_space(x, sample)
    keys = answers.keys
    _, counts = np.unique(keys, axis=0 if keys.ndim > 1 else None, return_counts=True)
    f = np.sort(counts / n_samples)
    logf = np.log2(f)
    h = float(max(0.0, -np.sum(f * logf)))
    var = max(0.0, float(np.sum(f * logf**2)) - h**2) / n_samples
    return EigEstimate(h, float(np.sqrt(var)), n_samples)


def is_valid_for(x: Expr, S: HypothesisSpace) -> bool:
    try:
        evaluate_space(x, S)
    except DomainError:
        return False
    return True
