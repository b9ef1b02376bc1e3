"""Language-model proposals: sample questions, then translate them to programs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..board import GameConfig
from ..dataset import QAExample
from ..dsl import DSLError, Expr, parse_program, typecheck
from .prompts import PromptBundle, build_translation_prompt
from .providers import Provider, RequestContext, ResponseCache, sampled


@dataclass(frozen=True)
class Invalid:
    """A translation that did not yield a well-typed program."""

    raw: str
    reason: str


def clean_completion(text: str) -> str:
    return text.strip()


def propose_questions(
    provider: Provider,
    bundle: PromptBundle,
    n: int,
    *,
    context: RequestContext = RequestContext(),
    cache: ResponseCache | None = None,
) -> list[str]:
    """``n`` whitespace-trimmed question samples (empty strings are kept)."""
    if n <= 0:
        return []
    return [clean_completion(t) for t in sampled(provider, bundle.messages, n, context, cache)]


def _strip_fence(text: str) -> str:
    t = text.strip()
    if t.startswith("```"):
        t = t.strip("`")
        if "\n" in t:
            t = t.split("\n", 1)[1]
    return t.strip()


def parse_translation(raw: str, config: GameConfig | None = None) -> Expr | Invalid:
    text = _strip_fence(raw)
    if not text:
        return Invalid(raw, "empty completion")
    try:
        e = parse_program(text, config)
        typecheck(e)
    except DSLError as err:
        return Invalid(raw, str(err))
    return e


def translate_question(
    provider: Provider,
    question: str,
    examples: Sequence[QAExample],
    *,
    config: GameConfig | None = None,
    samples: int = 1,
    context: RequestContext = RequestContext(purpose="translation"),
    cache: ResponseCache | None = None,
) -> tuple[Expr | Invalid, str]:
    """Translate one question; returns the program (or Invalid) and the raw text used.

    With ``samples > 1`` the first well-typed completion wins.
    """
    if not question.strip():
        return Invalid("", "empty question"), ""
    bundle = build_translation_prompt(question, examples, config)
    raws = sampled(provider, bundle.messages, samples, context, cache)
    first: Invalid | None = None
    for raw in raws:
        result = parse_translation(raw, config)
        if not isinstance(result, Invalid):
            return result, raw
        first = first or result
    return first, first.raw
