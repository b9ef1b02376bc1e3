import pytest

from battleship_lips.dataset import QAExample
from battleship_lips.dsl import pretty_print
from battleship_lips.llm.prompts import build_generation_prompt
from battleship_lips.llm.proposal import (
    Invalid,
    clean_completion,
    parse_translation,
    propose_questions,
    translate_question,
)
from battleship_lips.llm.providers import RequestContext

EXAMPLES = [QAExample("other", f"How many tiles is ship {i}?", "(size Red)") for i in range(12)]


class Scripted:
    name = "scripted"

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = 0

    def decoding(self):
        return {"model": "scripted"}

    def complete(self, messages, n, context=RequestContext()):
        self.calls += 1
        out, self.replies = self.replies[:n], self.replies[n:]
        return out


def test_clean_completion():
    assert clean_completion("  Is the red ship vertical?\n\n") == "Is the red ship vertical?"


def test_propose_questions_trims_and_keeps_empty(b16):
    bundle = build_generation_prompt(b16, "zero_shot", "grid")
    p = Scripted([" Where is red?\n", "", "  How big is blue? "])
    assert propose_questions(p, bundle, 3) == ["Where is red?", "", "How big is blue?"]
    assert propose_questions(p, bundle, 0) == []


@pytest.mark.parametrize("raw,expected", [
    ("(size Red)", "(size Red)"),
    ("  (size Red)\n", "(size Red)"),
    ("```\n(size Red)\n```", "(size Red)"),
    ("```lisp\n(orient Blue)\n```", "(orient Blue)"),
])
def test_parse_translation_ok(raw, expected):
    assert pretty_print(parse_translation(raw)) == expected


@pytest.mark.parametrize("raw", ["", "   ", "The red ship is long.", "(sizee Red)", "(size 3)", "(size Red"])
def test_parse_translation_invalid(raw):
    out = parse_translation(raw)
    assert isinstance(out, Invalid)
    assert out.raw == raw and out.reason


def test_translate_question_first_valid_wins():
    p = Scripted(["nonsense", "(size Blue)", "(size Red)"])
    prog, raw = translate_question(p, "How long is blue?", EXAMPLES, samples=3)
    assert pretty_print(prog) == "(size Blue)" and raw == "(size Blue)"


def test_translate_question_all_invalid_reports_first():
    p = Scripted(["nonsense", "(size 3)"])
    prog, raw = translate_question(p, "How long is blue?", EXAMPLES, samples=2)
    assert isinstance(prog, Invalid) and raw == "nonsense"


def test_empty_question_skips_provider():
    p = Scripted(["(size Red)"])
    prog, raw = translate_question(p, "   ", EXAMPLES)
    assert prog == Invalid("", "empty question") and raw == ""
    assert p.calls == 0
