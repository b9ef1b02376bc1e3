"""Prompt construction for question generation and program translation.

Prompts are lists of role-tagged messages. The wording is fixed; only the
game description (ship names, lengths, board size) is generated from the
:class:`GameConfig`, so the default config reproduces the reference text.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from ..board import COLUMN_LETTERS, WATER, GameConfig, PartialBoard, render_grid, render_textual
from ..dataset import QAExample, by_board


class PromptError(ValueError):
    pass


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class Mode(str, Enum):
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"


class BoardFormat(str, Enum):
    TEXTUAL = "textual"
    GRID = "grid"
    NO_BOARD = "no_board"

    @classmethod
    def parse(cls, value: str) -> "BoardFormat":
        if value == "visual":
            raise PromptError("the visual board format is not supported; use textual, grid or no_board")
        try:
            return cls(value)
        except ValueError:
            raise PromptError(f"unknown board format {value!r}; use textual, grid or no_board") from None


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        if not isinstance(self.content, str):
            raise PromptError("message content must be text (images are not supported)")
        if not self.content:
            raise PromptError("message content must be non-empty")
        object.__setattr__(self, "role", Role(self.role))

    def to_dict(self) -> dict:
        return {"role": self.role.value, "content": self.content}


@dataclass(frozen=True)
class PromptBundle:
    messages: tuple[ChatMessage, ...]
    purpose: str = "question"  # or "translation"
    mode: Mode | None = None
    board_format: BoardFormat | None = None
    target_board_id: str | None = None
    shots: tuple[tuple[str, tuple[str, ...]], ...] = field(default=())

    def render(self) -> str:
        """Human-readable transcript (used for golden files)."""
        return "".join(f"[{m.role.value}]\n{m.content}\n\n" for m in self.messages)


N_SHOT_BOARDS = 3
N_SHOT_QUESTIONS = 10
N_TRANSLATION_EXAMPLES = 12

SYSTEM_GENERATION = (
    "You are a game-playing agent. Read the game instructions and examples carefully. "
    "Respond with a single question that can be answered with one word. "
    "Do not include any other explanation or prose."
)
TASK_GENERATION = (
    "You will be given a partially-revealed game board. Your task is to ask a single question that will help "
    "you gain information about the position of the remaining hidden ships on the board. You can ask any "
    "question, but it must be answerable with a single word answer."
)
TASK_TRANSLATION = "Your task is to translate each of the user's questions into a query program."
FORMAT_TEXTUAL = "The board is represented as a textual description."
EXAMPLES_INTRO = "Here are some examples of questions from other agents about different boards."
YOUR_TURN = "Now, it's your turn. Here is your board:"
EMPTY_TEXTUAL = "No tiles have been revealed."

_NUMBER_WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]


def _english_list(items: Sequence[str], conj: str = "and") -> str:
    items = list(items)
    if len(items) == 1:
        return items[0]
    if len(items) == 2:
        return f"{items[0]} {conj} {items[1]}"
    return ", ".join(items[:-1]) + f", {conj} {items[-1]}"


def game_description(config: GameConfig) -> str:
    n = len(config.ships)
    count = _NUMBER_WORDS[n] if n < len(_NUMBER_WORDS) else str(n)
    lengths = sorted({l for s in config.ships for l in s.lengths})
    rows = ", ".join(str(r) for r in range(1, config.rows + 1))
    cols = ", ".join(COLUMN_LETTERS[: config.cols])
    ex_row, ex_col = min(2, config.rows), COLUMN_LETTERS[min(3, config.cols) - 1]
    return (
        f"You are playing the board game Battleship. There {'is' if n == 1 else 'are'} {count} "
        f"ship{'' if n == 1 else 's'} on the board: {_english_list(config.ship_ids)}. "
        f"Ships are oriented either horizontally or vertically and can be "
        f"{_english_list([str(l) for l in lengths], 'or')} tiles in length. "
        f"The board is a {config.rows}x{config.cols} grid, with numbered rows {rows} and lettered columns {cols}. "
        f"Coordinates are specified as a row, column pair. "
        f"For example, {ex_row}-{ex_col} is the tile in row {ex_row}, column {ex_col}."
    )


def grid_legend(config: GameConfig) -> str:
    lines = ["The board is represented as a grid with the following symbols:", ""]
    lines.append("H: Hidden")
    lines.append(f"{config.symbol(WATER)}: Water")
    lines.extend(f"{config.symbol(s)}: {s} ship" for s in config.ship_ids)
    return "\n".join(lines)


def render_board(board: PartialBoard, fmt: BoardFormat) -> str:
    if fmt is BoardFormat.GRID:
        return render_grid(board).rstrip("\n")
    if fmt is BoardFormat.TEXTUAL:
        return render_textual(board).rstrip("\n") or EMPTY_TEXTUAL
    raise PromptError(f"no board rendering for format {fmt.value}")


def _sample_shots(
    target_board_id: str,
    pool: Sequence[QAExample],
    rng: random.Random,
) -> list[tuple[str, list[str]]]:
    grouped = by_board([ex for ex in pool if ex.board_id != target_board_id])
    eligible = sorted(b for b, rows in grouped.items() if len(rows) >= N_SHOT_QUESTIONS)
    if len(eligible) < N_SHOT_BOARDS:
        raise PromptError(
            f"few-shot prompting needs {N_SHOT_BOARDS} other boards with at least "
            f"{N_SHOT_QUESTIONS} questions each; the pool has {len(eligible)}"
        )
    boards = rng.sample(eligible, N_SHOT_BOARDS)
    return [(b, [ex.question for ex in rng.sample(grouped[b], N_SHOT_QUESTIONS)]) for b in boards]


def build_generation_prompt(
    target: PartialBoard,
    mode: Mode | str,
    board_format: BoardFormat | str,
    shot_pool: Sequence[QAExample] = (),
    rng: random.Random | None = None,
    *,
    target_board_id: str = "",
    boards: Mapping[str, PartialBoard] | None = None,
) -> PromptBundle:
    """Question-generation prompt for ``target``.

    Few-shot examples are drawn from ``shot_pool`` excluding ``target_board_id``;
    ``boards`` supplies the example boards' layouts unless the format is no_board.
    """
    mode = Mode(mode)
    fmt = board_format if isinstance(board_format, BoardFormat) else BoardFormat.parse(board_format)
    config = target.config
    msgs = [
        ChatMessage(Role.SYSTEM, SYSTEM_GENERATION),
        ChatMessage(Role.USER, game_description(config) + "\n\n" + TASK_GENERATION),
    ]
    if fmt is BoardFormat.TEXTUAL:
        msgs.append(ChatMessage(Role.USER, FORMAT_TEXTUAL))
    elif fmt is BoardFormat.GRID:
        msgs.append(ChatMessage(Role.USER, grid_legend(config)))
    shots: list[tuple[str, list[str]]] = []
    if mode is Mode.FEW_SHOT:
        shots = _sample_shots(target_board_id, shot_pool, rng or random.Random(0))
        msgs.append(ChatMessage(Role.USER, EXAMPLES_INTRO))
        for board_id, questions in shots:
            if fmt is not BoardFormat.NO_BOARD:
                if boards is None or board_id not in boards:
                    raise PromptError(f"no board layout for example board {board_id!r}")
                msgs.append(ChatMessage(Role.USER, render_board(boards[board_id], fmt)))
            msgs.extend(ChatMessage(Role.ASSISTANT, q) for q in questions)
    if fmt is not BoardFormat.NO_BOARD:
        msgs.append(ChatMessage(Role.USER, YOUR_TURN))
        msgs.append(ChatMessage(Role.USER, render_board(target, fmt)))
    return PromptBundle(
        tuple(msgs), "question", mode, fmt, target_board_id or None,
        tuple((b, tuple(qs)) for b, qs in shots),
    )


def sample_translation_examples(
    pool: Sequence[QAExample], exclude_board_id: str, rng: random.Random
) -> list[QAExample]:
    eligible = [ex for ex in pool if ex.board_id != exclude_board_id]
    if len(eligible) < N_TRANSLATION_EXAMPLES:
        raise PromptError(f"translation needs {N_TRANSLATION_EXAMPLES} examples from other boards; the pool has {len(eligible)}")
    return rng.sample(eligible, N_TRANSLATION_EXAMPLES)


def build_translation_prompt(
    question: str, examples: Sequence[QAExample], config: GameConfig | None = None
) -> PromptBundle:
    if len(examples) != N_TRANSLATION_EXAMPLES:
        raise PromptError(f"translation prompts take exactly {N_TRANSLATION_EXAMPLES} examples, got {len(examples)}")
    config = config or GameConfig()
    msgs = [ChatMessage(Role.SYSTEM, game_description(config) + "\n\n" + TASK_TRANSLATION)]
    for ex in examples:
        msgs.append(ChatMessage(Role.USER, ex.question))
        msgs.append(ChatMessage(Role.ASSISTANT, ex.program))
    msgs.append(ChatMessage(Role.USER, question.strip()))
    return PromptBundle(tuple(msgs), "translation")


def encode_prepended(messages: Sequence[ChatMessage]) -> str:
    """Single-string prompt for models without role metadata."""
    parts = [f"{m.role.value.capitalize()}: {m.content}" for m in messages]
    parts.append("Assistant:")
    return "\n\n".join(parts)
