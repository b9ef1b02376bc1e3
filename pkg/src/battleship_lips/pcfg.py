"""Uniform-weight probabilistic grammar over question programs.

Grammars are written one rule per line::

    Bool -> TRUE | FALSE | (not Bool) [2]

Tokens that name a left-hand side are nonterminals, everything else is a
terminal. ``(lambda @Ship Num)`` binds a fresh variable; inside the body the
nonterminal after ``@`` gains one extra production per variable in scope.
An optional ``[w]`` after an alternative sets its relative weight (default 1).
"""
from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

from .board import COLUMN_LETTERS, WATER, GameConfig
from .dsl.ast import App, Expr, Lambda, Lit, Var, ast_depth
from .dsl.parser import literal_kind, tokenize


class GrammarError(ValueError):
    pass


class SamplingError(RuntimeError):
    """No acceptable program within ``max_attempts`` derivations."""


# Template nodes: ("nt", name) | ("t", token) | ("app", op, kids) | ("lambda", binder_nt, body)
Template = tuple


@dataclass(frozen=True)
class Production:
    lhs: str
    template: Template
    weight: float = 1.0

    @property
    def text(self) -> str:
        return _render(self.template)

    @cached_property
    def has_lambda(self) -> bool:
        return _mentions(self.template, "lambda")

    def nonterminals(self) -> set[str]:
        out: set[str] = set()
        _collect_nts(self.template, out)
        return out


def _render(t: Template) -> str:
    kind = t[0]
    if kind in ("nt", "t"):
        return t[1]
    if kind == "lambda":
        return f"(lambda @{t[1]} {_render(t[2])})"
    return "(" + " ".join([t[1]] + [_render(k) for k in t[2]]) + ")"


def _mentions(t: Template, kind: str) -> bool:
    if t[0] == kind:
        return True
    if t[0] == "app":
        return any(_mentions(k, kind) for k in t[2])
    if t[0] == "lambda":
        return _mentions(t[2], kind)
    return False


def _collect_nts(t: Template, out: set[str]) -> None:
    if t[0] == "nt":
        out.add(t[1])
    elif t[0] == "app":
        for k in t[2]:
            _collect_nts(k, out)
    elif t[0] == "lambda":
        out.add(t[1])
        _collect_nts(t[2], out)


@dataclass(frozen=True)
class Grammar:
    start: str
    productions: dict[str, tuple[Production, ...]]
    config: GameConfig = field(default_factory=GameConfig)

    def __post_init__(self) -> None:
        if self.start not in self.productions:
            raise GrammarError(f"start symbol {self.start!r} has no productions")
        for nt, prods in self.productions.items():
            if not prods:
                raise GrammarError(f"nonterminal {nt!r} has no productions")
            if any(p.weight <= 0 for p in prods):
                raise GrammarError(f"nonterminal {nt!r} has a non-positive weight")
            for p in prods:
                missing = p.nonterminals() - self.productions.keys()
                if missing:
                    raise GrammarError(f"{nt} -> {p.text} uses undefined nonterminal(s) {sorted(missing)}")

    @property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(self.productions)

    def weights(self, nt: str) -> tuple[float, ...]:
        """Normalized production probabilities for ``nt``."""
        ws = [p.weight for p in self.productions[nt]]
        total = sum(ws)
        return tuple(w / total for w in ws)

    def without_lambda(self) -> "Grammar":
        """Drop lambda productions and anything left unproductive by that."""
        prods = {nt: [p for p in ps if not p.has_lambda] for nt, ps in self.productions.items()}
        changed = True
        while changed:
            changed = False
            dead = {nt for nt, ps in prods.items() if not ps}
            for nt, ps in prods.items():
                keep = [p for p in ps if not (p.nonterminals() & dead)]
                if len(keep) != len(ps):
                    prods[nt] = keep
                    changed = True
        live = {nt: tuple(ps) for nt, ps in prods.items() if ps}
        return Grammar(self.start, live, self.config)

    @cached_property
    def lambda_free(self) -> "Grammar":
        return self.without_lambda()

    def to_text(self) -> str:
        lines = []
        for nt, prods in self.productions.items():
            alts = []
            for p in prods:
                alts.append(p.text if p.weight == 1.0 else f"{p.text} [{p.weight:g}]")
            lines.append(f"{nt} -> " + " | ".join(alts))
        return "\n".join(lines) + "\n"


_WEIGHT = re.compile(r"^(.*?)\s*\[([0-9.eE+-]+)\]\s*$")


def _split_alternatives(rhs: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in rhs:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "|" and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur).strip())
    return out


def _parse_template(text: str, nts: set[str]) -> Template:
    toks = [t for t, _ in tokenize(text)]
    pos = 0

    def node() -> Template:
        nonlocal pos
        if pos >= len(toks):
            raise GrammarError(f"truncated template {text!r}")
        tok = toks[pos]
        pos += 1
        if tok == ")":
            raise GrammarError(f"unbalanced template {text!r}")
        if tok != "(":
            return ("nt", tok) if tok in nts else ("t", tok)
        head = toks[pos]
        pos += 1
        if head == "lambda":
            binder = toks[pos]
            pos += 1
            if not binder.startswith("@") or binder[1:] not in nts:
                raise GrammarError(f"lambda binder must be @Nonterminal in {text!r}")
            body = node()
            kids = [body]
        else:
            kids = []
        while pos < len(toks) and toks[pos] != ")":
            kids.append(node())
        if pos >= len(toks):
            raise GrammarError(f"unbalanced template {text!r}")
        pos += 1
        if head == "lambda":
            if len(kids) != 1:
                raise GrammarError(f"lambda takes one body in {text!r}")
            return ("lambda", binder[1:], kids[0])
        return ("app", head, tuple(kids))

    t = node()
    if pos != len(toks):
        raise GrammarError(f"trailing tokens in template {text!r}")
    return t


def parse_grammar(text: str, config: GameConfig | None = None, start: str = "Answer") -> Grammar:
    rules: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise GrammarError(f"line {lineno}: expected 'NT -> alternatives'")
        lhs, rhs = (s.strip() for s in line.split("->", 1))
        rules.append((lhs, rhs))
    nts = {lhs for lhs, _ in rules}
    prods: dict[str, list[Production]] = {}
    for lhs, rhs in rules:
        for alt in _split_alternatives(rhs):
            weight = 1.0
            m = _WEIGHT.match(alt)
            if m:
                alt, weight = m.group(1), float(m.group(2))
            if not alt:
                raise GrammarError(f"empty alternative for {lhs}")
            prods.setdefault(lhs, []).append(Production(lhs, _parse_template(alt, nts), weight))
    return Grammar(start, {k: tuple(v) for k, v in prods.items()}, config or GameConfig())


def default_grammar_text(config: GameConfig | None = None) -> str:
    cfg = config or GameConfig()
    ships = " | ".join(cfg.ship_ids)
    digits = " | ".join(str(d) for d in range(10))
    locs = " | ".join(f"{r}{COLUMN_LETTERS[c - 1]}" for r in range(1, cfg.rows + 1) for c in range(1, cfg.cols + 1))
    algebra = "(union {0} {0}) | (intersection {0} {0}) | (setDifference {0} {0}) | (unique {0})"
    return f"""\
Answer -> Bool | Num | Color | Orient | Loc
Bool -> TRUE | FALSE | (and Bool Bool) | (or Bool Bool) | (not Bool) | (touch Ship Ship)
Bool -> (== Bool Bool) | (== Num Num) | (== Color Color) | (== Orient Orient) | (== Loc Loc)
Bool -> (> Num Num) | (< Num Num) | (any BoolBag) | (all BoolBag)
Num -> {digits}
Num -> (+ Num Num) | (- Num Num) | (size Ship) | (rowL Loc) | (colL Loc)
Num -> (setSize LocSet) | (setSize ColorSet) | (++ NumBag) | (++ BoolBag)
Color -> Ship | {WATER} | (color Loc)
Ship -> {ships}
Orient -> H | V | (orient Ship)
Loc -> {locs}
Loc -> (topleft LocSet) | (bottomright LocSet)
LocSet -> (coloredTiles Color) | (set AllTiles) | {algebra.format("LocSet")}
ColorSet -> (set AllColors) | {algebra.format("ColorSet")}
NumBag -> (map (lambda @Ship Num) ColorSet) | (map (lambda @Loc Num) LocSet)
BoolBag -> (map (lambda @Ship Bool) ColorSet) | (map (lambda @Loc Bool) LocSet)
"""


def default_battleship_grammar(config: GameConfig | None = None) -> Grammar:
    """The full grammar, lambda productions included; samplers drop them by default."""
    return parse_grammar(default_grammar_text(config), config)


@dataclass(frozen=True)
class SampleConfig:
    max_depth: int = 12
    max_attempts: int = 1000
    exclude_lambda: bool = True
    filter_depth1: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_depth < 2:
            raise ValueError("max_depth must be at least 2")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")


class _TooDeep(Exception):
    pass


class _Sampler:
    def __init__(self, g: Grammar, max_depth: int, rng: random.Random, counts: Counter | None):
        self.g = g
        self.max_depth = max_depth
        self.rng = rng
        self.counts = counts
        self.cum = {nt: _cumulative(g.weights(nt)) for nt in g.productions}

    def choose(self, nt: str, scope: tuple[tuple[str, str], ...]) -> Template:
        prods = self.g.productions[nt]
        bound = [name for name, vnt in scope if vnt == nt]
        if not bound:
            i = _draw(self.cum[nt], self.rng.random())
            if self.counts is not None:
                self.counts[(nt, i)] += 1
            return prods[i].template
        # Each variable in scope is one extra alternative with the mean weight.
        ws = [p.weight for p in prods]
        mean = sum(ws) / len(ws)
        ws += [mean] * len(bound)
        total = sum(ws)
        i = _draw(_cumulative([w / total for w in ws]), self.rng.random())
        if self.counts is not None:
            self.counts[(nt, i if i < len(prods) else f"var:{bound[i - len(prods)]}")] += 1
        return prods[i].template if i < len(prods) else ("var", bound[i - len(prods)])

    def expand(self, t: Template, depth: int, scope) -> Expr:
        if depth > self.max_depth:
            raise _TooDeep
        kind = t[0]
        if kind == "nt":
            return self.expand(self.choose(t[1], scope), depth, scope)
        if kind == "var":
            return Var(t[1])
        if kind == "t":
            lit_kind = literal_kind(t[1], self.g.config)
            if lit_kind is None:
                raise GrammarError(f"terminal {t[1]!r} is not a literal of the language")
            return Lit(t[1], lit_kind)
        if kind == "lambda":
            name = f"x{len(scope)}"
            return Lambda(name, self.expand(t[2], depth + 1, scope + ((name, t[1]),)))
        return App(t[1], tuple(self.expand(k, depth + 1, scope) for k in t[2]))


def _cumulative(ps) -> list[float]:
    out, acc = [], 0.0
    for p in ps:
        acc += p
        out.append(acc)
    out[-1] = 1.0
    return out


def _draw(cum: list[float], u: float) -> int:
    for i, c in enumerate(cum):
        if u < c:
            return i
    return len(cum) - 1


def _effective(g: Grammar, cfg: SampleConfig) -> Grammar:
    return g.lambda_free if cfg.exclude_lambda else g


def index_rng(seed: int, index: int) -> random.Random:
    """Independent stream for sample ``index`` of a batch (string seeds hash stably)."""
    return random.Random(f"pcfg:{seed}:{index}")


def sample_program(g: Grammar, cfg: SampleConfig, rng: random.Random, counts: Counter | None = None) -> Expr:
    """Draw one program, rejecting derivations deeper than ``max_depth`` and
    (optionally) bare depth-1 programs. ``counts`` collects every production
    draw keyed by ``(nonterminal, production index)``, rejected attempts included."""
    sampler = _Sampler(_effective(g, cfg), cfg.max_depth, rng, counts)
    for _ in range(cfg.max_attempts):
        try:
            e = sampler.expand(("nt", g.start), 1, ())
        except _TooDeep:
            continue
        if cfg.filter_depth1 and ast_depth(e) == 1:
            continue
        return e
    raise SamplingError(f"no acceptable program in {cfg.max_attempts} attempts")


def sample_batch(g: Grammar, cfg: SampleConfig, n: int, counts: Counter | None = None) -> list[Expr]:
    if n < 1:
        raise ValueError("n must be at least 1")
    return [sample_program(g, cfg, index_rng(cfg.seed, i), counts) for i in range(n)]
