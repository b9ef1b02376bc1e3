"""Command-line entry point: ``lips board|eig|grammar|run|report``.

Exit codes: 0 success, 2 bad input (board, program, config, data), 3 provider failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .analysis import StatsError
from .board import (
    BoardError,
    dump_board,
    enumerate_hypotheses,
    has_consistent_board,
    load_board,
    parse_board,
    render_grid,
    render_textual,
)
from .dataset import DatasetError, load_board_dir, load_dataset, load_synthetic
from .dsl import DSLError, parse_program, pretty_print, typecheck
from .eig import answer_distribution, eig, eig_monte_carlo
from .llm import ChatCompletionProvider, PromptError, ProviderError, ProviderSpec, ReplayProvider, ResponseCache
from .llm.providers import provider_metadata
from .pcfg import GrammarError, SampleConfig, SamplingError, default_battleship_grammar, parse_grammar, sample_batch
from .runner import RunSpec, clear_run, build_report, input_bytes, load_boards, load_run, run_grammar, run_llm, score_human, write_run

EXIT_OK, EXIT_INPUT, EXIT_PROVIDER = 0, 2, 3

INPUT_ERRORS = (BoardError, DSLError, DatasetError, PromptError, GrammarError, SamplingError, StatsError,
                FileNotFoundError, IsADirectoryError, ValueError, KeyError)


class InputError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# board


def cmd_board(args) -> int:
    path = Path(args.board)
    if args.action == "validate":
        board = parse_board(path.read_text(encoding="utf-8"), check_consistent=False)
        if not has_consistent_board(board):
            print(f"{path}: inconsistent: no placement of the ships matches the revealed tiles", file=sys.stderr)
            return EXIT_INPUT
        print(f"{path}: ok ({board.config.rows}x{board.config.cols}, {len(list(board.revealed()))} revealed tiles)")
        return EXIT_OK
    board = load_board(path)
    if args.action == "render":
        if args.format == "grid":
            sys.stdout.write(render_grid(board))
        elif args.format == "textual":
            sys.stdout.write(render_textual(board))
        else:
            sys.stdout.write(dump_board(board))
        return EXIT_OK
    print(len(enumerate_hypotheses(board)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# eig


def _json_value(v):
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    if isinstance(v, bool) or isinstance(v, int):
        return v
    return str(v)


def cmd_eig(args) -> int:
    board = load_board(args.board)
    program = parse_program(args.program, board.config)
    typecheck(program)
    S = enumerate_hypotheses(board)
    report: dict = {"program": pretty_print(program), "hypotheses": len(S)}
    if args.monte_carlo:
        est = eig_monte_carlo(program, S, args.monte_carlo, args.seed)
        report.update(eig_bits=est.bits, stderr=est.stderr, samples=est.n_samples)
    else:
        score = eig(program, S)
        dist = answer_distribution(program, S)
        report.update(
            eig_bits=score.bits,
            prior_entropy=score.prior_entropy,
            answers=[{"answer": _json_value(y), "p": p} for y, p in dist.entries],
        )
    if args.json:
        print(json.dumps(report, indent=2))
        return EXIT_OK
    print(f"program     {report['program']}")
    print(f"hypotheses  {report['hypotheses']}")
    if "stderr" in report:
        print(f"EIG         {report['eig_bits']:.6f} bits (Monte Carlo, {report['samples']} samples, se {report['stderr']:.6f})")
        return EXIT_OK
    print(f"EIG         {report['eig_bits']:.6f} bits")
    for a in report["answers"]:
        print(f"  {json.dumps(a['answer']):<24} {a['p']:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# grammar


def cmd_grammar(args) -> int:
    g = parse_grammar(Path(args.grammar).read_text(encoding="utf-8")) if args.grammar else default_battleship_grammar()
    if args.sample == 0:
        sys.stdout.write(g.to_text())
        return EXIT_OK
    cfg = SampleConfig(max_depth=args.max_depth, exclude_lambda=not args.allow_lambda, seed=args.seed)
    for e in sample_batch(g, cfg, args.sample):
        print(pretty_print(e))
    return EXIT_OK


# ---------------------------------------------------------------------------
# run


def _provider(args):
    if args.provider == "replay":
        if not args.replay:
            raise InputError("--provider replay needs --replay FILE")
        return ReplayProvider.from_file(args.replay)
    spec = ProviderSpec(
        endpoint=args.endpoint, model=args.model, temperature=args.temperature, top_p=args.top_p,
        max_tokens=args.max_tokens, role_encoding=args.role_encoding, max_in_flight=args.max_in_flight,
        api_key_env=args.api_key_env,
    )
    return ChatCompletionProvider(spec)


def _recorded_command(argv: Sequence[str]) -> list[str]:
    """argv with the output directory masked, so reruns elsewhere match byte for byte."""
    out, skip = [], False
    for a in argv:
        if skip:
            out.append("<out>")
            skip = False
        elif a == "--out":
            out.append(a)
            skip = True
        elif a.startswith("--out="):
            out.append("--out=<out>")
        else:
            out.append(a)
    return out


def cmd_run(args, argv: Sequence[str]) -> int:
    spec = RunSpec(
        proposal=args.proposal, n=args.n, ks=args.k, seed=args.seed, label=args.label or "",
        max_depth=args.max_depth, exclude_lambda=not args.allow_lambda,
        mode=args.mode, board_format=args.format, translations_per_question=args.translations,
    )
    boards = load_boards(args.boards)
    inputs = {f"board:{k}": v for k, v in input_bytes(args.boards).items()}
    out = Path(args.out)
    if out.exists() and any(out.iterdir()):
        if not args.force:
            raise InputError(f"{out} exists and is not empty (use --force to overwrite)")
        clear_run(out)
    if spec.proposal == "grammar":
        if args.grammar:
            text = Path(args.grammar).read_text(encoding="utf-8")
            grammar = parse_grammar(text)
            inputs["grammar"] = text.encode("utf-8")
        else:
            grammar = default_battleship_grammar()
        result = run_grammar(spec, boards, grammar)
        provider_meta = None
    else:
        if args.dataset:
            pool = load_dataset(args.dataset)
            shot_boards = load_board_dir(args.shot_boards) if args.shot_boards else boards
            inputs["dataset"] = Path(args.dataset).read_bytes()
        else:
            shot_boards, pool = load_synthetic()
        provider = _provider(args)
        if args.replay:
            inputs["replay"] = Path(args.replay).read_bytes()
        cache = ResponseCache(Path(args.cache)) if args.cache else None
        result = run_llm(spec, boards, provider, pool, shot_boards, cache)
        provider_meta = provider_metadata(provider)
    write_run(out, spec, boards, result, inputs, provider_meta, _recorded_command(argv))
    if result.error:
        print(f"provider failure, partial results kept in {out}: {result.error}", file=sys.stderr)
        return EXIT_PROVIDER
    n_rec = sum(len(r) for r in result.records.values())
    print(f"wrote {n_rec} records for {len(result.records)} board(s) to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    runs = [load_run(p) for p in args.runs]
    human = None
    if args.human:
        if not args.human_boards:
            raise InputError("--human needs --human-boards DIR")
        human = score_human(load_dataset(args.human), load_board_dir(args.human_boards))
    files = build_report(runs, human, n_boot=args.n_boot, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    print(f"wrote {', '.join(sorted(files))} to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lips", description="Question selection by expected information gain for Battleship.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("board", help="render, validate or count hypotheses for a board file")
    b.add_argument("action", choices=["render", "validate", "hypotheses"])
    b.add_argument("board")
    b.add_argument("--format", choices=["grid", "textual", "json"], default="grid")

    e = sub.add_parser("eig", help="score a program against a board")
    e.add_argument("board")
    e.add_argument("program")
    e.add_argument("--json", action="store_true")
    e.add_argument("--monte-carlo", type=int, default=0, metavar="N", help="estimate from N sampled boards")
    e.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("grammar", help="print the grammar or sample programs from it")
    g.add_argument("--grammar", help="grammar text file (default: built-in)")
    g.add_argument("--sample", type=int, default=0, metavar="N")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-depth", type=int, default=12)
    g.add_argument("--allow-lambda", action="store_true")

    r = sub.add_parser("run", help="sample candidates, score them and bucket by k")
    r.add_argument("--proposal", choices=["grammar", "llm"], required=True)
    r.add_argument("--boards", nargs="+", required=True, help="board files or directories")
    r.add_argument("--out", required=True)
    r.add_argument("--force", action="store_true")
    r.add_argument("--n", type=int, default=100, help="samples per board (grammar: one shared set)")
    r.add_argument("--k", type=_int_list, default=(1, 5, 10, 20, 50), help="comma-separated bucket sizes")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--label")
    r.add_argument("--grammar")
    r.add_argument("--max-depth", type=int, default=12)
    r.add_argument("--allow-lambda", action="store_true")
    r.add_argument("--mode", choices=["zero_shot", "few_shot"], default="few_shot")
    r.add_argument("--format", default="textual", help="textual, grid or no_board")
    r.add_argument("--translations", type=int, default=1, help="translation samples per question")
    r.add_argument("--dataset", help="human question JSONL for prompts (default: bundled synthetic data)")
    r.add_argument("--shot-boards", help="directory with the dataset's board files")
    r.add_argument("--provider", choices=["http", "replay"], default="replay")
    r.add_argument("--replay", help="replay fixture JSONL")
    r.add_argument("--cache", help="response cache directory")
    r.add_argument("--endpoint", default="https://api.openai.com/v1")
    r.add_argument("--model", default="gpt-4")
    r.add_argument("--temperature", type=float, default=1.0)
    r.add_argument("--top-p", type=float, default=1.0)
    r.add_argument("--max-tokens", type=int, default=128)
    r.add_argument("--role-encoding", choices=["metadata", "prepended"], default="metadata")
    r.add_argument("--max-in-flight", type=int, default=4)
    r.add_argument("--api-key-env", default="LIPS_API_KEY")

    rep = sub.add_parser("report", help="summary tables, EIG-vs-k curves, Q-Q data and tests")
    rep.add_argument("runs", nargs="+")
    rep.add_argument("--out", required=True)
    rep.add_argument("--human", help="human question JSONL")
    rep.add_argument("--human-boards", help="directory with the human data's board files")
    rep.add_argument("--n-boot", type=int, default=10_000)
    rep.add_argument("--seed", type=int, default=0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "board":
            return cmd_board(args)
        if args.command == "eig":
            return cmd_eig(args)
        if args.command == "grammar":
            return cmd_grammar(args)
        if args.command == "run":
            return cmd_run(args, argv)
        return cmd_report(args)
    except ProviderError as err:
        print(f"provider error: {err}", file=sys.stderr)
        return EXIT_PROVIDER
    except (InputError, *INPUT_ERRORS) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
