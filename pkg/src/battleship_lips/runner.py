"""Experiment runs and reports on disk.

A run directory holds::

    manifest.json            config, seeds, provider metadata, input hashes
    boards/<id>.json         copies of the boards that were scored
    records/<id>.jsonl       one CandidateRecord per proposal sample
    buckets.jsonl            best-of-k bucket estimates per (board, k)

Every random choice derives from the manifest's root seed, so a run with the
replay provider is reproducible byte for byte. Timestamps honour
``SOURCE_DATE_EPOCH`` for the same reason.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import shutil
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .analysis import (
    StatsError,
    bootstrap_ci,
    qq_points,
    summarize,
    summary_csv,
    to_csv,
    type_distribution,
    welch_t_test,
)
from .board import PartialBoard, dump_board, enumerate_hypotheses, load_board
from .dataset import QAExample, load_board_dir
from .lips import CandidateRecord, bucketize_estimate, score_candidates, shuffled_order
from .llm import (
    Mode,
    Provider,
    ProviderError,
    RequestContext,
    ResponseCache,
    build_generation_prompt,
    propose_questions,
    sample_translation_examples,
    translate_question,
)
from .llm.prompts import BoardFormat
from .pcfg import Grammar, SampleConfig, sample_batch

SCHEMA_VERSION = 1


def git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", t)


def derived_rng(seed: int, *parts) -> random.Random:
    return random.Random(":".join([str(seed), *map(str, parts)]))


@dataclass
class RunSpec:
    proposal: str                      # "grammar" or "llm"
    n: int = 100
    ks: tuple[int, ...] = (1, 5, 10, 20, 50)
    seed: int = 0
    label: str = ""
    # grammar
    max_depth: int = 12
    exclude_lambda: bool = True
    # llm
    mode: str = "few_shot"
    board_format: str = "textual"
    translations_per_question: int = 1

    def __post_init__(self) -> None:
        if self.proposal not in ("grammar", "llm"):
            raise ValueError("proposal must be 'grammar' or 'llm'")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.ks or min(self.ks) < 1:
            raise ValueError("k values must be positive")
        if self.proposal == "llm":
            Mode(self.mode)
            BoardFormat.parse(self.board_format)
        if not self.label:
            self.label = "grammar" if self.proposal == "grammar" else f"llm-{self.mode}-{self.board_format}"


@dataclass
class RunResult:
    records: dict[str, list[CandidateRecord]] = field(default_factory=dict)
    buckets: list[dict] = field(default_factory=list)
    error: str | None = None


def _bucket_rows(board_id: str, records: Sequence[CandidateRecord], ks: Sequence[int], seed: int) -> list[dict]:
    order = shuffled_order(len(records), derived_rng(seed, "order", board_id))
    rows = []
    for k in ks:
        if k > len(records):
            continue
        res = bucketize_estimate(records, k, derived_rng(seed, "ties", board_id, k), order)
        rows.append({
            "board_id": board_id,
            "k": k,
            "n_buckets": res.n_buckets,
            "mean_eig": res.mean_eig,
            "n_all_invalid": res.n_all_invalid,
            "mean_eig_dropping_invalid": res.mean_eig_dropping_invalid,
            "scores": res.scores,
            "best_indices": [s.record.provenance.get("index") if s.record else None for s in res.selections],
        })
    return rows


def run_grammar(spec: RunSpec, boards: Mapping[str, PartialBoard], grammar: Grammar) -> RunResult:
    """One shared sample set, scored against every board."""
    cfg = SampleConfig(max_depth=spec.max_depth, exclude_lambda=spec.exclude_lambda, seed=spec.seed)
    programs = sample_batch(grammar, cfg, spec.n)
    result = RunResult()
    for board_id, board in boards.items():
        S = enumerate_hypotheses(board)
        prov = [{"proposal": "grammar", "board_id": board_id, "index": i} for i in range(spec.n)]
        recs = score_candidates([(None, p) for p in programs], S, prov)
        result.records[board_id] = recs
        result.buckets += _bucket_rows(board_id, recs, spec.ks, spec.seed)
    return result


def run_llm(
    spec: RunSpec,
    boards: Mapping[str, PartialBoard],
    provider: Provider,
    pool: Sequence[QAExample],
    shot_boards: Mapping[str, PartialBoard],
    cache: ResponseCache | None = None,
) -> RunResult:
    """Per sample: a freshly drawn prompt, one question, one translation.

    Stops at the first provider failure, keeping the boards already finished.
    """
    result = RunResult()
    for board_id, board in boards.items():
        S = enumerate_hypotheses(board)
        raw, prov = [], []
        try:
            for i in range(spec.n):
                bundle = build_generation_prompt(
                    board, spec.mode, spec.board_format, pool, derived_rng(spec.seed, "prompt", board_id, i),
                    target_board_id=board_id, boards=shot_boards,
                )
                (question,) = propose_questions(
                    provider, bundle, 1, context=RequestContext(board_id, "question", i), cache=cache
                )
                examples = sample_translation_examples(pool, board_id, derived_rng(spec.seed, "translate", board_id, i))
                program, raw_text = translate_question(
                    provider, question, examples, config=board.config, samples=spec.translations_per_question,
                    context=RequestContext(board_id, "translation", i * spec.translations_per_question), cache=cache,
                )
                raw.append((question, program))
                prov.append({"proposal": "llm", "board_id": board_id, "index": i, "raw_translation": raw_text})
        except ProviderError as err:
            result.error = f"board {board_id}: {err}"
            return result
        recs = score_candidates(raw, S, prov)
        result.records[board_id] = recs
        result.buckets += _bucket_rows(board_id, recs, spec.ks, spec.seed)
    return result


def clear_run(out: Path) -> None:
    """Remove the artifacts of an earlier run (and nothing else) from ``out``."""
    for sub in ("boards", "records"):
        if (out / sub).is_dir():
            shutil.rmtree(out / sub)
    for name in ("manifest.json", "buckets.jsonl"):
        (out / name).unlink(missing_ok=True)


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=False)


def write_run(
    out: Path,
    spec: RunSpec,
    boards: Mapping[str, PartialBoard],
    result: RunResult,
    inputs: Mapping[str, bytes],
    provider: dict | None,
    command: Sequence[str],
) -> None:
    out = Path(out)
    (out / "boards").mkdir(parents=True, exist_ok=True)
    (out / "records").mkdir(exist_ok=True)
    for board_id, board in boards.items():
        (out / "boards" / f"{board_id}.json").write_text(dump_board(board), encoding="utf-8")
    for board_id, recs in result.records.items():
        text = "".join(_dumps(r.to_dict()) + "\n" for r in recs)
        (out / "records" / f"{board_id}.jsonl").write_text(text, encoding="utf-8")
    (out / "buckets.jsonl").write_text("".join(_dumps(b) + "\n" for b in result.buckets), encoding="utf-8")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": list(command),
        "config": asdict(spec),
        "seeds": {"root": spec.seed},
        "provider": provider,
        "inputs": {name: git_blob_hash(data) for name, data in sorted(inputs.items())},
        "boards": list(boards),
        "completed_boards": list(result.records),
        "status": "ok" if result.error is None else f"failed: {result.error}",
        "timestamp": timestamp(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


@dataclass
class LoadedRun:
    path: Path
    manifest: dict
    records: dict[str, list[CandidateRecord]]
    buckets: list[dict]

    @property
    def label(self) -> str:
        return self.manifest["config"]["label"]

    def all_records(self) -> list[CandidateRecord]:
        return [r for recs in self.records.values() for r in recs]


def load_run(path) -> LoadedRun:
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{path} is not a run directory (no manifest.json)")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    records = {}
    for board_id in manifest["completed_boards"]:
        lines = (path / "records" / f"{board_id}.jsonl").read_text(encoding="utf-8").splitlines()
        records[board_id] = [CandidateRecord.from_dict(json.loads(l)) for l in lines if l.strip()]
    buckets = [json.loads(l) for l in (path / "buckets.jsonl").read_text(encoding="utf-8").splitlines() if l.strip()]
    return LoadedRun(path, manifest, records, buckets)


def score_human(examples: Sequence[QAExample], boards: Mapping[str, PartialBoard]) -> list[CandidateRecord]:
    out = []
    by_id: dict[str, list[QAExample]] = {}
    for ex in examples:
        by_id.setdefault(ex.board_id, []).append(ex)
    for board_id, exs in by_id.items():
        if board_id not in boards:
            raise FileNotFoundError(f"no board file for human data board {board_id!r}")
        S = enumerate_hypotheses(boards[board_id])
        prov = [{"proposal": "human", "board_id": board_id, "index": i} for i in range(len(exs))]
        out += score_candidates([(ex.question, ex.program) for ex in exs], S, prov)
    return out


def _selected_records(run: LoadedRun, k: int) -> list[CandidateRecord]:
    placeholder = CandidateRecord(None, None, False, None, None, None, None, error="all candidates invalid")
    out = []
    for row in run.buckets:
        if row["k"] != k:
            continue
        recs = run.records[row["board_id"]]
        by_index = {r.provenance.get("index"): r for r in recs}
        out += [placeholder if i is None else by_index[i] for i in row["best_indices"]]
    return out


def build_report(runs: Sequence[LoadedRun], human: Sequence[CandidateRecord] | None = None,
                 n_boot: int = 10_000, seed: int = 0) -> dict[str, str]:
    """CSV/TSV tables keyed by file name."""
    files: dict[str, str] = {}
    rows = []
    if human:
        rows.append(summarize(human, "Human", 1))
    curve = []
    for run in runs:
        ks = sorted({b["k"] for b in run.buckets})
        for k in ks:
            rows.append(summarize(_selected_records(run, k), run.label, k))
            scores = [s for b in run.buckets if b["k"] == k for s in b["scores"]]
            lo, hi = bootstrap_ci(scores, n_boot=n_boot, seed=seed)
            curve.append([run.label, k, f"{sum(scores) / len(scores):.6f}", f"{lo:.6f}", f"{hi:.6f}", len(scores)])
    files["summary.csv"] = summary_csv(rows)
    files["eig_vs_k.tsv"] = to_csv(["model", "k", "mean_eig", "ci_lo", "ci_hi", "n_buckets"], curve, "\t")

    types = []
    groups = [("Human", list(human))] if human else []
    groups += [(run.label, run.all_records()) for run in runs]
    for label, recs in groups:
        for t, p in type_distribution(recs).items():
            types.append([label, t, f"{p:.6f}"])
    files["types.tsv"] = to_csv(["model", "type", "proportion"], types, "\t")

    samples = {label: [r.score for r in recs] for label, recs in groups}
    welch = []
    labels = list(samples)
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            try:
                res = welch_t_test(samples[a], samples[b])
                welch.append([a, b, f"{res.t:.6f}", f"{res.df:.6f}", f"{res.p:.6g}"])
            except StatsError as err:
                welch.append([a, b, "", "", f"n/a ({err})"])
    files["welch.tsv"] = to_csv(["model_a", "model_b", "t", "df", "p"], welch, "\t")

    if human:
        qq = []
        for run in runs:
            d = qq_points(samples[run.label], samples["Human"])
            qq += [[run.label, f"{p:g}", f"{m:.6f}", f"{h:.6f}"] for p, m, h in zip(d.percentiles, d.model, d.human)]
        files["qq.tsv"] = to_csv(["model", "percentile", "model_eig", "human_eig"], qq, "\t")
    return files


def load_boards(paths: Sequence[str | Path]) -> dict[str, PartialBoard]:
    """Board files or directories of board files, keyed by file stem."""
    boards: dict[str, PartialBoard] = {}
    for p in map(Path, paths):
        found = load_board_dir(p) if p.is_dir() else {p.stem: load_board(p)}
        for k, v in found.items():
            if k in boards:
                raise ValueError(f"duplicate board id {k!r}")
            boards[k] = v
    return boards


def input_bytes(paths: Sequence[str | Path]) -> dict[str, bytes]:
    out = {}
    for p in map(Path, paths):
        files = sorted(p.glob("*.json")) if p.is_dir() else [p]
        for f in files:
            out[f.name] = f.read_bytes()
    return out

