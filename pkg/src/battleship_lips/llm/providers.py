"""Completion providers: an HTTP chat-completion client and a replay stand-in.

A provider turns a message list into ``n`` sampled text completions. Request
identity is the sha256 digest of the messages plus decoding parameters; the
cache and the replay fixtures are both keyed by it.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .prompts import ChatMessage, encode_prepended

log = logging.getLogger(__name__)


class ProviderError(RuntimeError):
    """Transport or protocol failure that survived the retry policy."""


@dataclass(frozen=True)
class RequestContext:
    """Where a request sits in a run; replay fixtures may be keyed by it."""

    board_id: str = ""
    purpose: str = "question"
    index: int = 0


@dataclass(frozen=True)
class ProviderSpec:
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4"
    temperature: float = 1.0
    top_p: float = 1.0
    max_tokens: int = 128
    stop: tuple[str, ...] = ()
    role_encoding: str = "metadata"  # or "prepended"
    max_in_flight: int = 4
    max_retries: int = 5
    backoff_seconds: float = 1.0
    timeout_seconds: float = 60.0
    api_key_env: str = "LIPS_API_KEY"
    batch_size: int = 10  # completions requested per HTTP call

    def __post_init__(self) -> None:
        if self.role_encoding not in ("metadata", "prepended"):
            raise ValueError("role_encoding must be 'metadata' or 'prepended'")
        if self.max_in_flight < 1 or self.batch_size < 1:
            raise ValueError("max_in_flight and batch_size must be positive")

    def decoding(self) -> dict:
        return {
            "model": self.model,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "stop": list(self.stop),
            "role_encoding": self.role_encoding,
        }


def request_digest(messages: Sequence[ChatMessage], decoding: dict) -> str:
    doc = {"messages": [m.to_dict() for m in messages], "decoding": decoding}
    blob = json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Provider(Protocol):
    name: str

    def decoding(self) -> dict: ...

    def complete(self, messages: Sequence[ChatMessage], n: int, context: RequestContext) -> list[str]: ...


class ChatCompletionProvider:
    """OpenAI-style HTTP endpoint (``/chat/completions`` or ``/completions``)."""

    name = "chat-completion"

    def __init__(self, spec: ProviderSpec, client: httpx.Client | None = None, sleep=time.sleep):
        self.spec = spec
        key = os.environ.get(spec.api_key_env, "")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self.client = client or httpx.Client(timeout=spec.timeout_seconds, headers=headers)
        self._slots = threading.Semaphore(spec.max_in_flight)
        self._sleep = sleep
        self.calls = 0

    def decoding(self) -> dict:
        return self.spec.decoding()

    def _payload(self, messages: Sequence[ChatMessage], n: int) -> tuple[str, dict]:
        s = self.spec
        body = {"model": s.model, "n": n, "temperature": s.temperature, "top_p": s.top_p, "max_tokens": s.max_tokens}
        if s.stop:
            body["stop"] = list(s.stop)
        if s.role_encoding == "metadata":
            body["messages"] = [m.to_dict() for m in messages]
            return s.endpoint.rstrip("/") + "/chat/completions", body
        body["prompt"] = encode_prepended(messages)
        return s.endpoint.rstrip("/") + "/completions", body

    @staticmethod
    def _texts(doc: dict) -> list[str]:
        try:
            out = []
            for choice in doc["choices"]:
                text = choice["message"]["content"] if "message" in choice else choice["text"]
                out.append(text or "")
            return out
        except (KeyError, TypeError) as err:
            raise ProviderError(f"unexpected response shape: missing {err}") from None

    def _request(self, messages: Sequence[ChatMessage], n: int) -> list[str]:
        url, body = self._payload(messages, n)
        delay = self.spec.backoff_seconds
        last = "no attempts made"
        for attempt in range(self.spec.max_retries + 1):
            with self._slots:
                self.calls += 1
                try:
                    resp = self.client.post(url, json=body)
                except httpx.HTTPError as err:
                    resp, last = None, f"transport error: {err}"
            if resp is not None:
                if resp.status_code == 200:
                    return self._texts(resp.json())
                last = f"HTTP {resp.status_code}: {resp.text[:200]}"
                if resp.status_code not in (408, 409, 429) and resp.status_code < 500:
                    break
            if attempt < self.spec.max_retries:
                log.warning("provider request failed (%s); retrying in %.1fs", last, delay)
                self._sleep(delay)
                delay *= 2
        raise ProviderError(f"provider request failed: {last}")

    def complete(self, messages: Sequence[ChatMessage], n: int, context: RequestContext = RequestContext()) -> list[str]:
        if n <= 0:
            return []
        sizes = [min(self.spec.batch_size, n - i) for i in range(0, n, self.spec.batch_size)]
        with ThreadPoolExecutor(max_workers=self.spec.max_in_flight) as pool:
            parts = list(pool.map(lambda k: self._request(messages, k), sizes))
        return [t for part in parts for t in part][:n]


class ReplayProvider:
    """Serves recorded completions from a JSONL fixture.

    Each line is ``{"digest": ..., "completion": ...}`` or
    ``{"board_id": ..., "purpose": ..., "index": ..., "completion": ...}``.
    Digest entries for one request are served in file order; keyed entries
    serve request ``index`` and the ``n - 1`` indices after it.
    """

    name = "replay"

    def __init__(self, entries: Sequence[dict], label: str = "replay"):
        self.by_digest: dict[str, list[str]] = {}
        self.by_key: dict[tuple[str, str, int], str] = {}
        self.label = label
        self.calls = 0
        for i, e in enumerate(entries):
            if "completion" not in e:
                raise ValueError(f"replay entry {i} has no 'completion'")
            if "digest" in e:
                self.by_digest.setdefault(e["digest"], []).append(str(e["completion"]))
            else:
                key = (str(e["board_id"]), str(e["purpose"]), int(e["index"]))
                self.by_key[key] = str(e["completion"])

    @classmethod
    def from_file(cls, path) -> "ReplayProvider":
        text = Path(path).read_text(encoding="utf-8")
        entries = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls(entries, label=Path(path).name)

    def decoding(self) -> dict:
        return {"model": f"replay:{self.label}"}

    def complete(self, messages: Sequence[ChatMessage], n: int, context: RequestContext = RequestContext()) -> list[str]:
        if n <= 0:
            return []
        self.calls += 1
        digest = request_digest(messages, self.decoding())
        recorded = self.by_digest.get(digest)
        if recorded is not None:
            if len(recorded) < n:
                raise ProviderError(f"replay fixture has {len(recorded)} completions for {digest[:12]}, need {n}")
            return recorded[:n]
        out = []
        for i in range(context.index, context.index + n):
            key = (context.board_id, context.purpose, i)
            if key not in self.by_key:
                raise ProviderError(f"replay fixture has no completion for digest {digest[:12]} or key {key}")
            out.append(self.by_key[key])
        return out


@dataclass
class ResponseCache:
    """On-disk completions keyed by request digest: ``<root>/<dd>/<digest>.json``."""

    root: Path
    hits: int = field(default=0)

    def __post_init__(self) -> None:
        self.root = Path(self.root)

    def _path(self, digest: str) -> Path:
        return self.root / digest[:2] / f"{digest}.json"

    def get(self, digest: str) -> list[str]:
        p = self._path(digest)
        if not p.exists():
            return []
        return list(json.loads(p.read_text(encoding="utf-8"))["completions"])

    def put(self, digest: str, completions: list[str], provider: dict) -> None:
        p = self._path(digest)
        p.parent.mkdir(parents=True, exist_ok=True)
        doc = {"digest": digest, "completions": completions, "provider": provider, "created": _timestamp()}
        tmp = p.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
        tmp.write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
        os.replace(tmp, p)


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", t)


def sampled(provider: Provider, messages: Sequence[ChatMessage], n: int,
            context: RequestContext = RequestContext(), cache: ResponseCache | None = None) -> list[str]:
    """``n`` completions, reusing cached ones for the same digest first."""
    if n <= 0:
        return []
    digest = request_digest(messages, provider.decoding())
    have = cache.get(digest) if cache is not None else []
    if len(have) >= n:
        cache.hits += 1
        return have[:n]
    ctx = RequestContext(context.board_id, context.purpose, context.index + len(have))
    fresh = provider.complete(messages, n - len(have), ctx)
    if len(fresh) != n - len(have):
        raise ProviderError(f"provider returned {len(fresh)} completions, expected {n - len(have)}")
    allc = have + list(fresh)
    if cache is not None:
        cache.put(digest, allc, {"name": provider.name, **provider.decoding()})
    return allc


def provider_metadata(provider: Provider) -> dict:
    meta = {"name": provider.name, **provider.decoding()}
    spec = getattr(provider, "spec", None)
    if spec is not None:
        meta.update(asdict(spec))
    return meta
