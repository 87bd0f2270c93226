"""Corpus ingestion: sliding windows split into fixed-size token groups.

Windows start at ``0, stride, 2*stride, ...`` and stop after the first window
that reaches the end of the document. Each window is cut into groups of at
most ``tau`` tokens and every group becomes one memory entry. Without a
language model there are no real keys and values, so each chunk gets seeded
Gaussian ones, with ``semantic_keys`` rows replaced by the projected chunk
embedding so the pair weights track the chunk's content.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .._validation import check_positive_int, check_real, check_uint64
from ..embedder import tokenize
from ..exceptions import ConfigError, CorpusError
from ..memory_bank import MemoryBank


@dataclass(frozen=True)
class IngestConfig:
    window_tokens: int = 512
    stride_tokens: int = 512
    tau: int = 128
    seed: int = 0
    semantic_keys: int = 1
    semantic_gain: float = 1.0

    def __post_init__(self):
        check_positive_int(self.window_tokens, "window_tokens")
        check_positive_int(self.stride_tokens, "stride_tokens")
        check_positive_int(self.tau, "tau")
        check_uint64(self.seed, "seed")
        check_positive_int(self.semantic_keys, "semantic_keys", minimum=0)
        check_real(self.semantic_gain, "semantic_gain", low=0.0)
        if self.tau > self.window_tokens:
            raise ConfigError(f"tau ({self.tau}) exceeds window_tokens ({self.window_tokens})")


def window_spans(n_tokens: int, window: int, stride: int) -> list[tuple[int, int]]:
    spans = []
    for start in range(0, n_tokens, stride):
        end = min(start + window, n_tokens)
        spans.append((start, end))
        if end == n_tokens:
            break
    return spans


def chunk_spans(n_tokens: int, cfg: IngestConfig) -> list[tuple[int, int]]:
    """Token spans of every chunk, in window order (overlapping windows repeat tokens)."""
    out = []
    for w_start, w_end in window_spans(n_tokens, cfg.window_tokens, cfg.stride_tokens):
        for c_start in range(w_start, w_end, cfg.tau):
            out.append((c_start, min(c_start + cfg.tau, w_end)))
    return out


def expected_chunk_count(n_tokens: int, window: int, stride: int, tau: int) -> int:
    """Closed form for ``len(chunk_spans(...))``."""
    if n_tokens <= 0:
        return 0
    n_windows = min(math.ceil(n_tokens / stride), 1 + math.ceil(max(n_tokens - window, 0) / stride))
    last = n_tokens - (n_windows - 1) * stride
    return (n_windows - 1) * math.ceil(window / tau) + math.ceil(min(last, window) / tau)


def synthetic_kv(
    bank: MemoryBank,
    embedding: np.ndarray,
    n: int,
    rng: np.random.Generator,
    semantic_keys: int = 1,
    semantic_gain: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    keys = rng.standard_normal((n, bank.d_model))
    values = rng.standard_normal((n, bank.d_model))
    m = min(semantic_keys, n)
    if m:
        rows = rng.choice(n, size=m, replace=False)
        keys[rows] = semantic_gain * bank.project(embedding)
    return keys, values


def chunk_rng(seed: int, doc_id: int, start: int) -> np.random.Generator:
    return np.random.default_rng([seed, doc_id, start])


def insert_text_chunk(
    bank: MemoryBank,
    doc_id: int,
    span: tuple[int, int],
    text: str,
    cfg: IngestConfig,
    semantic_gain: float | None = None,
) -> int:
    embedding = bank.embed(text)
    n = span[1] - span[0]
    keys, values = synthetic_kv(
        bank,
        embedding,
        n,
        chunk_rng(cfg.seed, doc_id, span[0]),
        cfg.semantic_keys,
        cfg.semantic_gain if semantic_gain is None else semantic_gain,
    )
    return bank.insert_chunk(doc_id, span, text, keys, values, embedding=embedding)


def ingest_tokens(tokens: list[str], doc_id: int, cfg: IngestConfig, bank: MemoryBank) -> int:
    count = 0
    for start, end in chunk_spans(len(tokens), cfg):
        insert_text_chunk(bank, doc_id, (start, end), " ".join(tokens[start:end]), cfg)
        count += 1
    return count


def read_documents(path) -> Iterator[str]:
    """Yield documents from a UTF-8 file.

    ``.jsonl``/``.ndjson`` files, or files whose first non-blank character is
    ``{``, are read as one JSON record per line with a ``text`` field. Anything
    else is a single plain-text document.
    """
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    stripped = raw.lstrip()
    if path.suffix in (".jsonl", ".ndjson") or stripped.startswith("{"):
        for lineno, line in enumerate(raw.splitlines(), 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON record: {exc}") from exc
            if not isinstance(record, dict) or not isinstance(record.get("text"), str):
                raise CorpusError(f"{path}:{lineno}: record has no string 'text' field")
            yield record["text"]
    elif stripped:
        yield raw


def ingest_documents(docs: Iterable[str], cfg: IngestConfig, bank: MemoryBank, first_doc_id: int = 0) -> int:
    total = 0
    for doc_id, text in enumerate(docs, first_doc_id):
        total += ingest_tokens(tokenize(text), doc_id, cfg, bank)
    return total


def ingest_corpus(path, cfg: IngestConfig, bank: MemoryBank) -> int:
    """Chunk and insert every document in ``path``; returns chunks inserted."""
    if cfg.tau > bank.tau:
        raise ConfigError(f"ingest tau ({cfg.tau}) exceeds the bank's group size ({bank.tau})")
    return ingest_documents(read_documents(path), cfg, bank)
