"""Capacity-bounded store of ranked chunk entries.

Each entry holds one chunk's retrieval embedding plus its token-level keys and
values. On insertion every key is scored against the chunk embedding (mapped
into key space by a fixed random-sign projection) and those per-pair weights
are kept alongside the pairs. When the bank would overflow, whole entries are
evicted lowest-priority first, where priority is the entry's strongest pair
weight boosted by how often it has been retrieved.

Concurrency: single writer, many readers. Retrieval only reads; insertion,
eviction, pruning and usage updates need exclusive access.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from ._validation import (
    check_matrix,
    check_positive_int,
    check_real,
    check_uint64,
)
from .embedder import EmbedderConfig, embed_text
from .exceptions import ConfigError, DimensionError, GroupSizeError
from .relevance import relevance_scores

DEFAULT_CAPACITY_PAIRS = 32768
DEFAULT_TAU = 128
DEFAULT_D_MODEL = 64


@dataclass
class MemoryEntry:
    chunk_id: int
    doc_id: int
    token_span: tuple[int, int]
    embedding: np.ndarray
    keys: np.ndarray
    values: np.ndarray
    pair_scores: np.ndarray
    usage: float = 0.0
    inserted_at: int = 0

    @property
    def n_pairs(self) -> int:
        return self.keys.shape[0]

    @property
    def max_score(self) -> float:
        return float(self.pair_scores.max())


def eviction_priority(entry: MemoryEntry, usage_boost: float) -> float:
    """``max_j s_j * (1 + usage_boost * usage)``; higher means keep."""
    return entry.max_score * (1.0 + usage_boost * entry.usage)


def projection_matrix(seed: int, d_model: int, d_ret: int) -> np.ndarray:
    """Fixed +/-1 matrix of shape ``(d_model, d_ret)`` derived from ``seed``.

    Bits of the raw Philox-4x64 stream (key = seed) are consumed row-major,
    least significant bit first; a set bit is +1.
    """
    total = d_model * d_ret
    raw = np.random.Philox(key=seed).random_raw(-(-total // 64))
    bits = np.unpackbits(raw.astype("<u8").view(np.uint8), bitorder="little")[:total]
    return (bits.astype(np.float64) * 2.0 - 1.0).reshape(d_model, d_ret)


@dataclass
class _Index:
    """Column view of the bank used by the exhaustive scan."""

    chunk_ids: np.ndarray
    embeddings: np.ndarray
    max_scores: np.ndarray
    entries: list = field(default_factory=list)


class MemoryBank:
    """Ranked key/value memory with a pair-count capacity.

    Parameters
    ----------
    d_model : int
        Width of stored keys and values.
    capacity_pairs : int
        Maximum number of key/value pairs held across all entries.
    tau : int
        Group size: maximum pairs per chunk.
    embedder : EmbedderConfig, optional
        Text embedder settings; its ``dim`` is the retrieval dimension.
    projection_seed : int
        Seed of the retrieval-to-key-space projection.
    usage_decay : float in (0, 1)
        Per-event decay of the usage statistic.
    usage_boost : float >= 0
        Weight of usage in the eviction priority. Zero gives pure score-based
        eviction.
    score_floor : float >= 0
        Entries whose eviction priority falls below this are dropped before
        each insertion. Zero disables threshold pruning.
    """

    def __init__(
        self,
        d_model: int = DEFAULT_D_MODEL,
        capacity_pairs: int = DEFAULT_CAPACITY_PAIRS,
        tau: int = DEFAULT_TAU,
        embedder: EmbedderConfig | None = None,
        projection_seed: int = 0,
        usage_decay: float = 0.9,
        usage_boost: float = 0.5,
        score_floor: float = 0.0,
    ):
        self.d_model = check_positive_int(d_model, "d_model")
        self.capacity_pairs = check_positive_int(capacity_pairs, "capacity_pairs")
        self.tau = check_positive_int(tau, "tau")
        if self.tau > self.capacity_pairs:
            raise ConfigError(f"tau ({tau}) exceeds capacity_pairs ({capacity_pairs})")
        self.embedder = embedder if embedder is not None else EmbedderConfig()
        self.projection_seed = check_uint64(projection_seed, "projection_seed")
        self.usage_decay = check_real(usage_decay, "usage_decay", 0.0, 1.0, True, True)
        self.usage_boost = check_real(usage_boost, "usage_boost", low=0.0)
        self.score_floor = check_real(score_floor, "score_floor", low=0.0)
        self.clock = 0
        self._entries: dict[int, MemoryEntry] = {}
        self._total_pairs = 0
        self._index: _Index | None = None

    # -- introspection -------------------------------------------------

    @property
    def d_ret(self) -> int:
        return self.embedder.dim

    @property
    def total_pairs(self) -> int:
        return self._total_pairs

    @property
    def entries(self) -> list[MemoryEntry]:
        """Entries in chunk_id order."""
        return list(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, chunk_id) -> bool:
        return chunk_id in self._entries

    def __getitem__(self, chunk_id: int) -> MemoryEntry:
        return self._entries[chunk_id]

    def config(self) -> dict:
        return {
            "d_ret": self.d_ret,
            "d_model": self.d_model,
            "tau": self.tau,
            "capacity_pairs": self.capacity_pairs,
            "projection_seed": self.projection_seed,
            "embed_seed": self.embedder.seed,
            "feature_buckets": self.embedder.feature_buckets,
            "usage_decay": self.usage_decay,
            "usage_boost": self.usage_boost,
            "score_floor": self.score_floor,
        }

    # -- geometry ------------------------------------------------------

    @cached_property
    def projection(self) -> np.ndarray:
        return projection_matrix(self.projection_seed, self.d_model, self.d_ret)

    def project(self, embedding) -> np.ndarray:
        """Map a retrieval-space vector into key space."""
        embedding = np.asarray(embedding, dtype=np.float64)
        if embedding.shape != (self.d_ret,):
            raise DimensionError(f"expected embedding of length {self.d_ret}, got {embedding.shape}")
        return self.projection @ embedding

    def embed(self, text: str) -> np.ndarray:
        return embed_text(text, self.embedder)

    def eviction_priority(self, entry: MemoryEntry) -> float:
        return eviction_priority(entry, self.usage_boost)

    # -- mutation ------------------------------------------------------

    def insert_chunk(
        self,
        doc_id: int,
        token_span: tuple[int, int],
        chunk_text: str,
        keys,
        values,
        *,
        embedding=None,
    ) -> int:
        """Store one chunk and return its new chunk_id.

        Pairs are scored against the projected chunk embedding. If the bank
        cannot take ``n`` more pairs, existing entries are evicted first; the
        entry being inserted is never a candidate. ``embedding`` may be passed
        to skip re-embedding ``chunk_text`` when the caller already has it.
        """
        keys = np.asarray(keys, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if keys.ndim == 2 and keys.shape[0] > self.tau:
            raise GroupSizeError(f"chunk has {keys.shape[0]} pairs, group size is {self.tau}")
        keys = check_matrix(keys, "keys", width=self.d_model)
        values = check_matrix(values, "values", width=self.d_model)
        if keys.shape != values.shape:
            raise DimensionError(f"keys {keys.shape} and values {values.shape} differ")
        start, end = (int(x) for x in token_span)
        if not 0 <= start <= end:
            raise ConfigError(f"bad token span {token_span}")
        doc_id = check_uint64(doc_id, "doc_id")

        if embedding is None:
            embedding = self.embed(chunk_text)
        else:
            embedding = np.array(embedding, dtype=np.float64)
            if embedding.shape != (self.d_ret,):
                raise DimensionError(f"embedding must have length {self.d_ret}")
        pair_scores = relevance_scores(self.project(embedding), keys)

        n = keys.shape[0]
        if self.score_floor > 0.0:
            self.prune_below_threshold(self.score_floor)
        if self._total_pairs + n > self.capacity_pairs:
            self.evict(n)

        chunk_id = self.clock
        self._entries[chunk_id] = MemoryEntry(
            chunk_id=chunk_id,
            doc_id=doc_id,
            token_span=(start, end),
            embedding=embedding,
            keys=keys.copy(),
            values=values.copy(),
            pair_scores=pair_scores,
            usage=0.0,
            inserted_at=self.clock,
        )
        self._total_pairs += n
        self.clock += 1
        self._index = None
        return chunk_id

    def evict(self, pairs_needed: int) -> list[int]:
        """Remove lowest-priority entries until ``pairs_needed`` slots are free.

        Ties go to the older entry. Returns removed ids in eviction order.
        """
        pairs_needed = check_positive_int(pairs_needed, "pairs_needed")
        if pairs_needed > self.capacity_pairs:
            raise ConfigError(
                f"pairs_needed ({pairs_needed}) exceeds capacity ({self.capacity_pairs})"
            )
        evicted = []
        if self.capacity_pairs - self._total_pairs >= pairs_needed:
            return evicted
        order = sorted(
            self._entries.values(),
            key=lambda e: (self.eviction_priority(e), e.inserted_at),
        )
        for entry in order:
            if self.capacity_pairs - self._total_pairs >= pairs_needed:
                break
            self._remove(entry.chunk_id)
            evicted.append(entry.chunk_id)
        return evicted

    def prune_below_threshold(self, floor: float) -> list[int]:
        """Drop every entry whose eviction priority is strictly below ``floor``."""
        floor = check_real(floor, "floor", low=0.0)
        doomed = [e.chunk_id for e in self._entries.values() if self.eviction_priority(e) < floor]
        for chunk_id in doomed:
            self._remove(chunk_id)
        return doomed

    def update_usage(self, hit_ids: Iterable[int]) -> None:
        """Apply one retrieval event: hits move toward 1, everything decays.

        Unknown ids are ignored.
        """
        hits = set(hit_ids)
        lam = self.usage_decay
        for entry in self._entries.values():
            entry.usage = lam * entry.usage + ((1.0 - lam) if entry.chunk_id in hits else 0.0)

    def remove(self, chunk_id: int) -> None:
        self._remove(chunk_id)

    def _remove(self, chunk_id: int) -> None:
        entry = self._entries.pop(chunk_id)
        self._total_pairs -= entry.n_pairs
        self._index = None

    # -- scan support ----------------------------------------------------

    def index(self) -> _Index:
        """Stacked embeddings and max pair scores, rebuilt after mutations."""
        if self._index is None:
            entries = list(self._entries.values())
            if entries:
                emb = np.stack([e.embedding for e in entries])
                max_scores = np.array([e.max_score for e in entries])
            else:
                emb = np.empty((0, self.d_ret))
                max_scores = np.empty(0)
            ids = np.fromiter((e.chunk_id for e in entries), dtype=np.int64, count=len(entries))
            self._index = _Index(ids, emb, max_scores, entries)
        return self._index

    def nbytes(self) -> int:
        """Serialized size in bytes; see :mod:`rankmem.snapshot`."""
        from .snapshot import snapshot_size

        return snapshot_size(self)

    @property
    def stored_tokens(self) -> int:
        return self._total_pairs

    # -- persistence ---------------------------------------------------

    def save(self, path) -> None:
        from .snapshot import save_bank

        save_bank(self, path)

    @classmethod
    def load(cls, path) -> "MemoryBank":
        from .snapshot import load_bank

        return load_bank(path)

    def _restore(self, entries: list[MemoryEntry], clock: int) -> None:
        self._entries = {e.chunk_id: e for e in entries}
        self._total_pairs = sum(e.n_pairs for e in entries)
        self.clock = clock
        self._index = None

    def __repr__(self) -> str:
        return (
            f"MemoryBank(entries={len(self)}, pairs={self._total_pairs}/{self.capacity_pairs}, "
            f"tau={self.tau}, d_ret={self.d_ret}, d_model={self.d_model})"
        )


def insert_chunk(bank: MemoryBank, doc_id, token_span, chunk_text, keys, values) -> int:
    return bank.insert_chunk(doc_id, token_span, chunk_text, keys, values)


def evict(bank: MemoryBank, pairs_needed: int) -> list[int]:
    return bank.evict(pairs_needed)


def prune_below_threshold(bank: MemoryBank, floor: float) -> list[int]:
    return bank.prune_below_threshold(floor)


def update_usage(bank: MemoryBank, hit_ids) -> None:
    bank.update_usage(hit_ids)
