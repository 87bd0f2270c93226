"""Relevance-weighted TopK retrieval over a memory bank.

:func:`retrieve` scores every entry by ``cos(query, entry) * max_j s_j``,
keeps the ``k`` best (ties: lower chunk_id first) and re-ranks each hit's
key/value pairs by their own relevance to the query. :func:`retrieve_uniform`
is the baseline: cosine similarity alone, pairs left in storage order.

The scan is exhaustive; at the sizes this package targets it is exact and
cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int
from .exceptions import DimensionError
from .memory_bank import MemoryBank
from .relevance import rank_descending, relevance_scores

DEFAULT_K = 8


@dataclass
class Query:
    """Query text plus TopK size.

    ``embedding`` is filled in from the bank's embedder on first use unless
    supplied up front.
    """

    text: str
    k: int = DEFAULT_K
    embedding: np.ndarray | None = None

    def __post_init__(self):
        check_positive_int(self.k, "k")

    def embedding_for(self, bank: MemoryBank) -> np.ndarray:
        if self.embedding is None:
            self.embedding = bank.embed(self.text)
        elif np.shape(self.embedding) != (bank.d_ret,):
            raise DimensionError(
                f"query embedding has shape {np.shape(self.embedding)}, bank expects ({bank.d_ret},)"
            )
        return self.embedding


@dataclass(frozen=True)
class Hit:
    chunk_id: int
    score: float
    pair_order: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Hit):
            return NotImplemented
        return (
            self.chunk_id == other.chunk_id
            and self.score == other.score
            and np.array_equal(self.pair_order, other.pair_order)
        )


@dataclass
class RetrievalResult:
    hits: list[Hit] = field(default_factory=list)

    @property
    def hit_ids(self) -> list[int]:
        """Ids to hand to :meth:`MemoryBank.update_usage` after this event."""
        return [h.chunk_id for h in self.hits]

    @property
    def scores(self) -> list[float]:
        return [h.score for h in self.hits]

    def __len__(self) -> int:
        return len(self.hits)

    def __iter__(self):
        return iter(self.hits)


def _as_query(query, k: int | None) -> Query:
    if isinstance(query, Query):
        return query if k is None else Query(query.text, k, query.embedding)
    return Query(query, DEFAULT_K if k is None else k)


def top_k(scores: np.ndarray, ids: np.ndarray, k: int) -> np.ndarray:
    """Positions of the ``k`` largest scores; ties resolved by smaller id."""
    return np.lexsort((ids, -scores))[:k]


def entry_similarities(bank: MemoryBank, q: np.ndarray) -> np.ndarray:
    idx = bank.index()
    return np.clip(idx.embeddings @ q, -1.0, 1.0)


def _collect(bank, query, scores, rerank) -> RetrievalResult:
    idx = bank.index()
    q = query.embedding
    projected = bank.project(q) if rerank else None
    hits = []
    for pos in top_k(scores, idx.chunk_ids, query.k):
        entry = idx.entries[pos]
        if rerank:
            order = rank_descending(relevance_scores(projected, entry.keys))
        else:
            order = np.arange(entry.n_pairs)
        hits.append(Hit(int(entry.chunk_id), float(scores[pos]), order))
    return RetrievalResult(hits)


def retrieve(bank: MemoryBank, query, k: int | None = None, *, rerank: bool = True) -> RetrievalResult:
    """Score-weighted TopK with pointwise re-ranking of each hit's pairs.

    ``query`` may be a :class:`Query` or plain text. With ``rerank=False``
    the hit set is unchanged and ``pair_order`` is the identity.
    """
    query = _as_query(query, k)
    if len(bank) == 0:
        return RetrievalResult()
    q = query.embedding_for(bank)
    scores = entry_similarities(bank, q) * bank.index().max_scores
    return _collect(bank, query, scores, rerank)


def retrieve_uniform(bank: MemoryBank, query, k: int | None = None, *, rerank: bool = False) -> RetrievalResult:
    """Cosine-only TopK; every pair of an entry weighs the same."""
    query = _as_query(query, k)
    if len(bank) == 0:
        return RetrievalResult()
    q = query.embedding_for(bank)
    return _collect(bank, query, entry_similarities(bank, q), rerank)
