"""scikit-learn style front end to the memory bank.

:class:`RankedMemoryRetriever` treats each training document as a sequence of
``tau``-token chunks, stores them with synthetic keys/values, and answers
queries with the doc ids of the TopK chunks. It is a plain estimator, so
``get_params``/``set_params``/``clone`` and grid search work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .embedder import EmbedderConfig
from .harness.ingest import IngestConfig, ingest_documents
from .memory_bank import MemoryBank
from .retrieval import Query, retrieve, retrieve_uniform


def _as_texts(X) -> list[str]:
    if isinstance(X, str):
        raise TypeError("expected an iterable of strings, got a single string")
    texts = list(X)
    for t in texts:
        if not isinstance(t, str):
            raise TypeError(f"expected str, got {type(t).__name__}")
    return texts


class RankedMemoryRetriever(BaseEstimator):
    """Relevance-weighted TopK retrieval over a capacity-bounded memory.

    Parameters
    ----------
    k : int, default=8
        Hits per query.
    scoring : bool, default=True
        Weight similarity by each entry's strongest pair relevance. ``False``
        gives plain cosine retrieval.
    rerank : bool, default=True
        Re-order each hit's key/value pairs by relevance to the query.
    track_usage : bool, default=False
        Feed every query's hits back into the usage statistic that protects
        frequently retrieved entries from eviction.
    capacity_pairs, tau, d_model, embed_dim, embed_seed, feature_buckets,
    projection_seed, usage_decay, usage_boost, score_floor
        Passed to :class:`~rankmem.memory_bank.MemoryBank`.
    kv_seed : int, default=0
        Seed of the synthetic key/value generator.
    """

    def __init__(
        self,
        k=8,
        scoring=True,
        rerank=True,
        track_usage=False,
        capacity_pairs=32768,
        tau=128,
        d_model=64,
        embed_dim=1024,
        embed_seed=0,
        feature_buckets=4096,
        projection_seed=0,
        usage_decay=0.9,
        usage_boost=0.5,
        score_floor=0.0,
        kv_seed=0,
    ):
        self.k = k
        self.scoring = scoring
        self.rerank = rerank
        self.track_usage = track_usage
        self.capacity_pairs = capacity_pairs
        self.tau = tau
        self.d_model = d_model
        self.embed_dim = embed_dim
        self.embed_seed = embed_seed
        self.feature_buckets = feature_buckets
        self.projection_seed = projection_seed
        self.usage_decay = usage_decay
        self.usage_boost = usage_boost
        self.score_floor = score_floor
        self.kv_seed = kv_seed

    def _new_bank(self) -> MemoryBank:
        return MemoryBank(
            d_model=self.d_model,
            capacity_pairs=self.capacity_pairs,
            tau=self.tau,
            embedder=EmbedderConfig(self.embed_dim, self.embed_seed, self.feature_buckets),
            projection_seed=self.projection_seed,
            usage_decay=self.usage_decay,
            usage_boost=self.usage_boost,
            score_floor=self.score_floor,
        )

    def fit(self, X, y=None):
        """Build a fresh bank from the documents in ``X``; ``y`` is ignored."""
        self.bank_ = self._new_bank()
        self.n_documents_ = 0
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        """Append documents; ids continue from the previous call."""
        texts = _as_texts(X)
        if not hasattr(self, "bank_"):
            self.bank_ = self._new_bank()
            self.n_documents_ = 0
        cfg = IngestConfig(self.tau, self.tau, self.tau, self.kv_seed)
        ingest_documents(texts, cfg, self.bank_, first_doc_id=self.n_documents_)
        self.n_documents_ += len(texts)
        return self

    def search(self, X):
        """TopK scores and chunk ids for each query.

        Returns ``(scores, chunk_ids)``, both of shape ``(n_queries, k)``;
        rows with fewer than ``k`` hits are padded with NaN and -1.
        """
        check_is_fitted(self, "bank_")
        texts = _as_texts(X)
        scores = np.full((len(texts), self.k), np.nan)
        ids = np.full((len(texts), self.k), -1, dtype=np.int64)
        fn = retrieve if self.scoring else retrieve_uniform
        for i, text in enumerate(texts):
            result = fn(self.bank_, Query(text, self.k), rerank=self.rerank)
            if self.track_usage:
                self.bank_.update_usage(result.hit_ids)
            scores[i, :len(result)] = result.scores
            ids[i, :len(result)] = result.hit_ids
        return scores, ids

    def predict(self, X) -> np.ndarray:
        """Document index (position in the fitted corpus) of each hit, -1 padded."""
        _, ids = self.search(X)
        out = np.full(ids.shape, -1, dtype=np.int64)
        mask = ids >= 0
        out[mask] = [self.bank_[int(c)].doc_id for c in ids[mask]]
        return out

    def score(self, X, y) -> float:
        """Mean precision@k of predicted documents against relevant-id sets ``y``."""
        pred = self.predict(X)
        precisions = []
        for row, relevant in zip(pred, y):
            hits = row[row >= 0]
            relevant = set(relevant)
            precisions.append(sum(int(h) in relevant for h in hits) / len(hits) if len(hits) else 0.0)
        return float(np.mean(precisions)) if precisions else 0.0
