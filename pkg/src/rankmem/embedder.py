"""Deterministic hashed text embeddings.

Text is lowercased and split on whitespace. Each token is hashed with a keyed
64-bit BLAKE2b digest into one of ``feature_buckets`` count bins, and the
count vector is mapped to ``dim`` dimensions by a random-sign projection whose
rows are regenerated on demand from a counter-based Philox stream (so the
projection never has to be stored). The result is L2-normalized.

Any callable ``str -> np.ndarray`` with unit-norm output can stand in for
:func:`embed_text`; :class:`HashingEmbedder` is the scikit-learn facing
wrapper.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_positive_int, check_uint64, check_vector
from .exceptions import ConfigError, DimensionError

DEFAULT_DIM = 1024
DEFAULT_BUCKETS = 4096


@dataclass(frozen=True)
class EmbedderConfig:
    dim: int = DEFAULT_DIM
    seed: int = 0
    feature_buckets: int = DEFAULT_BUCKETS

    def __post_init__(self):
        check_positive_int(self.dim, "dim", minimum=2)
        check_uint64(self.seed, "seed")
        check_positive_int(self.feature_buckets, "feature_buckets")
        if self.feature_buckets < self.dim:
            raise ConfigError(
                f"feature_buckets ({self.feature_buckets}) must be >= dim ({self.dim})"
            )


def tokenize(text: str) -> list[str]:
    """Lowercase and split on Unicode whitespace."""
    return text.lower().split()


def token_hash(token: str, seed: int) -> int:
    """Keyed 64-bit BLAKE2b digest of the UTF-8 token, read little-endian."""
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little")
    ).digest()
    return int.from_bytes(digest, "little")


def sign_row(seed: int, bucket: int, dim: int) -> np.ndarray:
    """Row ``bucket`` of the +/-1 projection matrix as int8.

    Bit ``i`` of the raw Philox-4x64 output (key = seed | bucket << 64, counter
    starting at zero) selects +1 when set and -1 otherwise.
    """
    return _sign_row(seed, bucket, dim).copy()


@lru_cache(maxsize=16384)
def _sign_row(seed: int, bucket: int, dim: int) -> np.ndarray:
    words = -(-dim // 64)
    raw = np.random.Philox(key=seed | (bucket << 64)).random_raw(words)
    bits = np.unpackbits(raw.astype("<u8").view(np.uint8), bitorder="little")[:dim]
    row = bits.astype(np.int8) * 2 - 1
    row.flags.writeable = False
    return row


def basis_vector(dim: int, index: int = 0) -> np.ndarray:
    v = np.zeros(dim)
    v[index] = 1.0
    return v


def embed_text(text: str, cfg: EmbedderConfig | None = None) -> np.ndarray:
    """Embed ``text`` into a unit vector of length ``cfg.dim``.

    Empty or whitespace-only text (and the measure-zero case of a count
    vector projecting exactly to zero) maps to the first basis vector.
    """
    cfg = cfg or EmbedderConfig()
    counts = Counter(token_hash(tok, cfg.seed) % cfg.feature_buckets for tok in tokenize(text))
    if not counts:
        return basis_vector(cfg.dim)
    buckets = sorted(counts)
    rows = np.stack([_sign_row(cfg.seed, b, cfg.dim) for b in buckets]).astype(np.float64)
    weights = np.array([counts[b] for b in buckets], dtype=np.float64)
    vec = weights @ rows
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        return basis_vector(cfg.dim)
    return vec / norm


def normalize(x) -> np.ndarray:
    """Scale ``x`` to unit L2 norm."""
    arr = check_vector(x)
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return arr / norm


def cosine_similarity(a, b) -> float:
    """Dot product of two unit embeddings, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"embedding shapes differ: {a.shape} vs {b.shape}")
    return float(min(1.0, max(-1.0, float(a @ b))))


class HashingEmbedder(TransformerMixin, BaseEstimator):
    """scikit-learn transformer mapping an iterable of strings to unit embeddings.

    Stateless: ``fit`` only validates parameters, so the transformer can sit
    in a :class:`~sklearn.pipeline.Pipeline` ahead of any vector model.

    Parameters
    ----------
    dim : int, default=1024
        Output dimension.
    seed : int, default=0
        Hash key and projection seed.
    feature_buckets : int, default=4096
        Hashing width; must be at least ``dim``.
    """

    def __init__(self, dim=DEFAULT_DIM, seed=0, feature_buckets=DEFAULT_BUCKETS):
        self.dim = dim
        self.seed = seed
        self.feature_buckets = feature_buckets

    def fit(self, X=None, y=None):
        self.config_ = EmbedderConfig(self.dim, self.seed, self.feature_buckets)
        self.n_features_out_ = self.dim
        return self

    def transform(self, X) -> np.ndarray:
        if isinstance(X, str):
            raise TypeError("expected an iterable of strings, got a single string")
        cfg = getattr(self, "config_", None) or EmbedderConfig(
            self.dim, self.seed, self.feature_buckets
        )
        texts = list(X)
        if not texts:
            return np.empty((0, cfg.dim))
        return np.stack([embed_text(t, cfg) for t in texts])

    def _more_tags(self):
        return {"X_types": ["string"], "stateless": True}
