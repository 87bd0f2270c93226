"""Relevance weights, rank permutations and the combined retrieval score."""

from __future__ import annotations

import numpy as np

from ._validation import check_matrix, check_vector
from .exceptions import EmptyInputError


def relevance_scores(q, keys) -> np.ndarray:
    """Softmax of ``keys @ q / sqrt(d)`` over the rows of ``keys``.

    ``d`` is the width of the vectors being scored. The maximum logit is
    subtracted before exponentiation, so logits of any finite magnitude are
    safe.

    Args:
        q: query vector, shape ``(d,)``.
        keys: key matrix, shape ``(m, d)`` with ``m >= 1``.

    Returns:
        Weights of shape ``(m,)``, each in (0, 1], summing to one.

    Raises:
        EmptyInputError: ``keys`` has no rows.
        NumericError: non-finite input.
        DimensionError: widths disagree.
    """
    q = check_vector(q, "q")
    keys = check_matrix(keys, "keys", width=q.shape[0], allow_empty=True)
    if keys.shape[0] == 0:
        raise EmptyInputError("relevance_scores needs at least one key")
    logits = keys @ q / np.sqrt(q.shape[0])
    return softmax(logits)


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = np.exp(z - z.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def rank_descending(scores) -> np.ndarray:
    """Indices by non-increasing score; ties keep the lower index first."""
    scores = np.asarray(scores, dtype=np.float64)
    # stable sort on the negation keeps ascending index order inside ties
    return np.argsort(-scores, kind="stable")


def combined_score(sim: float, entry_scores) -> float:
    """Similarity scaled by the entry's strongest key/value relevance weight."""
    entry_scores = np.asarray(entry_scores, dtype=np.float64)
    if entry_scores.size == 0:
        raise EmptyInputError("entry_scores must be nonempty")
    return float(sim) * float(entry_scores.max())
