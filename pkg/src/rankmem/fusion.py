"""Single-head attention over retrieved plus local key/value rows.

Retrieved rows are prepended to the local context and both share one
softmax: no gate between the two sources, and no positional term on the
retrieved rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix
from .exceptions import DimensionError, EmptyContextError
from .memory_bank import MemoryBank
from .relevance import softmax
from .retrieval import Query, RetrievalResult, retrieve


@dataclass
class AttentionInput:
    queries: np.ndarray
    local_keys: np.ndarray
    local_values: np.ndarray
    retrieved_keys: np.ndarray
    retrieved_values: np.ndarray

    @property
    def d_model(self) -> int:
        return self.queries.shape[1]

    @property
    def n_retrieved(self) -> int:
        return self.retrieved_keys.shape[0]

    @property
    def n_local(self) -> int:
        return self.local_keys.shape[0]

    def validated(self) -> "AttentionInput":
        q = check_matrix(self.queries, "queries")
        d = q.shape[1]
        lk = check_matrix(self.local_keys, "local_keys", width=d, allow_empty=True)
        lv = check_matrix(self.local_values, "local_values", width=d, allow_empty=True)
        rk = check_matrix(self.retrieved_keys, "retrieved_keys", width=d, allow_empty=True)
        rv = check_matrix(self.retrieved_values, "retrieved_values", width=d, allow_empty=True)
        if lk.shape != lv.shape:
            raise DimensionError(f"local keys {lk.shape} vs values {lv.shape}")
        if rk.shape != rv.shape:
            raise DimensionError(f"retrieved keys {rk.shape} vs values {rv.shape}")
        if lk.shape[0] + rk.shape[0] == 0:
            raise EmptyContextError("no local or retrieved rows to attend over")
        return AttentionInput(q, lk, lv, rk, rv)

    def context(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated ``[retrieved ; local]`` keys and values."""
        return (
            np.concatenate([self.retrieved_keys, self.local_keys]),
            np.concatenate([self.retrieved_values, self.local_values]),
        )


def attention_weights(inp: AttentionInput) -> np.ndarray:
    """Row-stochastic weights of shape ``(n_q, n_r + n_l)``."""
    inp = inp.validated()
    keys, _ = inp.context()
    return softmax(inp.queries @ keys.T / np.sqrt(inp.d_model))


def retrieval_attention(inp: AttentionInput) -> np.ndarray:
    """Scaled dot-product attention over retrieved and local rows.

    Output is clamped to each value column's range; a convex combination can
    otherwise overshoot it by an ulp when the weights sum to 1 +/- eps.
    """
    inp = inp.validated()
    keys, values = inp.context()
    weights = softmax(inp.queries @ keys.T / np.sqrt(inp.d_model))
    return np.clip(weights @ values, values.min(axis=0), values.max(axis=0))


def gather_retrieved(bank: MemoryBank, result: RetrievalResult) -> tuple[np.ndarray, np.ndarray]:
    """Stack each hit's pairs in hit order, applying its ``pair_order``."""
    if not result.hits:
        empty = np.empty((0, bank.d_model))
        return empty, empty.copy()
    keys = [bank[h.chunk_id].keys[h.pair_order] for h in result.hits]
    values = [bank[h.chunk_id].values[h.pair_order] for h in result.hits]
    return np.concatenate(keys), np.concatenate(values)


def assemble_fusion_input(
    query_text,
    query_states,
    bank: MemoryBank,
    local_keys=None,
    local_values=None,
    *,
    k: int | None = None,
    rerank: bool = True,
) -> AttentionInput:
    """Run retrieval for ``query_text`` and package the attention operands.

    ``local_keys``/``local_values`` default to ``query_states`` (self-attention
    over the current window).
    """
    query_states = check_matrix(query_states, "query_states", width=bank.d_model)
    local_keys = query_states if local_keys is None else local_keys
    local_values = query_states if local_values is None else local_values
    query = query_text if isinstance(query_text, Query) else Query(query_text, k or 8)
    result = retrieve(bank, query, k, rerank=rerank)
    rk, rv = gather_retrieved(bank, result)
    return AttentionInput(query_states, np.asarray(local_keys, dtype=np.float64),
                          np.asarray(local_values, dtype=np.float64), rk, rv).validated()
