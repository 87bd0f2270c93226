"""Ranked key-value retrieval memory.

A capacity-bounded memory bank whose entries carry per-pair relevance
weights, relevance-weighted TopK retrieval with pointwise re-ranking of each
hit's key/value pairs, usage-aware eviction, and a toy attention layer that
consumes the retrieved pairs.
"""

from .embedder import EmbedderConfig, HashingEmbedder, cosine_similarity, embed_text
from .estimators import RankedMemoryRetriever
from .exceptions import (
    ConfigError,
    CorpusError,
    DimensionError,
    EmptyContextError,
    EmptyInputError,
    FormatError,
    GroupSizeError,
    NumericError,
    RankMemError,
)
from .fusion import AttentionInput, assemble_fusion_input, retrieval_attention
from .memory_bank import MemoryBank, MemoryEntry, eviction_priority
from .relevance import combined_score, rank_descending, relevance_scores
from .retrieval import Hit, Query, RetrievalResult, retrieve, retrieve_uniform
from .snapshot import load_bank, save_bank

__version__ = "0.1.0"

__all__ = [
    "AttentionInput",
    "ConfigError",
    "CorpusError",
    "DimensionError",
    "EmbedderConfig",
    "EmptyContextError",
    "EmptyInputError",
    "FormatError",
    "GroupSizeError",
    "HashingEmbedder",
    "Hit",
    "MemoryBank",
    "MemoryEntry",
    "NumericError",
    "Query",
    "RankMemError",
    "RankedMemoryRetriever",
    "RetrievalResult",
    "assemble_fusion_input",
    "combined_score",
    "cosine_similarity",
    "embed_text",
    "eviction_priority",
    "load_bank",
    "rank_descending",
    "relevance_scores",
    "retrieval_attention",
    "retrieve",
    "retrieve_uniform",
    "save_bank",
]
