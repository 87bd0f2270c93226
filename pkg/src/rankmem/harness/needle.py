"""Synthetic needle-in-a-haystack retrieval evaluation.

A bank is filled with distractor chunks plus a few planted "needle" chunks
that share rare topic tokens with the generated queries; every needle is
relevant to every query. Some distractors are hard negatives: they share
generic context words with the queries and so score well on cosine alone.

Needles are coherent content, so their semantic key is at full strength.
Distractors draw their semantic-key strength uniformly from [0, 1): filler
text whose token keys line up with its embedding to a varying degree.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .._validation import check_positive_int, check_real
from ..embedder import EmbedderConfig
from ..exceptions import ConfigError
from ..memory_bank import MemoryBank
from ..retrieval import Query, RetrievalResult, retrieve, retrieve_uniform
from .ingest import chunk_rng, synthetic_kv
from .report import EvalReport, LatencyStats

COMMON_VOCAB = 400
CONTEXT_VOCAB = 12
TOPIC_VOCAB = 3

MODES = (
    ("rsar+rerank", True, True),
    ("rsar", True, False),
    ("uniform+rerank", False, True),
    ("uniform", False, False),
)


@dataclass(frozen=True)
class NeedleConfig:
    n_docs: int = 210
    n_needles: int = 10
    k: int = 8
    n_queries: int = 5
    chunk_tokens: int = 24
    needle_topic_tokens: int = 6
    query_topic_tokens: int = 2
    query_context_tokens: int = 4
    hard_negative_rate: float = 0.25
    hard_negative_context_tokens: int = 6
    embed_dim: int = 1024
    feature_buckets: int = 4096
    d_model: int = 64
    tau: int = 128
    embed_seed: int | None = None

    def __post_init__(self):
        for name in ("n_docs", "n_needles", "k", "n_queries", "chunk_tokens",
                     "embed_dim", "feature_buckets", "d_model", "tau"):
            check_positive_int(getattr(self, name), name)
        for name in ("needle_topic_tokens", "query_topic_tokens", "query_context_tokens",
                     "hard_negative_context_tokens"):
            check_positive_int(getattr(self, name), name, minimum=0)
        check_real(self.hard_negative_rate, "hard_negative_rate", 0.0, 1.0)
        if self.n_needles > self.n_docs:
            raise ConfigError(f"n_needles ({self.n_needles}) exceeds n_docs ({self.n_docs})")
        if self.chunk_tokens > self.tau:
            raise ConfigError("chunk_tokens exceeds tau")
        if self.needle_topic_tokens > self.chunk_tokens or self.hard_negative_context_tokens > self.chunk_tokens:
            raise ConfigError("planted tokens exceed chunk_tokens")
        if self.query_context_tokens > CONTEXT_VOCAB:
            raise ConfigError(f"query_context_tokens must be <= {CONTEXT_VOCAB}")
        if self.query_topic_tokens > TOPIC_VOCAB:
            raise ConfigError(f"query_topic_tokens must be <= {TOPIC_VOCAB}")


@dataclass
class NeedleSuite:
    bank: MemoryBank
    queries: list[Query]
    relevant: frozenset
    config: NeedleConfig
    seed: int


def _words(rng, prefix, vocab, n):
    return [f"{prefix}{i}" for i in rng.integers(0, vocab, size=n)]


def build_needle_suite(seed: int, cfg: NeedleConfig | None = None) -> NeedleSuite:
    """Deterministically generate the bank, queries and ground truth for ``seed``."""
    cfg = cfg or NeedleConfig()
    rng = np.random.default_rng(seed)
    bank = MemoryBank(
        d_model=cfg.d_model,
        capacity_pairs=max(cfg.n_docs * cfg.chunk_tokens, cfg.tau),
        tau=cfg.tau,
        embedder=EmbedderConfig(cfg.embed_dim, seed if cfg.embed_seed is None else cfg.embed_seed,
                                cfg.feature_buckets),
        projection_seed=seed,
    )
    topic = f"topic{seed}x"
    is_needle = np.zeros(cfg.n_docs, dtype=bool)
    is_needle[rng.choice(cfg.n_docs, size=cfg.n_needles, replace=False)] = True

    relevant = set()
    for doc_id in range(cfg.n_docs):
        if is_needle[doc_id]:
            planted = [f"{topic}{i % TOPIC_VOCAB}" for i in range(cfg.needle_topic_tokens)]
            gain = 1.0
        elif rng.random() < cfg.hard_negative_rate:
            planted = _words(rng, "ctx", CONTEXT_VOCAB, cfg.hard_negative_context_tokens)
            gain = float(rng.random())
        else:
            planted = []
            gain = float(rng.random())
        tokens = planted + _words(rng, "w", COMMON_VOCAB, cfg.chunk_tokens - len(planted))
        tokens = list(rng.permutation(tokens))
        text = " ".join(tokens)
        embedding = bank.embed(text)
        keys, values = synthetic_kv(bank, embedding, len(tokens), chunk_rng(seed, doc_id, 0),
                                    semantic_keys=1, semantic_gain=gain)
        chunk_id = bank.insert_chunk(doc_id, (0, len(tokens)), text, keys, values, embedding=embedding)
        if is_needle[doc_id]:
            relevant.add(chunk_id)

    queries = []
    for _ in range(cfg.n_queries):
        words = [f"{topic}{i}" for i in rng.choice(TOPIC_VOCAB, size=cfg.query_topic_tokens, replace=False)]
        words += [f"ctx{i}" for i in rng.choice(CONTEXT_VOCAB, size=cfg.query_context_tokens, replace=False)]
        queries.append(Query(" ".join(rng.permutation(words)), cfg.k))
    for q in queries:
        q.embedding_for(bank)
    return NeedleSuite(bank, queries, frozenset(relevant), cfg, seed)


def precision_recall(result: RetrievalResult, relevant) -> tuple[float, float]:
    ids = result.hit_ids
    found = sum(1 for i in ids if i in relevant)
    precision = found / len(ids) if ids else 0.0
    recall = found / len(relevant) if relevant else 0.0
    return precision, recall


def run_mode(suite: NeedleSuite, scoring: bool, rerank: bool) -> tuple[list[RetrievalResult], list[float]]:
    search = retrieve if scoring else retrieve_uniform
    results, timings = [], []
    for q in suite.queries:
        t0 = time.perf_counter_ns()
        results.append(search(suite.bank, q, rerank=rerank))
        timings.append((time.perf_counter_ns() - t0) / 1e6)
    return results, timings


def evaluate_mode(suite: NeedleSuite, name: str, scoring: bool, rerank: bool) -> tuple[EvalReport, list[RetrievalResult]]:
    results, timings = run_mode(suite, scoring, rerank)
    pr = [precision_recall(r, suite.relevant) for r in results]
    report = EvalReport(
        name=name,
        precision_at_k=float(np.mean([p for p, _ in pr])),
        recall_at_k=float(np.mean([r for _, r in pr])),
        latency_ms=LatencyStats.from_samples(timings),
        config={"seed": suite.seed, "mode": name, "scoring": scoring, "rerank": rerank,
                **asdict(suite.config)},
    )
    return report, results


def run_needle_eval(seed: int, n_docs: int = 210, n_needles: int = 10, k: int = 8,
                    **overrides) -> tuple[EvalReport, EvalReport]:
    """Return ``(rsar, uniform)`` reports for one seeded suite."""
    cfg = NeedleConfig(n_docs=n_docs, n_needles=n_needles, k=k, **overrides)
    suite = build_needle_suite(seed, cfg)
    rsar, _ = evaluate_mode(suite, "rsar+rerank", True, True)
    uniform, _ = evaluate_mode(suite, "uniform", False, False)
    return rsar, uniform


def run_ablation(seed: int, config: NeedleConfig | None = None) -> list[EvalReport]:
    """Needle eval in all four {scoring on/off} x {rerank on/off} modes."""
    suite = build_needle_suite(seed, config)
    return [evaluate_mode(suite, name, scoring, rerank)[0] for name, scoring, rerank in MODES]


def with_overrides(cfg: NeedleConfig, **kw) -> NeedleConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
