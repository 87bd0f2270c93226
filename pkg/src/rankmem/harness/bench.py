"""Latency, throughput and bytes-per-token measurements.

For each context length a fresh bank is filled with that many synthetic
tokens. Insertion throughput is tokens over ingest wall time; retrieval
latency is sampled with ``time.perf_counter_ns`` after warm-up calls that are
discarded; bytes per token is the bank's serialized size over stored tokens.
"""

from __future__ import annotations

import gc
import time
from dataclasses import asdict, dataclass

import numpy as np

from .._validation import check_positive_int
from ..embedder import EmbedderConfig
from ..exceptions import ConfigError
from ..memory_bank import MemoryBank
from ..retrieval import Query, retrieve
from .ingest import IngestConfig, ingest_tokens
from .report import EvalReport, LatencyStats

BENCH_VOCAB = 2000
MIN_LATENCY_SAMPLES = 30


@dataclass(frozen=True)
class BenchConfig:
    context_lengths: tuple[int, ...] = (1024, 2048, 4096, 16384)
    n_queries: int = 50
    warmup: int = 5
    k: int = 8
    seed: int = 0
    capacity_pairs: int = 32768
    tau: int = 128
    window_tokens: int = 512
    stride_tokens: int = 512
    embed_dim: int = 1024
    feature_buckets: int = 4096
    d_model: int = 64
    projection_seed: int = 0
    query_tokens: int = 8

    def __post_init__(self):
        if not self.context_lengths:
            raise ConfigError("context_lengths must not be empty")
        for n in self.context_lengths:
            check_positive_int(n, "context length")
        check_positive_int(self.n_queries, "n_queries", minimum=0)
        if 0 < self.n_queries < MIN_LATENCY_SAMPLES:
            raise ConfigError(f"n_queries must be 0 or at least {MIN_LATENCY_SAMPLES}")
        check_positive_int(self.warmup, "warmup", minimum=0)
        for name in ("k", "capacity_pairs", "tau", "window_tokens", "stride_tokens",
                     "embed_dim", "feature_buckets", "d_model", "query_tokens"):
            check_positive_int(getattr(self, name), name)

    @classmethod
    def from_bank(cls, bank: MemoryBank, **kw) -> "BenchConfig":
        """Take dimensions, capacity and seeds from an existing bank."""
        return cls(
            capacity_pairs=bank.capacity_pairs,
            tau=bank.tau,
            embed_dim=bank.d_ret,
            feature_buckets=bank.embedder.feature_buckets,
            d_model=bank.d_model,
            projection_seed=bank.projection_seed,
            **kw,
        )

    def new_bank(self, seed: int) -> MemoryBank:
        return MemoryBank(
            d_model=self.d_model,
            capacity_pairs=self.capacity_pairs,
            tau=self.tau,
            embedder=EmbedderConfig(self.embed_dim, seed, self.feature_buckets),
            projection_seed=self.projection_seed,
        )


def synthetic_tokens(rng: np.random.Generator, n: int) -> list[str]:
    # Zipf-like draw so a few words dominate, as in natural text
    ranks = np.minimum(rng.zipf(1.3, size=n), BENCH_VOCAB) - 1
    return [f"w{r}" for r in ranks]


def time_retrievals(bank: MemoryBank, queries: list[Query], warmup: int) -> list[float]:
    for q in queries[:warmup]:
        retrieve(bank, q)
    samples = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for q in queries:
            t0 = time.perf_counter_ns()
            retrieve(bank, q)
            samples.append((time.perf_counter_ns() - t0) / 1e6)
    finally:
        if gc_was_enabled:
            gc.enable()
    return samples


def make_queries(bank: MemoryBank, rng, n: int, k: int, n_tokens: int) -> list[Query]:
    queries = [Query(" ".join(synthetic_tokens(rng, n_tokens)), k) for _ in range(n)]
    for q in queries:
        q.embedding_for(bank)
    return queries


def bench_context_length(cfg: BenchConfig, n_tokens: int) -> EvalReport:
    rng = np.random.default_rng([cfg.seed, n_tokens])
    bank = cfg.new_bank(cfg.seed)
    ingest_cfg = IngestConfig(cfg.window_tokens, cfg.stride_tokens, cfg.tau, cfg.seed)
    tokens = synthetic_tokens(rng, n_tokens)

    t0 = time.perf_counter_ns()
    ingest_tokens(tokens, 0, ingest_cfg, bank)
    elapsed = (time.perf_counter_ns() - t0) / 1e9
    throughput = n_tokens / elapsed if elapsed > 0 else None

    queries = make_queries(bank, rng, cfg.n_queries, cfg.k, cfg.query_tokens)
    bank.index()
    latency = LatencyStats.from_samples(time_retrievals(bank, queries, cfg.warmup))
    return EvalReport(
        name=f"bench@{n_tokens}",
        latency_ms=latency,
        throughput_tokens_per_sec=throughput,
        bytes_per_token=bank.nbytes() / bank.stored_tokens if bank.stored_tokens else None,
        config={"context_length": n_tokens, "entries": len(bank), "stored_tokens": bank.stored_tokens,
                "bank_bytes": bank.nbytes(), **asdict(cfg), "context_lengths": list(cfg.context_lengths)},
    )


def run_benchmark(config: BenchConfig | None = None) -> list[EvalReport]:
    """One report per configured context length, in the order given."""
    cfg = config or BenchConfig()
    return [bench_context_length(cfg, n) for n in cfg.context_lengths]


def latency_vs_entries(entry_counts, seed: int, n_queries: int = 60, k: int = 8,
                       embed_dim: int = 1024, tau: int = 16, d_model: int = 16) -> list[float]:
    """Mean retrieval latency (ms) for banks of the given entry counts.

    Entries are ``tau``-token chunks; capacity is sized to hold them all.
    """
    rng = np.random.default_rng(seed)
    means = []
    for m in entry_counts:
        cfg = BenchConfig(capacity_pairs=max(m * tau, tau), tau=tau, window_tokens=tau,
                          stride_tokens=tau, embed_dim=embed_dim, d_model=d_model,
                          n_queries=n_queries, k=k, seed=seed)
        bank = cfg.new_bank(seed)
        ingest_tokens(synthetic_tokens(rng, m * tau), 0,
                      IngestConfig(tau, tau, tau, seed), bank)
        queries = make_queries(bank, rng, n_queries, k, cfg.query_tokens)
        bank.index()
        means.append(float(np.mean(time_retrievals(bank, queries, warmup=5))))
    return means
