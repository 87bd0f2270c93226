import json
import math

import numpy as np
import pytest

from oracles.retrieval import exhaustive
from rankmem import MemoryBank
from rankmem.embedder import EmbedderConfig
from rankmem.exceptions import ConfigError, CorpusError
from rankmem.harness import BenchConfig, IngestConfig, NeedleConfig, ingest_corpus, run_ablation, run_benchmark, run_needle_eval
from rankmem.harness.bench import latency_vs_entries
from rankmem.harness.ingest import chunk_spans, expected_chunk_count
from rankmem.harness.needle import build_needle_suite, evaluate_mode, precision_recall
from rankmem.harness.report import TIMING_FIELDS, EvalReport, LatencyStats
from rankmem.snapshot import snapshot_size

FAST = dict(embed_dim=64, feature_buckets=256, d_model=16)


def _bank(tau=128):
    return MemoryBank(d_model=8, tau=tau, embedder=EmbedderConfig(32, 0, 64))


def _doc(path, n_tokens, name="c.txt"):
    p = path / name
    p.write_text(" ".join(f"w{i}" for i in range(n_tokens)))
    return p


def test_ingest_single_window_two_groups(tmp_path):
    bank = _bank()
    assert ingest_corpus(_doc(tmp_path, 256), IngestConfig(256, 512, 128), bank) == 2
    assert [e.token_span for e in bank.entries] == [(0, 128), (128, 256)]


def test_ingest_two_windows(tmp_path):
    bank = _bank()
    assert ingest_corpus(_doc(tmp_path, 1024), IngestConfig(512, 512, 128), bank) == 8
    assert [e.token_span[0] for e in bank.entries] == [0, 128, 256, 384, 512, 640, 768, 896]


def test_ingest_empty_file(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("")
    assert ingest_corpus(p, IngestConfig(), _bank()) == 0


def test_ingest_jsonl(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text("\n".join(json.dumps({"text": " ".join(["a"] * n), "id": n}) for n in (3, 0, 5)) + "\n")
    bank = _bank(tau=2)
    assert ingest_corpus(p, IngestConfig(4, 4, 2), bank) == 2 + 0 + 3
    assert [e.doc_id for e in bank.entries] == [0, 0, 2, 2, 2]


def test_ingest_bad_records(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"text": "a"}\nnot json\n')
    with pytest.raises(CorpusError):
        ingest_corpus(p, IngestConfig(), _bank())
    p.write_text('{"body": "a"}\n')
    with pytest.raises(CorpusError):
        ingest_corpus(p, IngestConfig(), _bank())


def test_ingest_missing_file(tmp_path):
    with pytest.raises(OSError):
        ingest_corpus(tmp_path / "nope.txt", IngestConfig(), _bank())


def test_ingest_tau_larger_than_bank_group():
    with pytest.raises(ConfigError):
        ingest_corpus("unused", IngestConfig(256, 256, 256), _bank(tau=128))


def test_ingest_deterministic(tmp_path):
    p = _doc(tmp_path, 300)
    a, b = _bank(), _bank()
    ingest_corpus(p, IngestConfig(128, 64, 32, seed=4), a)
    ingest_corpus(p, IngestConfig(128, 64, 32, seed=4), b)
    from rankmem.snapshot import dump_bank
    assert dump_bank(a) == dump_bank(b)


def test_semantic_key_raises_pair_weight(tmp_path):
    p = _doc(tmp_path, 64)
    plain, semantic = _bank(), _bank()
    ingest_corpus(p, IngestConfig(64, 64, 64, semantic_keys=0), plain)
    ingest_corpus(p, IngestConfig(64, 64, 64, semantic_keys=1), semantic)
    assert semantic.entries[0].max_score > plain.entries[0].max_score


@pytest.mark.parametrize("n,w,s,t", [(1, 4, 4, 2), (1000, 512, 256, 128), (1000, 300, 700, 64),
                                     (513, 512, 512, 128), (10, 3, 1, 2), (0, 8, 8, 8)])
def test_chunk_spans_closed_form(n, w, s, t):
    cfg = IngestConfig(w, s, t)
    spans = chunk_spans(n, cfg)
    assert len(spans) == expected_chunk_count(n, w, s, t)
    assert all(1 <= b - a <= t for a, b in spans)


def test_ingest_config_validation():
    with pytest.raises(ConfigError):
        IngestConfig(window_tokens=64, tau=128)
    with pytest.raises(ConfigError):
        IngestConfig(stride_tokens=0)


# -- needle ---------------------------------------------------------------


def test_all_relevant_gives_full_precision():
    rsar, uniform = run_needle_eval(3, n_docs=12, n_needles=12, k=4, **FAST)
    assert rsar.precision_at_k == 1.0 and uniform.precision_at_k == 1.0


def test_single_unique_needle_found_at_k1():
    cfg = NeedleConfig(n_docs=40, n_needles=1, k=1, hard_negative_rate=0.0)
    suite = build_needle_suite(11, cfg)
    [needle] = suite.relevant
    for q in suite.queries:
        ranked = exhaustive(suite.bank, q.embedding, len(suite.bank))
        assert ranked[0][1] == needle
    rsar, _ = run_needle_eval(11, n_docs=40, n_needles=1, k=1, hard_negative_rate=0.0)
    assert rsar.recall_at_k == 1.0


def test_needle_eval_deterministic():
    a = run_needle_eval(7, n_docs=50, n_needles=5, **FAST)
    b = run_needle_eval(7, n_docs=50, n_needles=5, **FAST)
    for x, y in zip(a, b):
        assert x.to_record(include_timing=False) == y.to_record(include_timing=False)


def test_needle_config_validation():
    with pytest.raises(ConfigError):
        NeedleConfig(n_docs=3, n_needles=4)
    with pytest.raises(ConfigError):
        NeedleConfig(chunk_tokens=200)


def test_precision_recall_definitions():
    from rankmem.retrieval import Hit, RetrievalResult
    res = RetrievalResult([Hit(1, 0.5, np.arange(1)), Hit(2, 0.4, np.arange(1))])
    assert precision_recall(res, {2, 3, 4, 5}) == (0.5, 0.25)
    assert precision_recall(RetrievalResult(), {1}) == (0.0, 0.0)


def test_ablation_modes_wired():
    cfg = NeedleConfig(n_docs=60, n_needles=6, **FAST)
    suite = build_needle_suite(7, cfg)
    results = {name: evaluate_mode(suite, name, s, r)[1] for name, s, r in
               (("a", True, True), ("b", True, False), ("c", False, True), ("d", False, False))}
    for q, ra, rb, rc, rd in zip(suite.queries, results["a"], results["b"], results["c"], results["d"]):
        assert ra.hit_ids == rb.hit_ids
        assert rc.hit_ids == rd.hit_ids
        assert rd.hit_ids == [c for _, c in exhaustive(suite.bank, q.embedding, cfg.k, scoring=False)]
        assert ra.hit_ids == [c for _, c in exhaustive(suite.bank, q.embedding, cfg.k, scoring=True)]
    reports = run_ablation(7, cfg)
    assert [r.name for r in reports] == ["rsar+rerank", "rsar", "uniform+rerank", "uniform"]
    assert reports[0].precision_at_k == reports[1].precision_at_k
    assert reports[2].precision_at_k == reports[3].precision_at_k


# -- bench ------------------------------------------------------------------


def test_bytes_per_token_decreasing_matches_size_formula():
    cfg = BenchConfig(context_lengths=(256, 512, 1024, 4096), n_queries=0, **FAST)
    reports = run_benchmark(cfg)
    bpt = [r.bytes_per_token for r in reports]
    assert all(a > b for a, b in zip(bpt, bpt[1:]))
    for r in reports:
        n = r.config["stored_tokens"]
        chunks = math.ceil(n / 128)
        size = 4 + 4 + 80 + 8 + chunks * (44 + 8 * (64 + 1)) + n * 8 * (2 * 16 + 1)
        assert r.config["bank_bytes"] == size
        assert r.bytes_per_token == size / n


def test_zero_queries_gives_null_latency():
    [r] = run_benchmark(BenchConfig(context_lengths=(128,), n_queries=0, **FAST))
    assert r.latency_ms is None
    assert r.to_record()["latency_ms"] is None


def test_bench_requires_enough_samples():
    with pytest.raises(ConfigError):
        BenchConfig(n_queries=10)


def test_latency_grows_with_bank_size():
    sizes = np.array([250, 500, 1000, 2000])
    slopes = []
    for seed in range(1, 6):
        means = latency_vs_entries(sizes, seed, n_queries=40, embed_dim=256)
        slopes.append(np.polyfit(sizes, means, 1)[0])
    assert np.mean(slopes) > 0


# -- reports ------------------------------------------------------------------


def test_report_record_shape():
    r = EvalReport("x", 0.5, 0.25, LatencyStats.from_samples([1.0, 2.0, 3.0]), 10.0, 2.0, {"a": 1})
    rec = r.to_record()
    assert list(rec) == ["name", "precision_at_k", "recall_at_k", "latency_ms",
                         "throughput_tokens_per_sec", "bytes_per_token", "config", "timing_fields"]
    assert rec["timing_fields"] == list(TIMING_FIELDS)
    assert rec["latency_ms"]["p50"] == 2.0 and rec["latency_ms"]["mean"] == 2.0
    assert "latency_ms" not in r.to_record(include_timing=False)
    with pytest.raises(ValueError):
        EvalReport("bad", precision_at_k=1.5)


def test_latency_stats_percentiles():
    s = LatencyStats.from_samples(list(range(1, 101)))
    assert s.p50 == 50.5
    assert s.p95 == pytest.approx(95.05)
    assert LatencyStats.from_samples([]) is None
