"""Evaluation harness: corpus ingestion, needle eval, ablation, benchmarks."""

from .bench import BenchConfig, run_benchmark
from .ingest import IngestConfig, ingest_corpus
from .needle import NeedleConfig, run_ablation, run_needle_eval
from .report import EvalReport, LatencyStats

__all__ = [
    "BenchConfig",
    "EvalReport",
    "IngestConfig",
    "LatencyStats",
    "NeedleConfig",
    "ingest_corpus",
    "run_ablation",
    "run_benchmark",
    "run_needle_eval",
]
