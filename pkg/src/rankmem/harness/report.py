"""Evaluation report records.

Reports serialize to one JSON object per line with a fixed key order. The
fields listed in ``TIMING_FIELDS`` depend on wall-clock measurements; every
other field is a pure function of the run's configuration and seed.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from typing import Any, Sequence

TIMING_FIELDS = ("latency_ms", "throughput_tokens_per_sec")


@dataclass(frozen=True)
class LatencyStats:
    p50: float
    p95: float
    mean: float
    stddev: float
    samples: int

    @classmethod
    def from_samples(cls, samples_ms: Sequence[float]) -> "LatencyStats | None":
        if not samples_ms:
            return None
        xs = sorted(samples_ms)
        q = statistics.quantiles(xs, n=100, method="inclusive") if len(xs) > 1 else [xs[0]] * 99
        return cls(
            p50=statistics.median(xs),
            p95=q[94],
            mean=statistics.fmean(xs),
            stddev=statistics.stdev(xs) if len(xs) > 1 else 0.0,
            samples=len(xs),
        )

    def as_dict(self) -> dict:
        return {"p50": self.p50, "p95": self.p95, "mean": self.mean,
                "stddev": self.stddev, "samples": self.samples}


@dataclass
class EvalReport:
    name: str
    precision_at_k: float | None = None
    recall_at_k: float | None = None
    latency_ms: LatencyStats | None = None
    throughput_tokens_per_sec: float | None = None
    bytes_per_token: float | None = None
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("precision_at_k", "recall_at_k"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def to_record(self, include_timing: bool = True) -> dict:
        rec = {
            "name": self.name,
            "precision_at_k": self.precision_at_k,
            "recall_at_k": self.recall_at_k,
            "latency_ms": self.latency_ms.as_dict() if self.latency_ms else None,
            "throughput_tokens_per_sec": self.throughput_tokens_per_sec,
            "bytes_per_token": self.bytes_per_token,
            "config": self.config,
            "timing_fields": list(TIMING_FIELDS),
        }
        if not include_timing:
            for f in TIMING_FIELDS:
                del rec[f]
        return rec

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_record(include_timing))


def write_records(reports, fh, include_timing: bool = True) -> None:
    for r in reports:
        fh.write(r.to_json(include_timing) + "\n")
