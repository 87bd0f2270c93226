"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 I/O or snapshot format error.
Every command writes line-delimited JSON to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .embedder import EmbedderConfig
from .exceptions import ConfigError, CorpusError, FormatError, GroupSizeError
from .harness.bench import BenchConfig, run_benchmark
from .harness.ingest import IngestConfig, ingest_corpus
from .harness.needle import NeedleConfig, evaluate_mode, build_needle_suite, run_ablation
from .harness.report import write_records
from .memory_bank import MemoryBank
from .retrieval import Query, retrieve, retrieve_uniform
from .snapshot import load_bank, save_bank

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed_list(text: str) -> list[int]:
    """``"1-10"`` or ``"1,2,5"``."""
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return _int_list(text)


def _emit(record: dict) -> None:
    sys.stdout.write(json.dumps(record) + "\n")


def _add_embed_args(p):
    p.add_argument("--embed-dim", type=int, default=1024)
    p.add_argument("--embed-seed", type=int, default=None,
                   help="embedding hash seed (default: 0; eval commands default to the run seed)")
    p.add_argument("--feature-buckets", type=int, default=None,
                   help="hashing width (default: max(4096, embed dim))")


def _embedder(args) -> EmbedderConfig:
    buckets = args.feature_buckets or max(4096, args.embed_dim)
    return EmbedderConfig(args.embed_dim, args.embed_seed or 0, buckets)


def cmd_ingest(args) -> int:
    bank_path = Path(args.bank)
    if bank_path.exists():
        bank = load_bank(bank_path)
    else:
        bank = MemoryBank(
            d_model=args.d_model,
            capacity_pairs=args.capacity,
            tau=args.tau,
            embedder=_embedder(args),
            projection_seed=args.projection_seed,
            usage_decay=args.usage_decay,
            usage_boost=args.usage_boost,
            score_floor=args.score_floor,
        )
    cfg = IngestConfig(args.window, args.stride, args.tau, args.seed)
    n = ingest_corpus(args.corpus, cfg, bank)
    save_bank(bank, bank_path)
    _emit({"chunks_inserted": n, "entries": len(bank), "pairs": bank.total_pairs,
           "capacity_pairs": bank.capacity_pairs, "bank": str(bank_path)})
    return EXIT_OK


def cmd_retrieve(args) -> int:
    bank = load_bank(args.bank)
    query = Query(args.query, args.k)
    fn = retrieve_uniform if args.uniform else retrieve
    rerank = (not args.uniform) if args.rerank is None else args.rerank
    result = fn(bank, query, rerank=rerank)
    for rank, hit in enumerate(result.hits):
        entry = bank[hit.chunk_id]
        _emit({"rank": rank, "chunk_id": hit.chunk_id, "doc_id": entry.doc_id,
               "token_span": list(entry.token_span), "score": hit.score,
               "pair_order": hit.pair_order.tolist()})
    if args.update_usage:
        bank.update_usage(result.hit_ids)
        save_bank(bank, args.bank)
    return EXIT_OK


def _needle_config(args) -> NeedleConfig:
    return NeedleConfig(
        n_docs=args.n_docs, n_needles=args.n_needles, k=args.k, n_queries=args.queries,
        embed_dim=args.embed_dim, d_model=args.d_model, embed_seed=args.embed_seed,
        feature_buckets=args.feature_buckets or max(4096, args.embed_dim),
    )


def cmd_eval_needle(args) -> int:
    cfg = _needle_config(args)
    reports = []
    for seed in args.seed:
        suite = build_needle_suite(seed, cfg)
        reports.append(evaluate_mode(suite, "rsar+rerank", True, True)[0])
        reports.append(evaluate_mode(suite, "uniform", False, False)[0])
    write_records(reports, sys.stdout, include_timing=not args.no_timing)
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = _needle_config(args)
    reports = [r for seed in args.seed for r in run_ablation(seed, cfg)]
    write_records(reports, sys.stdout, include_timing=not args.no_timing)
    return EXIT_OK


def cmd_bench(args) -> int:
    kw = dict(context_lengths=tuple(args.context_lengths), n_queries=args.queries,
              k=args.k, seed=args.seed)
    if args.bank:
        cfg = BenchConfig.from_bank(load_bank(args.bank), **kw)
    else:
        cfg = BenchConfig(**kw)
    write_records(run_benchmark(cfg), sys.stdout)
    return EXIT_OK


def cmd_snapshot(args) -> int:
    bank = load_bank(args.bank)
    save_bank(bank, args.out)
    _emit({"entries": len(bank), "pairs": bank.total_pairs, "bytes": bank.nbytes(),
           "clock": bank.clock, "config": bank.config(), "out": str(args.out)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankmem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="chunk a corpus into a bank file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--bank", required=True, help="bank file; created if missing")
    p.add_argument("--window", type=int, default=512)
    p.add_argument("--stride", type=int, default=512)
    p.add_argument("--tau", type=int, default=128)
    p.add_argument("--seed", type=int, default=0, help="synthetic key/value seed")
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--capacity", type=int, default=32768)
    p.add_argument("--projection-seed", type=int, default=0)
    p.add_argument("--usage-decay", type=float, default=0.9)
    p.add_argument("--usage-boost", type=float, default=0.5)
    p.add_argument("--score-floor", type=float, default=0.0)
    _add_embed_args(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("retrieve", help="query a bank")
    p.add_argument("--bank", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=int, default=8)
    p.add_argument("--uniform", action="store_true", help="cosine-only baseline")
    p.add_argument("--rerank", dest="rerank", action="store_true", default=None)
    p.add_argument("--no-rerank", dest="rerank", action="store_false")
    p.add_argument("--update-usage", action="store_true",
                   help="record this query's hits in the bank's usage statistics")
    p.set_defaults(func=cmd_retrieve)

    for name, func, helptext in (("eval-needle", cmd_eval_needle, "needle retrieval eval"),
                                 ("ablate", cmd_ablate, "scoring x rerank ablation")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--seed", type=_seed_list, default=[7], help="seed, list, or range like 1-10")
        p.add_argument("--n-docs", type=int, default=210)
        p.add_argument("--n-needles", type=int, default=10)
        p.add_argument("-k", type=int, default=8)
        p.add_argument("--queries", type=int, default=5)
        p.add_argument("--d-model", type=int, default=64)
        p.add_argument("--no-timing", action="store_true", help="omit wall-clock fields")
        _add_embed_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="latency / throughput / bytes-per-token")
    p.add_argument("--bank", help="take dimensions and capacity from this bank")
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--context-lengths", type=_int_list, default=[1024, 2048, 4096, 16384])
    p.add_argument("-k", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("snapshot", help="validate a bank and write a copy")
    p.add_argument("--bank", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_snapshot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, CorpusError, OSError) as exc:
        print(f"rankmem: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, GroupSizeError, ValueError) as exc:
        print(f"rankmem: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
