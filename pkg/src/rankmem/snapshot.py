"""Bit-exact binary snapshot of a :class:`~rankmem.memory_bank.MemoryBank`.

Layout (all little-endian; reals are IEEE-754 float64)::

    magic            4 bytes   b"RSAR"
    version          u32       currently 1
    header           80 bytes
        d_ret u32, d_model u32, tau u32, capacity_pairs u64,
        projection_seed u64, embed_seed u64, feature_buckets u32,
        usage_decay f64, usage_boost f64, score_floor f64,
        clock u64, entry_count u64
    entries, ascending chunk_id
        chunk_id u64, doc_id u64, span_start u64, span_end u64,
        inserted_at u64, n_pairs u32                        (44 bytes)
        embedding   d_ret f64
        keys        n_pairs * d_model f64, row-major
        values      n_pairs * d_model f64, row-major
        pair_scores n_pairs f64
        usage       f64
    checksum         u64       CRC-64/WE (ECMA-182, poly 0x42F0E1EBA9EA3693,
                               init/xorout all ones, unreflected) over every
                               preceding byte
"""

from __future__ import annotations

import os
import struct

import crcmod.predefined
import numpy as np

from .embedder import EmbedderConfig
from .exceptions import ConfigError, FormatError
from .memory_bank import MemoryBank, MemoryEntry

MAGIC = b"RSAR"
VERSION = 1

_PREAMBLE = struct.Struct("<4sI")
_HEADER = struct.Struct("<IIIQQQIdddQQ")
_ENTRY = struct.Struct("<QQQQQI")
_CHECKSUM = struct.Struct("<Q")

crc64 = crcmod.predefined.mkPredefinedCrcFun("crc-64-we")


def entry_size(n_pairs: int, d_ret: int, d_model: int) -> int:
    return _ENTRY.size + 8 * (d_ret + 2 * n_pairs * d_model + n_pairs + 1)


def snapshot_size(bank: MemoryBank) -> int:
    """Exact byte length of ``dump_bank(bank)`` without serializing it."""
    fixed = _PREAMBLE.size + _HEADER.size + _CHECKSUM.size
    return fixed + sum(entry_size(e.n_pairs, bank.d_ret, bank.d_model) for e in bank.entries)


def _f64(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def dump_bank(bank: MemoryBank) -> bytes:
    entries = bank.entries
    parts = [
        _PREAMBLE.pack(MAGIC, VERSION),
        _HEADER.pack(
            bank.d_ret,
            bank.d_model,
            bank.tau,
            bank.capacity_pairs,
            bank.projection_seed,
            bank.embedder.seed,
            bank.embedder.feature_buckets,
            bank.usage_decay,
            bank.usage_boost,
            bank.score_floor,
            bank.clock,
            len(entries),
        ),
    ]
    for e in entries:
        parts.append(
            _ENTRY.pack(e.chunk_id, e.doc_id, e.token_span[0], e.token_span[1], e.inserted_at, e.n_pairs)
        )
        parts.append(_f64(e.embedding))
        parts.append(_f64(e.keys))
        parts.append(_f64(e.values))
        parts.append(_f64(e.pair_scores))
        parts.append(struct.pack("<d", e.usage))
    body = b"".join(parts)
    return body + _CHECKSUM.pack(crc64(body))


def save_bank(bank: MemoryBank, path) -> None:
    """Write the snapshot atomically (temp file then rename)."""
    data = dump_bank(bank)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, data: bytes, limit: int):
        self.data = data
        self.limit = limit
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > self.limit:
            raise FormatError(f"truncated while reading {what}", self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, st: struct.Struct, what: str):
        return st.unpack(self.take(st.size, what))

    def floats(self, count: int, what: str, shape=None) -> np.ndarray:
        arr = np.frombuffer(self.take(8 * count, what), dtype="<f8").astype(np.float64)
        return arr.reshape(shape) if shape is not None else arr


def parse_bank(data: bytes) -> MemoryBank:
    """Decode snapshot bytes; raises :class:`FormatError` on any defect."""
    if len(data) < _PREAMBLE.size:
        raise FormatError("truncated before magic/version", len(data))
    magic, version = _PREAMBLE.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if len(data) < _PREAMBLE.size + _HEADER.size + _CHECKSUM.size:
        raise FormatError("truncated header", len(data))

    body_len = len(data) - _CHECKSUM.size
    r = _Reader(data, body_len)
    r.pos = _PREAMBLE.size
    (d_ret, d_model, tau, capacity, proj_seed, embed_seed, buckets,
     decay, boost, floor, clock, count) = r.unpack(_HEADER, "header")

    entries = []
    prev_id = -1
    for i in range(count):
        at = r.pos
        chunk_id, doc_id, start, end, inserted_at, n = r.unpack(_ENTRY, f"entry {i}")
        if chunk_id <= prev_id:
            raise FormatError(f"entry {i}: chunk ids not strictly increasing", at)
        if not 1 <= n <= tau:
            raise FormatError(f"entry {i}: pair count {n} outside [1, {tau}]", at)
        prev_id = chunk_id
        emb = r.floats(d_ret, f"entry {i} embedding")
        keys = r.floats(n * d_model, f"entry {i} keys", (n, d_model))
        values = r.floats(n * d_model, f"entry {i} values", (n, d_model))
        scores = r.floats(n, f"entry {i} pair scores")
        (usage,) = struct.unpack("<d", r.take(8, f"entry {i} usage"))
        entries.append(MemoryEntry(chunk_id, doc_id, (start, end), emb, keys, values,
                                   scores, usage, inserted_at))
    if r.pos != body_len:
        raise FormatError(f"{body_len - r.pos} unexpected trailing bytes", r.pos)
    (stored,) = _CHECKSUM.unpack_from(data, body_len)
    if stored != crc64(data[:body_len]):
        raise FormatError("checksum mismatch", body_len)

    try:
        bank = MemoryBank(
            d_model=d_model,
            capacity_pairs=capacity,
            tau=tau,
            embedder=EmbedderConfig(dim=d_ret, seed=embed_seed, feature_buckets=buckets),
            projection_seed=proj_seed,
            usage_decay=decay,
            usage_boost=boost,
            score_floor=floor,
        )
    except ConfigError as exc:
        raise FormatError(f"invalid header: {exc}", _PREAMBLE.size) from exc
    if sum(e.n_pairs for e in entries) > capacity:
        raise FormatError("stored pairs exceed capacity", _PREAMBLE.size)
    if entries and entries[-1].chunk_id >= clock:
        raise FormatError("clock behind newest chunk id", _PREAMBLE.size)
    bank._restore(entries, clock)
    return bank


def load_bank(path) -> MemoryBank:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_bank(data)
