"""Sliding-window delta codec for long-sequence sparse feature columns.

Consecutive vectors of the same user's history mostly shift a window over
the previous vector: a new element or two at the head, a few dropped at
the tail. Each vector is stored either literally (a base vector) or as
head ++ prev[range_start..range_end] ++ tail against the immediately
preceding decoded vector.

Wire layout (little-endian):

    entry count      u32
    delta flags      bitmap, bit i = entry i is a delta
    ranges           per delta entry in order: uvarint start, uvarint end
    lengths          per entry in order:
                       base  -> uvarint len(base_data)
                       delta -> uvarint len(head), uvarint len(tail)
    bulk flag        u8 (0 raw, 1 chunk-compressed)
    bulk length      u32 (stored byte length)
    bulk             base/head/tail element data, i64 per element,
                     concatenated in entry order
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

from . import bitutil
from .encoding.schemes import pack_chunks, unpack_chunks
from .errors import CorruptBlock, EmptyInput

_HASH_MOD = (1 << 61) - 1
_HASH_BASE = 1_000_003
_SEED_CAP = 16


@dataclass
class SparseDeltaEntry:
    """One encoded vector: a literal base or a window over the previous one."""

    delta_flag: int
    range_start: int = 0
    range_end: int = 0
    head: list[int] = field(default_factory=list)
    tail: list[int] = field(default_factory=list)
    base_data: list[int] = field(default_factory=list)


@dataclass
class SparseDeltaBlock:
    entries: list[SparseDeltaEntry]


def find_sliding_window(prev: list[int], curr: list[int],
                        min_overlap_fraction: float) -> tuple[int, int, list[int], list[int]] | None:
    """Best decomposition curr = head ++ prev[start..=end] ++ tail.

    Maximizes the overlap length; equal lengths prefer the shortest head,
    then the smallest range_start. Returns None when the best overlap is
    shorter than min_overlap_fraction * len(curr).

    Candidate matches come from a rolling-hash seed index over `prev` with
    exact verification, so worst case degrades to O(n*m) but typical
    shifted-window data stays near linear.
    """
    if not prev:
        raise EmptyInput("previous vector must be non-empty")
    n, m = len(prev), len(curr)
    required = min_overlap_fraction * m
    if m == 0 or required > min(n, m):
        return None

    # any qualifying overlap has length >= ceil(required) >= k, so a k-gram
    # seed index cannot miss it
    k = max(1, min(_SEED_CAP, max(1, math.ceil(required)), n, m))

    best: tuple[int, int, int] | None = None  # (-length, head, start)
    covered: dict[int, int] = {}  # diagonal (i-j) -> exclusive end of its found match

    def consider(i0: int, j0: int) -> bool:
        """Extend a verified k-seed at (curr i0, prev j0) maximally; True on optimum."""
        nonlocal best
        ci, pj = i0, j0
        while ci > 0 and pj > 0 and curr[ci - 1] == prev[pj - 1]:
            ci -= 1
            pj -= 1
        length = k + (i0 - ci)
        while ci + length < m and pj + length < n and curr[ci + length] == prev[pj + length]:
            length += 1
        covered[i0 - j0] = ci + length
        cand = (-length, ci, pj)
        if best is None or cand < best:
            best = cand
            return length == m and ci == 0 and pj == 0
        return False

    try:
        pb = struct.pack(f"<{n}q", *prev)
        cb = struct.pack(f"<{m}q", *curr)
    except struct.error:
        pb = cb = None  # elements outside int64; hash elements instead

    if pb is not None and cb is not None:
        done = False
        for i0 in range(m - k + 1):
            seed = cb[8 * i0:8 * (i0 + k)]
            at = pb.find(seed)
            while at != -1 and not done:
                if at % 8 == 0:
                    j0 = at // 8
                    if i0 >= covered.get(i0 - j0, 0):
                        done = consider(i0, j0)
                at = pb.find(seed, at + 1)
            # later matches start at head >= i0+1 and lose any remaining tie
            if done or (best is not None and -best[0] >= m - i0 - 1):
                break
    else:
        powk = pow(_HASH_BASE, k - 1, _HASH_MOD)
        index: dict[int, list[int]] = {}
        h = 0
        for j in range(n):
            if j >= k:
                h = (h - (prev[j - k] % _HASH_MOD) * powk) % _HASH_MOD
            h = (h * _HASH_BASE + (prev[j] % _HASH_MOD)) % _HASH_MOD
            if j >= k - 1:
                index.setdefault(h, []).append(j - k + 1)
        h = 0
        done = False
        for i in range(m):
            if i >= k:
                h = (h - (curr[i - k] % _HASH_MOD) * powk) % _HASH_MOD
            h = (h * _HASH_BASE + (curr[i] % _HASH_MOD)) % _HASH_MOD
            if i < k - 1 or done:
                continue
            i0 = i - k + 1
            for j0 in index.get(h, ()):
                if i0 >= covered.get(i0 - j0, 0) and curr[i0:i0 + k] == prev[j0:j0 + k]:
                    if consider(i0, j0):
                        done = True
                        break
            if best is not None and -best[0] >= m - i0 - 1:
                break

    if best is None:
        return None
    length, head_len, start = -best[0], best[1], best[2]
    if length < required:
        return None
    return start, start + length - 1, list(curr[:head_len]), list(curr[head_len + length:])


def encode_sequence_column(vectors: list[list[int]],
                           min_overlap_fraction: float = 0.5) -> SparseDeltaBlock:
    """Encode a column of integer vectors; entry 0 is always a base vector."""
    if not vectors:
        raise EmptyInput("cannot encode an empty vector column")
    entries: list[SparseDeltaEntry] = []
    prev: list[int] | None = None
    for vec in vectors:
        window = None
        if prev:
            window = find_sliding_window(prev, vec, min_overlap_fraction)
        if window is None:
            entries.append(SparseDeltaEntry(0, base_data=list(vec)))
        else:
            start, end, head, tail = window
            entries.append(SparseDeltaEntry(1, start, end, head, tail))
        prev = list(vec)
    return SparseDeltaBlock(entries)


def decode_sequence_column(block: SparseDeltaBlock) -> list[list[int]]:
    """Inverse of encode_sequence_column; a single forward pass."""
    out: list[list[int]] = []
    prev: list[int] | None = None
    for i, e in enumerate(block.entries):
        if e.delta_flag == 0:
            vec = list(e.base_data)
        else:
            if prev is None:
                raise CorruptBlock(f"entry {i} is a delta but has no predecessor")
            if not 0 <= e.range_start <= e.range_end < len(prev):
                raise CorruptBlock(
                    f"entry {i} range [{e.range_start},{e.range_end}] exceeds "
                    f"previous vector of length {len(prev)}")
            vec = list(e.head) + prev[e.range_start:e.range_end + 1] + list(e.tail)
        out.append(vec)
        prev = vec
    return out


def serialize_sparse_block(block: SparseDeltaBlock, compress_bulk: bool = True) -> bytes:
    entries = block.entries
    meta = bytearray(struct.pack("<I", len(entries)))
    meta += bitutil.pack_bits([e.delta_flag == 1 for e in entries])
    for e in entries:
        if e.delta_flag:
            meta += bitutil.encode_uvarint(e.range_start)
            meta += bitutil.encode_uvarint(e.range_end)
    bulk = bytearray()
    for e in entries:
        if e.delta_flag:
            meta += bitutil.encode_uvarint(len(e.head))
            meta += bitutil.encode_uvarint(len(e.tail))
            bulk += struct.pack(f"<{len(e.head)}q", *e.head)
            bulk += struct.pack(f"<{len(e.tail)}q", *e.tail)
        else:
            meta += bitutil.encode_uvarint(len(e.base_data))
            bulk += struct.pack(f"<{len(e.base_data)}q", *e.base_data)
    raw = bytes(bulk)
    if compress_bulk:
        packed = pack_chunks(raw)
        if len(packed) < len(raw):
            return bytes(meta) + b"\x01" + struct.pack("<I", len(packed)) + packed
    return bytes(meta) + b"\x00" + struct.pack("<I", len(raw)) + raw


def deserialize_sparse_block(data: bytes) -> SparseDeltaBlock:
    if len(data) < 4:
        raise CorruptBlock("sparse block truncated")
    (count,) = struct.unpack_from("<I", data, 0)
    pos = 4
    nbytes = (count + 7) // 8
    flags = bitutil.unpack_bits(data[pos:pos + nbytes], count)
    pos += nbytes
    ranges: list[tuple[int, int]] = []
    for f in flags:
        if f:
            rs, pos = bitutil.decode_uvarint(data, pos)
            re, pos = bitutil.decode_uvarint(data, pos)
            ranges.append((rs, re))
    lengths: list[tuple[int, ...]] = []
    riter = iter(ranges)
    for f in flags:
        if f:
            hl, pos = bitutil.decode_uvarint(data, pos)
            tl, pos = bitutil.decode_uvarint(data, pos)
            lengths.append((hl, tl))
        else:
            bl, pos = bitutil.decode_uvarint(data, pos)
            lengths.append((bl,))
    if pos + 5 > len(data):
        raise CorruptBlock("sparse bulk header truncated")
    bulk_flag = data[pos]
    (stored,) = struct.unpack_from("<I", data, pos + 1)
    pos += 5
    body = data[pos:pos + stored]
    if len(body) != stored:
        raise CorruptBlock("sparse bulk truncated")
    if pos + stored != len(data):
        raise CorruptBlock("trailing bytes after sparse bulk")
    raw = unpack_chunks(body) if bulk_flag == 1 else bytes(body)

    entries: list[SparseDeltaEntry] = []
    off = 0

    def take(n: int) -> list[int]:
        nonlocal off
        end = off + 8 * n
        if end > len(raw):
            raise CorruptBlock("sparse bulk too short for declared lengths")
        vals = list(struct.unpack_from(f"<{n}q", raw, off))
        off = end
        return vals

    for f, ln in zip(flags, lengths):
        if f:
            rs, re = next(riter)
            head = take(ln[0])
            tail = take(ln[1])
            entries.append(SparseDeltaEntry(1, rs, re, head, tail))
        else:
            entries.append(SparseDeltaEntry(0, base_data=take(ln[0])))
    if off != len(raw):
        raise CorruptBlock("sparse bulk has trailing bytes")
    return SparseDeltaBlock(entries)
