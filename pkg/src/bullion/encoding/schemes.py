"""The individual encoding schemes: constructors, decode, masking support.

Each constructor builds an `EncodedBlock` for one scheme. Schemes with
sub-columns (RLE, Dictionary, ZigZag, Nullable) take pre-encoded child
blocks; `cascade.encode_with_scheme` wires the recursive selection in.
"""

from __future__ import annotations

import struct
import zlib
from collections import Counter

from .. import bitutil
from ..errors import CorruptBlock, EmptyInput, UnsupportedType
from .blocks import (
    FLOAT_KINDS,
    KIND_WIDTHS,
    MASK,
    EncodedBlock,
    SchemeId,
    ValueKind,
    raw_decode,
    raw_encode,
)

CHUNK_SIZE = 256 * 1024
_CHUNK_ENTRY = struct.Struct("<BII")  # flag, stored length, raw length

_MASKABLE_TRIVIAL_KINDS = frozenset({
    ValueKind.INT64,
    ValueKind.FLOAT64,
    ValueKind.FLOAT32,
    ValueKind.FLOAT16,
    ValueKind.BFLOAT16,
    ValueKind.FLOAT8_E4M3,
    ValueKind.FLOAT8_E5M2,
})


def _require_ints(values) -> None:
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise UnsupportedType(f"integer scheme got {type(v).__name__}")


def _require_unsigned(values) -> None:
    _require_ints(values)
    for v in values:
        if v < 0:
            raise UnsupportedType("unsigned scheme got a negative value")


def _finish(block: EncodedBlock) -> EncodedBlock:
    block.masked = supports_masking(block)
    return block


def _encode_single(value, kind: ValueKind) -> bytes:
    """Minimal self-delimiting-or-implicit encoding of one value."""
    if kind == ValueKind.INT64:
        if isinstance(value, bool) or not isinstance(value, int):
            raise UnsupportedType(f"expected int, got {type(value).__name__}")
        return bitutil.encode_uvarint(bitutil.zigzag_encode(value))
    if kind in FLOAT_KINDS:
        return raw_encode([value], kind)
    if kind in (ValueKind.STRING, ValueKind.BYTES):
        return raw_encode([value], kind)
    raise UnsupportedType(f"constant of kind {kind!r} unsupported")


def _decode_single(data: bytes, pos: int, kind: ValueKind):
    if kind == ValueKind.INT64:
        u, pos = bitutil.decode_uvarint(data, pos)
        return bitutil.zigzag_decode(u), pos
    width = KIND_WIDTHS[kind]
    if kind in FLOAT_KINDS:
        return raw_decode(data[pos:pos + width], 1, kind)[0], pos + width
    if kind in (ValueKind.STRING, ValueKind.BYTES):
        if pos + 4 > len(data):
            raise CorruptBlock("constant value truncated")
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        v = raw_decode(data[pos - 4:pos + n], 1, kind)[0]
        return v, pos + n
    raise CorruptBlock(f"constant of kind {kind!r} unsupported")


def trivial_block(values, kind: ValueKind) -> EncodedBlock:
    payload = raw_encode(values, kind)
    count = len(values)
    return _finish(EncodedBlock(SchemeId.TRIVIAL, payload, count, [], kind))


def constant_block(values, kind: ValueKind) -> EncodedBlock:
    if not len(values):
        raise EmptyInput("constant encoding needs at least one value")
    first = values[0]
    for v in values:
        if v != first:
            raise UnsupportedType("values are not constant")
    payload = _encode_single(first, kind)
    return _finish(EncodedBlock(SchemeId.CONSTANT, payload, len(values), [], kind))


def mainly_constant_block(values, kind: ValueKind) -> EncodedBlock:
    if not len(values):
        raise EmptyInput("mainly-constant encoding needs at least one value")
    counts = Counter(values)
    constant = counts.most_common(1)[0][0]
    flags = [v != constant for v in values]
    out = bytearray(_encode_single(constant, kind))
    out += bitutil.pack_bits(flags)
    for v, is_exc in zip(values, flags):
        if is_exc:
            out += _encode_single(v, kind)
    return _finish(EncodedBlock(SchemeId.MAINLY_CONSTANT, bytes(out), len(values), [], kind))


def mainly_constant_parts(block: EncodedBlock):
    """Parse a mainly-constant payload into (constant, [(index, value)])."""
    data = block.payload
    constant, pos = _decode_single(data, 0, block.kind)
    nbytes = (block.value_count + 7) // 8
    flags = bitutil.unpack_bits(data[pos:pos + nbytes], block.value_count)
    pos += nbytes
    exceptions = []
    for i, is_exc in enumerate(flags):
        if is_exc:
            v, pos = _decode_single(data, pos, block.kind)
            exceptions.append((i, v))
    if pos != len(data):
        raise CorruptBlock("trailing bytes in mainly-constant payload")
    return constant, exceptions


def rle_block(values_child: EncodedBlock, counts_child: EncodedBlock,
              kind: ValueKind) -> EncodedBlock:
    total = sum(decode(counts_child))
    block = EncodedBlock(SchemeId.RLE, b"", total, [values_child, counts_child], kind)
    return _finish(block)


def split_runs(values) -> tuple[list, list[int]]:
    """Split a sequence into (run values, run counts); adjacent runs differ."""
    run_values: list = []
    run_counts: list[int] = []
    for v in values:
        if run_values and run_counts and v == run_values[-1]:
            run_counts[-1] += 1
        else:
            run_values.append(v)
            run_counts.append(1)
    return run_values, run_counts


def rle_runs(block: EncodedBlock) -> list[tuple]:
    """Run (value, count) pairs of an RLE block."""
    if block.scheme != SchemeId.RLE:
        raise UnsupportedType("not an RLE block")
    return list(zip(decode(block.children[0]), decode(block.children[1])))


def dictionary_block(entries: list, codes_child: EncodedBlock,
                     kind: ValueKind) -> EncodedBlock:
    out = bytearray(bitutil.encode_uvarint(len(entries)))
    for e in entries:
        out += _encode_single(e, kind)
    block = EncodedBlock(SchemeId.DICTIONARY, bytes(out), codes_child.value_count,
                         [codes_child], kind)
    return _finish(block)


def dictionary_entries(block: EncodedBlock) -> list:
    """Dictionary entries for codes 1..k; code 0 is the mask sentinel."""
    if block.scheme != SchemeId.DICTIONARY:
        raise UnsupportedType("not a dictionary block")
    k, pos = bitutil.decode_uvarint(block.payload, 0)
    entries = []
    for _ in range(k):
        v, pos = _decode_single(block.payload, pos, block.kind)
        entries.append(v)
    if pos != len(block.payload):
        raise CorruptBlock("trailing bytes in dictionary payload")
    return entries


def dictionary_codes(values, kind: ValueKind) -> tuple[list, list[int]]:
    """First-occurrence dictionary; codes start at 1 (0 = mask sentinel)."""
    if not len(values):
        raise EmptyInput("dictionary encoding needs at least one value")
    mapping: dict = {}
    entries = []
    codes = []
    for v in values:
        code = mapping.get(v)
        if code is None:
            entries.append(v)
            code = len(entries)
            mapping[v] = code
        codes.append(code)
    return entries, codes


def fixed_bit_width_block(values, kind: ValueKind = ValueKind.INT64) -> EncodedBlock:
    _require_unsigned(values)
    width = max((v.bit_length() for v in values), default=1) or 1
    payload = bytes([width]) + bitutil.pack_uints(values, width)
    return _finish(EncodedBlock(SchemeId.FIXED_BIT_WIDTH, payload, len(values), [], ValueKind.INT64))


def varint_block(values, kind: ValueKind = ValueKind.INT64) -> EncodedBlock:
    _require_unsigned(values)
    out = bytearray()
    for v in values:
        out += bitutil.encode_uvarint(v)
    return _finish(EncodedBlock(SchemeId.VARINT, bytes(out), len(values), [], ValueKind.INT64))


def for_delta_block(values, kind: ValueKind = ValueKind.INT64) -> EncodedBlock:
    """Frame of reference: independent bit-packed offsets from the block min.

    Offsets are per-element (not chained), so any element is readable and
    maskable without touching its neighbours.
    """
    _require_ints(values)
    if not len(values):
        raise EmptyInput("frame-of-reference needs at least one value")
    base = min(values)
    offsets = [v - base for v in values]
    width = max((o.bit_length() for o in offsets), default=1) or 1
    payload = (bitutil.encode_uvarint(bitutil.zigzag_encode(base))
               + bytes([width]) + bitutil.pack_uints(offsets, width))
    return _finish(EncodedBlock(SchemeId.FOR_DELTA, payload, len(values), [], ValueKind.INT64))


def for_delta_parts(payload: bytes) -> tuple[int, int, int]:
    """(base, width, bit stream start offset) of a frame-of-reference payload."""
    zz, pos = bitutil.decode_uvarint(payload, 0)
    if pos >= len(payload):
        raise CorruptBlock("frame-of-reference payload truncated")
    return bitutil.zigzag_decode(zz), payload[pos], pos + 1


def zigzag_block(mapped_child: EncodedBlock, count: int) -> EncodedBlock:
    block = EncodedBlock(SchemeId.ZIGZAG, b"", count, [mapped_child], ValueKind.INT64)
    return _finish(block)


def nullable_block(values, dense_child: EncodedBlock, kind: ValueKind) -> EncodedBlock:
    bitmap = bitutil.pack_bits([v is not None for v in values])
    block = EncodedBlock(SchemeId.NULLABLE, bitmap, len(values), [dense_child], kind)
    return _finish(block)


def pack_chunks(raw: bytes) -> bytes:
    """Compress bytes as a table of fixed-size chunks.

    Incompressible chunks are stored raw, flagged per chunk, so the result
    never exceeds the input by more than the chunk table.
    """
    table = bytearray()
    body = bytearray()
    chunks = [raw[i:i + CHUNK_SIZE] for i in range(0, len(raw), CHUNK_SIZE)]
    for chunk in chunks:
        packed = zlib.compress(chunk, 6)
        if len(packed) < len(chunk):
            table += _CHUNK_ENTRY.pack(1, len(packed), len(chunk))
            body += packed
        else:
            table += _CHUNK_ENTRY.pack(0, len(chunk), len(chunk))
            body += chunk
    return struct.pack("<I", len(chunks)) + bytes(table) + bytes(body)


def chunked_block(values, kind: ValueKind) -> EncodedBlock:
    """General-purpose compression of the plain byte form, 256 KiB chunks."""
    payload = pack_chunks(raw_encode(values, kind))
    return _finish(EncodedBlock(SchemeId.CHUNKED, payload, len(values), [], kind))


def unpack_chunks(data: bytes) -> bytes:
    if len(data) < 4:
        raise CorruptBlock("chunk table truncated")
    (n_chunks,) = struct.unpack_from("<I", data, 0)
    pos = 4
    entries = []
    for _ in range(n_chunks):
        if pos + _CHUNK_ENTRY.size > len(data):
            raise CorruptBlock("chunk table truncated")
        entries.append(_CHUNK_ENTRY.unpack_from(data, pos))
        pos += _CHUNK_ENTRY.size
    out = bytearray()
    for flag, stored, raw_len in entries:
        chunk = data[pos:pos + stored]
        if len(chunk) != stored:
            raise CorruptBlock("chunk body truncated")
        pos += stored
        if flag:
            try:
                chunk = zlib.decompress(chunk)
            except zlib.error as exc:
                raise CorruptBlock(f"chunk decompression failed: {exc}") from None
            if len(chunk) != raw_len:
                raise CorruptBlock("chunk raw length mismatch")
        out += chunk
    if pos != len(data):
        raise CorruptBlock("trailing bytes after chunk body")
    return bytes(out)


def _chunked_raw(block: EncodedBlock) -> bytes:
    return unpack_chunks(block.payload)


def decode(block: EncodedBlock):
    """Decode a block back to its value sequence (exactly value_count values)."""
    s = block.scheme
    if s == SchemeId.TRIVIAL:
        return raw_decode(block.payload, block.value_count, block.kind)
    if s == SchemeId.CONSTANT:
        value, pos = _decode_single(block.payload, 0, block.kind)
        if pos != len(block.payload):
            raise CorruptBlock("trailing bytes in constant payload")
        return [value] * block.value_count
    if s == SchemeId.MAINLY_CONSTANT:
        constant, exceptions = mainly_constant_parts(block)
        out = [constant] * block.value_count
        for i, v in exceptions:
            out[i] = v
        return out
    if s == SchemeId.RLE:
        run_values = decode(block.children[0])
        run_counts = decode(block.children[1])
        if len(run_values) != len(run_counts):
            raise CorruptBlock("RLE sub-columns disagree on run count")
        out = []
        for v, n in zip(run_values, run_counts):
            if n < 0:
                raise CorruptBlock("negative RLE run count")
            # count 0 appears when in-place masking empties a run
            out.extend([v] * n)
        if len(out) != block.value_count:
            raise CorruptBlock("RLE total disagrees with value_count")
        return out
    if s == SchemeId.DICTIONARY:
        entries = dictionary_entries(block)
        codes = decode(block.children[0])
        out = []
        for c in codes:
            if c == 0:
                out.append(MASK)
            elif 1 <= c <= len(entries):
                out.append(entries[c - 1])
            else:
                raise CorruptBlock(f"dictionary code {c} out of range")
        return out
    if s == SchemeId.FIXED_BIT_WIDTH:
        if not block.payload:
            raise CorruptBlock("bit-packed payload missing width byte")
        width = block.payload[0]
        if width < 1:
            raise CorruptBlock("bit width < 1")
        return bitutil.unpack_uints(block.payload[1:], block.value_count, width)
    if s == SchemeId.VARINT:
        out = []
        pos = 0
        for _ in range(block.value_count):
            v, pos = bitutil.decode_uvarint(block.payload, pos)
            out.append(v)
        if pos != len(block.payload):
            raise CorruptBlock("trailing bytes in varint payload")
        return out
    if s == SchemeId.ZIGZAG:
        return [bitutil.zigzag_decode(v) for v in decode(block.children[0])]
    if s == SchemeId.FOR_DELTA:
        base, width, start = for_delta_parts(block.payload)
        offsets = bitutil.unpack_uints(block.payload[start:], block.value_count, width)
        return [base + o for o in offsets]
    if s == SchemeId.NULLABLE:
        present = bitutil.unpack_bits(block.payload, block.value_count)
        dense = decode(block.children[0])
        if len(dense) != sum(present):
            raise CorruptBlock("nullable dense length disagrees with bitmap")
        it = iter(dense)
        return [next(it) if p else None for p in present]
    if s == SchemeId.CHUNKED:
        raw = _chunked_raw(block)
        return raw_decode(raw, block.value_count, block.kind)
    raise CorruptBlock(f"cannot decode scheme {s!r}")


def supports_masking(block: EncodedBlock) -> bool:
    """Whether deleted elements can be physically erased in place.

    Fixed-slot schemes zero the deleted slot; varint keeps continuation
    bits; RLE re-encodes the page without the deleted elements. A
    dictionary or zigzag block delegates to its integer sub-column, which
    must mask to literal zero (the mask code / zigzag zero): frame of
    reference masks to its base instead, so it is excluded there.
    """
    s = block.scheme
    if s in (SchemeId.FIXED_BIT_WIDTH, SchemeId.VARINT, SchemeId.FOR_DELTA,
             SchemeId.RLE):
        return True
    if s == SchemeId.TRIVIAL:
        return block.kind in _MASKABLE_TRIVIAL_KINDS
    if s in (SchemeId.DICTIONARY, SchemeId.ZIGZAG):
        child = block.children[0]
        if s == SchemeId.DICTIONARY and child.scheme == SchemeId.RLE:
            return True
        return child.scheme in (SchemeId.FIXED_BIT_WIDTH, SchemeId.VARINT) or (
            child.scheme == SchemeId.TRIVIAL and child.kind == ValueKind.INT64)
    return False
