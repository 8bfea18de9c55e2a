"""Encoded block model and its persisted wire form.

Wire layout per block (all integers little-endian):

    scheme tag      u8
    value_count     u32
    payload length  u32
    payload         bytes
    child count     u8
    children        recursively, same layout

The element type of a block is not persisted; it is supplied externally
(the file footer schema records each column's logical type) and carried
in memory on the block as `kind`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

from ..errors import CorruptBlock, UnsupportedType

BLOCK_HEADER = struct.Struct("<BII")


class SchemeId(IntEnum):
    """Stable 1-byte scheme tags persisted in files; never renumbered."""

    TRIVIAL = 0
    CONSTANT = 1
    MAINLY_CONSTANT = 2
    RLE = 3
    DICTIONARY = 4
    FIXED_BIT_WIDTH = 5
    VARINT = 6
    ZIGZAG = 7
    FOR_DELTA = 8
    NULLABLE = 9
    CHUNKED = 10


class ValueKind(IntEnum):
    """Element type of a value sequence (in-memory only, schema-supplied)."""

    INT64 = 0
    FLOAT64 = 1
    FLOAT32 = 2
    FLOAT16 = 3
    BFLOAT16 = 4
    FLOAT8_E4M3 = 5
    FLOAT8_E5M2 = 6
    STRING = 7
    BYTES = 8
    RAW = 9  # an opaque byte string; value_count is its length


# Fixed byte width of one raw element, or None for variable-width kinds.
KIND_WIDTHS: dict[ValueKind, int | None] = {
    ValueKind.INT64: 8,
    ValueKind.FLOAT64: 8,
    ValueKind.FLOAT32: 4,
    ValueKind.FLOAT16: 2,
    ValueKind.BFLOAT16: 2,
    ValueKind.FLOAT8_E4M3: 1,
    ValueKind.FLOAT8_E5M2: 1,
    ValueKind.STRING: None,
    ValueKind.BYTES: None,
    ValueKind.RAW: 1,
}

FLOAT_KINDS = frozenset({
    ValueKind.FLOAT64,
    ValueKind.FLOAT32,
    ValueKind.FLOAT16,
    ValueKind.BFLOAT16,
    ValueKind.FLOAT8_E4M3,
    ValueKind.FLOAT8_E5M2,
})


class _MaskSentinel:
    """Marker for a compliance-masked cell, distinct from None/null."""

    _instance = None
    __slots__ = ()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MASK"

    def __reduce__(self):
        return (_MaskSentinel, ())


MASK = _MaskSentinel()


@dataclass
class EncodedBlock:
    """One encoded column chunk page or sub-column.

    `masked` is True when the encoded form supports in-place deletion
    masking without growing. `kind` and `masked` are in-memory attributes;
    neither is persisted.
    """

    scheme: SchemeId
    payload: bytes
    value_count: int
    children: list["EncodedBlock"] = field(default_factory=list)
    kind: ValueKind = ValueKind.INT64
    masked: bool = False

    def serialized_size(self) -> int:
        size = BLOCK_HEADER.size + len(self.payload) + 1
        for child in self.children:
            size += child.serialized_size()
        return size

    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.depth() for c in self.children)


def serialize_block(block: EncodedBlock) -> bytes:
    out = bytearray()
    _serialize_into(out, block)
    return bytes(out)


def _serialize_into(out: bytearray, block: EncodedBlock) -> None:
    out += BLOCK_HEADER.pack(block.scheme, block.value_count, len(block.payload))
    out += block.payload
    out.append(len(block.children))
    for child in block.children:
        _serialize_into(out, child)


# Child element kinds are determined by the parent scheme: RLE run counts
# and dictionary codes are unsigned integers regardless of the value type.
def _child_kinds(scheme: SchemeId, kind: ValueKind, n_children: int) -> list[ValueKind]:
    if scheme == SchemeId.RLE:
        return [kind, ValueKind.INT64]
    if scheme == SchemeId.DICTIONARY:
        return [ValueKind.INT64]
    if scheme == SchemeId.ZIGZAG:
        return [ValueKind.INT64]
    if scheme == SchemeId.NULLABLE:
        return [kind]
    return [kind] * n_children


def deserialize_block(data: bytes, kind: ValueKind, pos: int = 0) -> tuple[EncodedBlock, int]:
    """Reconstruct a block (and its children) from wire bytes at `pos`."""
    from .schemes import supports_masking  # cycle: schemes imports blocks

    if pos + BLOCK_HEADER.size > len(data):
        raise CorruptBlock("block header truncated")
    tag, count, plen = BLOCK_HEADER.unpack_from(data, pos)
    pos += BLOCK_HEADER.size
    try:
        scheme = SchemeId(tag)
    except ValueError:
        raise CorruptBlock(f"unknown scheme tag {tag}") from None
    if pos + plen + 1 > len(data):
        raise CorruptBlock("block payload truncated")
    payload = bytes(data[pos:pos + plen])
    pos += plen
    n_children = data[pos]
    pos += 1
    child_kinds = _child_kinds(scheme, kind, n_children)
    if n_children != 0 and len(child_kinds) != n_children:
        raise CorruptBlock(
            f"scheme {scheme.name} expects {len(child_kinds)} children, got {n_children}"
        )
    children = []
    for ck in child_kinds[:n_children]:
        child, pos = deserialize_block(data, ck, pos)
        children.append(child)
    block = EncodedBlock(scheme, payload, count, children, kind)
    block.masked = supports_masking(block)
    return block, pos


def raw_encode(values, kind: ValueKind) -> bytes:
    """Plain (unencoded) byte form of a value sequence.

    Numeric kinds are fixed-width little-endian; strings and bytes are
    u32-length-prefixed; RAW is the byte string itself.
    """
    if kind == ValueKind.INT64:
        try:
            return struct.pack(f"<{len(values)}q", *values)
        except struct.error as exc:
            raise UnsupportedType(f"value outside int64 range: {exc}") from None
    if kind == ValueKind.FLOAT64:
        return struct.pack(f"<{len(values)}d", *values)
    if kind == ValueKind.FLOAT32:
        out = struct.pack(f"<{len(values)}f", *values)
        return out
    if kind in (ValueKind.FLOAT16, ValueKind.BFLOAT16,
                ValueKind.FLOAT8_E4M3, ValueKind.FLOAT8_E5M2):
        from .. import quantization

        return quantization.pack_exact(values, kind)
    if kind in (ValueKind.STRING, ValueKind.BYTES):
        out = bytearray()
        for v in values:
            data = v.encode("utf-8") if kind == ValueKind.STRING else bytes(v)
            out += struct.pack("<I", len(data))
            out += data
        return bytes(out)
    if kind == ValueKind.RAW:
        return bytes(values)
    raise UnsupportedType(f"no raw encoding for {kind!r}")


def raw_decode(data: bytes, count: int, kind: ValueKind):
    if kind == ValueKind.RAW:
        if len(data) != count:
            raise CorruptBlock("raw payload length mismatch")
        return bytes(data)
    width = KIND_WIDTHS[kind]
    if width is not None:
        if len(data) != count * width:
            raise CorruptBlock("fixed-width payload length mismatch")
        if kind == ValueKind.INT64:
            return list(struct.unpack(f"<{count}q", data))
        if kind == ValueKind.FLOAT64:
            return list(struct.unpack(f"<{count}d", data))
        if kind == ValueKind.FLOAT32:
            return list(struct.unpack(f"<{count}f", data))
        from .. import quantization

        return quantization.unpack_exact(data, kind)
    values = []
    pos = 0
    for _ in range(count):
        if pos + 4 > len(data):
            raise CorruptBlock("string payload truncated")
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise CorruptBlock("string payload truncated")
        chunk = data[pos:pos + n]
        pos += n
        values.append(chunk.decode("utf-8") if kind == ValueKind.STRING else bytes(chunk))
    if pos != len(data):
        raise CorruptBlock("trailing bytes after string payload")
    return values


def raw_encoded_size(values, kind: ValueKind) -> int:
    width = KIND_WIDTHS[kind]
    if kind == ValueKind.RAW:
        return len(values)
    if width is not None:
        return width * len(values)
    if kind == ValueKind.STRING:
        return sum(4 + len(v.encode("utf-8")) for v in values)
    return sum(4 + len(v) for v in values)


def infer_kind(values) -> ValueKind:
    """Guess the element kind of a Python value sequence."""
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool):
            raise UnsupportedType("bool sequences are not supported")
        if isinstance(v, int):
            return ValueKind.INT64
        if isinstance(v, float):
            return ValueKind.FLOAT64
        if isinstance(v, str):
            return ValueKind.STRING
        if isinstance(v, (bytes, bytearray)):
            return ValueKind.BYTES
        raise UnsupportedType(f"cannot encode values of type {type(v).__name__}")
    # all-null column; element kind is irrelevant for an empty dense part
    return ValueKind.INT64
