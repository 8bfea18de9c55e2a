"""Composable column encodings with sample-based cascading selection."""

from __future__ import annotations

from .blocks import (
    MASK,
    EncodedBlock,
    SchemeId,
    ValueKind,
    deserialize_block,
    infer_kind,
    serialize_block,
)
from .cascade import (
    DEFAULT_CONFIG,
    EncodingConfig,
    encode_cascading,
    encode_with_scheme,
    estimate_size,
    sample_values,
)
from .schemes import (
    CHUNK_SIZE,
    decode,
    dictionary_entries,
    mainly_constant_parts,
    rle_runs,
    split_runs,
    supports_masking,
)


def encode_rle(values, config: EncodingConfig | None = None,
               kind: ValueKind | None = None) -> EncodedBlock:
    """Run-length encode; run values and counts are cascaded sub-columns."""
    return _named(values, SchemeId.RLE, config, kind)


def encode_varint(values, config: EncodingConfig | None = None) -> EncodedBlock:
    """LEB128 byte stream over unsigned integers."""
    return _named(values, SchemeId.VARINT, config, ValueKind.INT64)


def encode_bitpack(values, config: EncodingConfig | None = None) -> EncodedBlock:
    """Fixed-width little-endian bit packing of unsigned integers."""
    return _named(values, SchemeId.FIXED_BIT_WIDTH, config, ValueKind.INT64)


def encode_dictionary(values, config: EncodingConfig | None = None,
                      kind: ValueKind | None = None) -> EncodedBlock:
    """Dictionary codes (0 reserved for the mask sentinel), cascaded."""
    return _named(values, SchemeId.DICTIONARY, config, kind)


def encode_for_delta(values, config: EncodingConfig | None = None) -> EncodedBlock:
    """Frame of reference from the block min, random-access offsets."""
    return _named(values, SchemeId.FOR_DELTA, config, ValueKind.INT64)


def encode_zigzag(values, config: EncodingConfig | None = None) -> EncodedBlock:
    """Map signed to unsigned (0,-1,1,-2 -> 0,1,2,3), feed a child scheme."""
    return _named(values, SchemeId.ZIGZAG, config, ValueKind.INT64)


def encode_nullable(values, config: EncodingConfig | None = None,
                    kind: ValueKind | None = None) -> EncodedBlock:
    """Presence bitmap plus a dense sub-column of the non-null values."""
    return _named(values, SchemeId.NULLABLE, config, kind)


def encode_chunked(data, config: EncodingConfig | None = None,
                   kind: ValueKind | None = None) -> EncodedBlock:
    """Chunked general-purpose compression (raw fallback per chunk)."""
    if kind is None:
        kind = ValueKind.RAW if isinstance(data, (bytes, bytearray)) else infer_kind(data)
    return _named(bytes(data) if kind == ValueKind.RAW else data,
                  SchemeId.CHUNKED, config, kind)


def _named(values, scheme: SchemeId, config: EncodingConfig | None,
           kind: ValueKind | None) -> EncodedBlock:
    if config is None:
        config = DEFAULT_CONFIG
    if kind is None:
        kind = infer_kind(values)
    return encode_with_scheme(values, scheme, kind, config, 0)


__all__ = [
    "MASK",
    "EncodedBlock",
    "SchemeId",
    "ValueKind",
    "EncodingConfig",
    "DEFAULT_CONFIG",
    "CHUNK_SIZE",
    "encode_cascading",
    "encode_with_scheme",
    "encode_rle",
    "encode_varint",
    "encode_bitpack",
    "encode_dictionary",
    "encode_for_delta",
    "encode_zigzag",
    "encode_nullable",
    "encode_chunked",
    "decode",
    "estimate_size",
    "sample_values",
    "serialize_block",
    "deserialize_block",
    "supports_masking",
    "rle_runs",
    "split_runs",
    "dictionary_entries",
    "mainly_constant_parts",
    "infer_kind",
]
