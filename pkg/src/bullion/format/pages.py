"""Page content encode/decode for every column shape.

A page is: u32 live content length, the content, then zero padding up to
the page's physical size (padding appears after in-place deletions shrink
re-encoded content; fresh pages have none). Content layout per column:

    scalar columns       one serialized encoded block
    list columns         a lengths block then a flattened-values block
    sparse sequences     one sliding-window delta block
    dual-split floats    the high 16-bit halves then the low halves
"""

from __future__ import annotations

import struct

import numpy as np

from .. import sparse_delta
from ..encoding import EncodingConfig, SchemeId, ValueKind, decode, encode_with_scheme
from ..encoding.blocks import deserialize_block, serialize_block
from ..encoding.cascade import DEFAULT_CONFIG, _cascade
from ..errors import CorruptBlock, SchemaMismatch
from ..quantization import (
    QuantTarget,
    join_dual,
    narrow_to_bits,
    split_dual,
    widen_from_bits,
)
from .schema import ColumnSchema, LogicalType

PAGE_TYPE_SPARSE = 200
PAGE_TYPE_LIST = 201
PAGE_TYPE_DUAL = 202

_QUANT_KINDS = {
    QuantTarget.FP16: ValueKind.FLOAT16,
    QuantTarget.BF16: ValueKind.BFLOAT16,
    QuantTarget.FP8_E4M3: ValueKind.FLOAT8_E4M3,
    QuantTarget.FP8_E5M2: ValueKind.FLOAT8_E5M2,
}

_SCALAR_KINDS = {
    LogicalType.INT64: ValueKind.INT64,
    LogicalType.FLOAT32: ValueKind.FLOAT32,
    LogicalType.FLOAT64: ValueKind.FLOAT64,
    LogicalType.STRING: ValueKind.STRING,
}


def column_value_kind(col: ColumnSchema) -> ValueKind:
    """Element kind stored in this column's scalar pages."""
    quant = col.quantization.target if col.quantization else QuantTarget.NONE
    if quant in _QUANT_KINDS:
        return _QUANT_KINDS[quant]
    return _SCALAR_KINDS[col.logical_type]


def prepare_column_values(col: ColumnSchema, values: list) -> list:
    """Validate and coerce one column's values before page encoding.

    Float32 and quantized float columns round values to their storage
    precision here, so page round-trips are exact afterwards.
    """
    quant = col.quantization.target if col.quantization else QuantTarget.NONE
    lt = col.logical_type

    if lt in (LogicalType.LIST_INT64, LogicalType.LIST_FLOAT32):
        elem_float = lt == LogicalType.LIST_FLOAT32
        out = []
        for i, vec in enumerate(values):
            if not isinstance(vec, (list, tuple)):
                raise SchemaMismatch(f"column {col.name!r} row {i}: expected a list")
            row = []
            for v in vec:
                if elem_float:
                    if isinstance(v, bool) or not isinstance(v, (int, float)):
                        raise SchemaMismatch(
                            f"column {col.name!r} row {i}: list element {v!r} not a number")
                    row.append(_to_f32(float(v)))
                else:
                    if isinstance(v, bool) or not isinstance(v, int):
                        raise SchemaMismatch(
                            f"column {col.name!r} row {i}: list element {v!r} not an int")
                    row.append(v)
            out.append(row)
        return out

    if lt == LogicalType.INT64:
        for i, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, int):
                raise SchemaMismatch(f"column {col.name!r} row {i}: {v!r} is not an int")
        return list(values)

    if lt == LogicalType.STRING:
        for i, v in enumerate(values):
            if not isinstance(v, str):
                raise SchemaMismatch(f"column {col.name!r} row {i}: {v!r} is not a string")
        return list(values)

    # float columns
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaMismatch(f"column {col.name!r} row {i}: {v!r} is not a number")
    floats = [float(v) for v in values]
    if quant in _QUANT_KINDS:
        bits = narrow_to_bits(floats, quant)
        return [float(x) for x in widen_from_bits(bits, quant)]
    if lt == LogicalType.FLOAT32 or quant == QuantTarget.DUAL_SPLIT_16:
        return [_to_f32(v) for v in floats]
    return floats


def _to_f32(v: float) -> float:
    return struct.unpack("<f", struct.pack("<f", v))[0]


def encode_page(col: ColumnSchema, values: list,
                config: EncodingConfig = DEFAULT_CONFIG,
                compress_sparse_bulk: bool = True) -> tuple[int, bytes]:
    """Encode one page of prepared values; returns (page type byte, content)."""
    quant = col.quantization.target if col.quantization else QuantTarget.NONE
    lt = col.logical_type

    if col.is_sparse_sequence:
        block = sparse_delta.encode_sequence_column(values)
        return PAGE_TYPE_SPARSE, sparse_delta.serialize_sparse_block(
            block, compress_bulk=compress_sparse_bulk)

    if lt in (LogicalType.LIST_INT64, LogicalType.LIST_FLOAT32):
        elem_kind = ValueKind.INT64 if lt == LogicalType.LIST_INT64 else ValueKind.FLOAT32
        lengths = [len(v) for v in values]
        flat = [x for vec in values for x in vec]
        lengths_block = _cascade(lengths, ValueKind.INT64, config, 0)
        flat_block = (_cascade(flat, elem_kind, config, 0) if flat
                      else encode_with_scheme(flat, SchemeId.TRIVIAL, elem_kind, config, 0))
        return PAGE_TYPE_LIST, serialize_block(lengths_block) + serialize_block(flat_block)

    if quant == QuantTarget.DUAL_SPLIT_16:
        hi, lo = split_dual(values)
        return PAGE_TYPE_DUAL, hi.tobytes() + lo.tobytes()

    kind = column_value_kind(col)
    if quant == QuantTarget.INT_REHASH:
        block = encode_with_scheme(values, SchemeId.DICTIONARY, kind, config, 0)
    else:
        block = _cascade(values, kind, config, 0)
    return int(block.scheme), serialize_block(block)


def wrap_page(content: bytes, physical_size: int | None = None) -> bytes:
    """Prefix the live length header and zero-pad to the physical size."""
    page = struct.pack("<I", len(content)) + content
    if physical_size is not None:
        if len(page) > physical_size:
            raise ValueError("page content exceeds its physical size")
        page += bytes(physical_size - len(page))
    return page


def page_content(page_bytes: bytes) -> bytes:
    if len(page_bytes) < 4:
        raise CorruptBlock("page shorter than its header")
    (live,) = struct.unpack_from("<I", page_bytes, 0)
    if 4 + live > len(page_bytes):
        raise CorruptBlock("page live length exceeds page size")
    return page_bytes[4:4 + live]


def decode_page(col: ColumnSchema, page_bytes: bytes, rows_in_page: int,
                deletion_bits: list[bool] | None = None) -> list:
    """Decode one page back to exactly rows_in_page values.

    Pages whose encoded stream shrank under physical deletion (RLE paths)
    are re-expanded using the page's slice of the deletion vector, with
    MASK at the erased positions.
    """
    content = page_content(page_bytes)
    quant = col.quantization.target if col.quantization else QuantTarget.NONE
    lt = col.logical_type

    if col.is_sparse_sequence:
        vectors = sparse_delta.decode_sequence_column(
            sparse_delta.deserialize_sparse_block(content))
        if len(vectors) != rows_in_page:
            raise CorruptBlock(f"sparse page decoded {len(vectors)} of {rows_in_page} rows")
        return vectors

    if lt in (LogicalType.LIST_INT64, LogicalType.LIST_FLOAT32):
        elem_kind = ValueKind.INT64 if lt == LogicalType.LIST_INT64 else ValueKind.FLOAT32
        lengths_block, pos = deserialize_block(content, ValueKind.INT64, 0)
        flat_block, pos = deserialize_block(content, elem_kind, pos)
        if pos != len(content):
            raise CorruptBlock("trailing bytes after list page blocks")
        lengths = decode(lengths_block)
        flat = decode(flat_block)
        if len(lengths) != rows_in_page or len(flat) != sum(lengths):
            raise CorruptBlock("list page lengths disagree with row count")
        out = []
        at = 0
        for n in lengths:
            out.append(flat[at:at + n])
            at += n
        return out

    if quant == QuantTarget.DUAL_SPLIT_16:
        if len(content) != 4 * rows_in_page:
            raise CorruptBlock("dual-split page size disagrees with row count")
        half = 2 * rows_in_page
        hi = np.frombuffer(content[:half], dtype="<u2")
        lo = np.frombuffer(content[half:], dtype="<u2")
        return [float(v) for v in join_dual(hi, lo)]

    kind = column_value_kind(col)
    block, pos = deserialize_block(content, kind, 0)
    if pos != len(content):
        raise CorruptBlock("trailing bytes after page block")
    values = decode(block)
    if len(values) == rows_in_page:
        return values
    if deletion_bits is None or len(deletion_bits) != rows_in_page:
        raise CorruptBlock(
            f"page decoded {len(values)} of {rows_in_page} rows and no deletion bits")
    from ..encoding import MASK

    deleted = sum(deletion_bits)
    if len(values) + deleted != rows_in_page:
        raise CorruptBlock("deletion bits do not account for the missing rows")
    it = iter(values)
    return [MASK if d else next(it) for d in deletion_bits]
