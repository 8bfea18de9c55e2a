"""In-place masking of deleted elements inside encoded blocks.

Every operation keeps the encoded form at most as large as before:

    bit-packed / frame-of-reference   zero the fixed-width slot
    varint                            keep each continuation bit, zero the
                                      7 payload bits, so byte positions of
                                      later values never move
    trivial numeric                   zero the fixed-width slot
    dictionary                        point the code at entry 0, the
                                      reserved mask sentinel; the
                                      dictionary bytes are never touched
    zigzag                            mask the mapped sub-column (zero
                                      decodes back to zero)
    RLE                               drop the deleted elements and
                                      re-encode; never larger because
                                      removal only ever merges runs. The
                                      deletion bits let decode reinsert
                                      mask placeholders at the original
                                      positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import bitutil
from ..encoding import EncodedBlock, SchemeId, ValueKind, decode
from ..encoding.cascade import DEFAULT_CONFIG, encode_with_scheme
from ..encoding.schemes import for_delta_parts, supports_masking
from ..errors import CorruptBlock, UnsupportedEncoding

_TRIVIAL_WIDTHS = {
    ValueKind.INT64: 8,
    ValueKind.FLOAT64: 8,
    ValueKind.FLOAT32: 4,
    ValueKind.FLOAT16: 2,
    ValueKind.BFLOAT16: 2,
    ValueKind.FLOAT8_E4M3: 1,
    ValueKind.FLOAT8_E5M2: 1,
}


@dataclass
class MaskResult:
    block: EncodedBlock
    deletion_bits: list[bool] | None = None  # set when the stream shrank (RLE)


def _check_offsets(block: EncodedBlock, offsets) -> list[int]:
    out = sorted(set(int(i) for i in offsets))
    if out and not 0 <= out[0] <= out[-1] < block.value_count:
        raise CorruptBlock(
            f"element offsets {out[0]}..{out[-1]} outside [0, {block.value_count})")
    return out


def mask_bitpacked(block: EncodedBlock, offsets) -> EncodedBlock:
    """Zero each deleted element's fixed-width slot; page size unchanged."""
    if block.scheme != SchemeId.FIXED_BIT_WIDTH:
        raise UnsupportedEncoding(f"expected bit-packed block, got {block.scheme.name}")
    offsets = _check_offsets(block, offsets)
    if not block.payload:
        raise CorruptBlock("bit-packed payload missing width byte")
    width = block.payload[0]
    buf = bytearray(block.payload[1:])
    for i in offsets:
        bitutil.clear_uint_slot(buf, i, width)
    return EncodedBlock(block.scheme, block.payload[:1] + bytes(buf),
                        block.value_count, [], block.kind, True)


def mask_varint(block: EncodedBlock, offsets) -> EncodedBlock:
    """Zero the 7 payload bits of each byte, keeping continuation bits."""
    if block.scheme != SchemeId.VARINT:
        raise UnsupportedEncoding(f"expected varint block, got {block.scheme.name}")
    offsets = set(_check_offsets(block, offsets))
    buf = bytearray(block.payload)
    pos = 0
    for i in range(block.value_count):
        start = pos
        while True:
            if pos >= len(buf):
                raise CorruptBlock("varint payload truncated")
            cont = buf[pos] & 0x80
            pos += 1
            if not cont:
                break
        if i in offsets:
            for b in range(start, pos):
                buf[b] &= 0x80
    return EncodedBlock(block.scheme, bytes(buf), block.value_count, [], block.kind, True)


def mask_for_delta(block: EncodedBlock, offsets) -> EncodedBlock:
    """Zero the offset slot; the element collapses to the block base."""
    if block.scheme != SchemeId.FOR_DELTA:
        raise UnsupportedEncoding(f"expected frame-of-reference block, got {block.scheme.name}")
    offsets = _check_offsets(block, offsets)
    _, width, start = for_delta_parts(block.payload)
    buf = bytearray(block.payload[start:])
    for i in offsets:
        bitutil.clear_uint_slot(buf, i, width)
    return EncodedBlock(block.scheme, block.payload[:start] + bytes(buf),
                        block.value_count, [], block.kind, True)


def _mask_trivial(block: EncodedBlock, offsets) -> EncodedBlock:
    width = _TRIVIAL_WIDTHS.get(block.kind)
    if width is None:
        raise UnsupportedEncoding(f"trivial {block.kind.name} pages cannot mask in place")
    offsets = _check_offsets(block, offsets)
    buf = bytearray(block.payload)
    for i in offsets:
        buf[i * width:(i + 1) * width] = bytes(width)
    return EncodedBlock(block.scheme, bytes(buf), block.value_count, [], block.kind, True)


def mask_rle(block: EncodedBlock, offsets) -> tuple[EncodedBlock, list[bool]]:
    """Drop deleted elements and re-encode the remainder as RLE.

    Returns the new block plus deletion bits over the original element
    positions; decoding reinserts mask placeholders from those bits.

    Removal merges runs, which usually shrinks the block. When the merged
    form would not fit (a merged count can widen the count sub-column's
    bit width), the original bytes are patched at identical size instead:
    counts decremented in their slots, emptied runs' values erased.
    Either way the result never exceeds the original encoded length.
    """
    if block.scheme != SchemeId.RLE:
        raise UnsupportedEncoding(f"expected RLE block, got {block.scheme.name}")
    offsets = set(_check_offsets(block, offsets))
    values = decode(block)
    bits = [i in offsets for i in range(len(values))]
    survivors = [v for i, v in enumerate(values) if i not in offsets]
    new_block = encode_with_scheme(survivors, SchemeId.RLE, block.kind, DEFAULT_CONFIG, 0)
    if new_block.serialized_size() <= block.serialized_size():
        return new_block, bits
    return _patch_rle_in_place(block, offsets), bits


def _patch_rle_in_place(block: EncodedBlock, offsets: set[int]) -> EncodedBlock:
    """Same-size masking: decrement run counts in their encoded slots and
    erase the value of any run that empties. Run boundaries stay put, so
    the byte layout is untouched except the patched slots."""
    values_child, counts_child = block.children
    counts = decode(counts_child)
    removed = [0] * len(counts)
    pos = 0
    for ri, c in enumerate(counts):
        removed[ri] = sum(1 for o in offsets if pos <= o < pos + c)
        pos += c
    new_counts = [c - d for c, d in zip(counts, removed)]
    new_counts_child = _patch_int_slots(counts_child, {
        ri: n for ri, (n, d) in enumerate(zip(new_counts, removed)) if d})
    emptied = [ri for ri, n in enumerate(new_counts) if n == 0 and counts[ri] > 0]
    new_values_child = _erase_value_slots(values_child, emptied)
    return EncodedBlock(SchemeId.RLE, b"", block.value_count - len(offsets),
                        [new_values_child, new_counts_child], block.kind, True)


def _patch_int_slots(child: EncodedBlock, updates: dict[int, int]) -> EncodedBlock:
    """Overwrite integer elements in place; new values are never larger."""
    if not updates:
        return child
    if child.scheme == SchemeId.FIXED_BIT_WIDTH:
        width = child.payload[0]
        buf = bytearray(child.payload[1:])
        for i, v in updates.items():
            bitutil.write_uint_slot(buf, i, width, v)
        return EncodedBlock(child.scheme, child.payload[:1] + bytes(buf),
                            child.value_count, [], child.kind, child.masked)
    if child.scheme == SchemeId.VARINT:
        buf = bytearray(child.payload)
        pos = 0
        for i in range(child.value_count):
            start = pos
            while buf[pos] & 0x80:
                pos += 1
            pos += 1
            if i in updates:
                _write_uvarint_padded(buf, start, pos - start, updates[i])
        return EncodedBlock(child.scheme, bytes(buf), child.value_count, [],
                            child.kind, child.masked)
    if child.scheme == SchemeId.TRIVIAL and child.kind == ValueKind.INT64:
        buf = bytearray(child.payload)
        for i, v in updates.items():
            buf[i * 8:(i + 1) * 8] = v.to_bytes(8, "little", signed=True)
        return EncodedBlock(child.scheme, bytes(buf), child.value_count, [],
                            child.kind, child.masked)
    raise UnsupportedEncoding(
        f"count sub-column scheme {child.scheme.name} cannot be patched in place")


def _write_uvarint_padded(buf: bytearray, start: int, length: int, value: int) -> None:
    """Encode value into exactly `length` LEB128 bytes (zero-padded groups)."""
    for i in range(length):
        group = value & 0x7F
        value >>= 7
        buf[start + i] = group | (0x80 if i + 1 < length else 0x00)
    if value:
        raise UnsupportedEncoding("patched varint does not fit its original bytes")


def _erase_value_slots(child: EncodedBlock, indexes: list[int]) -> EncodedBlock:
    """Physically erase run values whose runs emptied; size unchanged."""
    if not indexes:
        return child
    s = child.scheme
    if s == SchemeId.FIXED_BIT_WIDTH:
        return mask_bitpacked(child, indexes)
    if s == SchemeId.VARINT:
        return mask_varint(child, indexes)
    if s == SchemeId.FOR_DELTA:
        return mask_for_delta(child, indexes)
    if s == SchemeId.TRIVIAL:
        return _mask_trivial(child, indexes)
    if s == SchemeId.CONSTANT:
        # the single stored value is shared with surviving runs
        return child
    if s == SchemeId.DICTIONARY:
        return mask_dictionary(child, indexes).block
    raise UnsupportedEncoding(
        f"value sub-column scheme {s.name} cannot erase emptied runs")


def mask_dictionary(block: EncodedBlock, offsets) -> MaskResult:
    """Point deleted codes at the reserved mask entry (code 0).

    The dictionary payload bytes are left untouched. RLE-nested codes
    delegate to mask_rle on the code stream instead.
    """
    if block.scheme != SchemeId.DICTIONARY:
        raise UnsupportedEncoding(f"expected dictionary block, got {block.scheme.name}")
    child = block.children[0]
    if child.scheme == SchemeId.RLE:
        new_codes, bits = mask_rle(child, offsets)
        out = EncodedBlock(block.scheme, block.payload, new_codes.value_count,
                           [new_codes], block.kind, block.masked)
        return MaskResult(out, bits)
    masked_child = _mask_int_child(child, offsets)
    out = EncodedBlock(block.scheme, block.payload, block.value_count,
                       [masked_child], block.kind, block.masked)
    return MaskResult(out)


def _mask_int_child(child: EncodedBlock, offsets) -> EncodedBlock:
    """Mask an integer sub-column whose erased slots must decode to zero."""
    if child.scheme == SchemeId.FIXED_BIT_WIDTH:
        return mask_bitpacked(child, offsets)
    if child.scheme == SchemeId.VARINT:
        return mask_varint(child, offsets)
    if child.scheme == SchemeId.TRIVIAL and child.kind == ValueKind.INT64:
        return _mask_trivial(child, offsets)
    raise UnsupportedEncoding(
        f"sub-column scheme {child.scheme.name} does not mask to zero")


def mask_block(block: EncodedBlock, offsets) -> MaskResult:
    """Dispatch masking by scheme; raises UnsupportedEncoding otherwise."""
    s = block.scheme
    if s == SchemeId.FIXED_BIT_WIDTH:
        return MaskResult(mask_bitpacked(block, offsets))
    if s == SchemeId.VARINT:
        return MaskResult(mask_varint(block, offsets))
    if s == SchemeId.FOR_DELTA:
        return MaskResult(mask_for_delta(block, offsets))
    if s == SchemeId.TRIVIAL:
        return MaskResult(_mask_trivial(block, offsets))
    if s == SchemeId.RLE:
        new_block, bits = mask_rle(block, offsets)
        return MaskResult(new_block, bits)
    if s == SchemeId.DICTIONARY:
        return mask_dictionary(block, offsets)
    if s == SchemeId.ZIGZAG:
        if not supports_masking(block):
            raise UnsupportedEncoding("zigzag sub-column does not mask to zero")
        child = _mask_int_child(block.children[0], offsets)
        return MaskResult(EncodedBlock(s, block.payload, block.value_count,
                                       [child], block.kind, block.masked))
    raise UnsupportedEncoding(f"scheme {s.name} does not support in-place masking")
