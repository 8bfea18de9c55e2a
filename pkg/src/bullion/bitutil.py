"""Bit-level primitives: LEB128 varints, zigzag, bitmaps, fixed-width packing.

All bit streams are little-endian: bit j of a stream lives in byte j // 8
at in-byte position j % 8.
"""

from __future__ import annotations

from .errors import CorruptBlock


def encode_uvarint(value: int) -> bytes:
    """LEB128-encode one unsigned integer."""
    if value < 0:
        raise ValueError(f"varint requires value >= 0, got {value}")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def append_uvarint(out: bytearray, value: int) -> None:
    out += encode_uvarint(value)


def decode_uvarint(data: bytes, pos: int = 0) -> tuple[int, int]:
    """Decode one LEB128 integer at `pos`; returns (value, next position)."""
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise CorruptBlock("varint truncated")
        b = data[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7


def uvarint_len(value: int) -> int:
    n = 1
    value >>= 7
    while value:
        n += 1
        value >>= 7
    return n


def zigzag_encode(value: int) -> int:
    return (value << 1) if value >= 0 else (-value << 1) - 1


def zigzag_decode(value: int) -> int:
    return (value >> 1) if not value & 1 else -((value + 1) >> 1)


def pack_bits(flags: list[bool]) -> bytes:
    out = bytearray((len(flags) + 7) // 8)
    for i, f in enumerate(flags):
        if f:
            out[i >> 3] |= 1 << (i & 7)
    return bytes(out)


def unpack_bits(data: bytes, count: int) -> list[bool]:
    if len(data) < (count + 7) // 8:
        raise CorruptBlock("bitmap truncated")
    return [bool(data[i >> 3] & (1 << (i & 7))) for i in range(count)]


def pack_uints(values: list[int], width: int) -> bytes:
    """Pack unsigned ints into a contiguous little-endian bit stream.

    Element i occupies bits [i*width, (i+1)*width); random access needs
    only the index and the width.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    out = bytearray((len(values) * width + 7) // 8)
    for i, v in enumerate(values):
        bitpos = i * width
        byte, off = divmod(bitpos, 8)
        span = (off + width + 7) // 8
        window = int.from_bytes(out[byte:byte + span], "little")
        window |= v << off
        out[byte:byte + span] = window.to_bytes(span, "little")
    return bytes(out)


def unpack_uints(data: bytes, count: int, width: int) -> list[int]:
    if len(data) < (count * width + 7) // 8:
        raise CorruptBlock("bit-packed payload truncated")
    mask = (1 << width) - 1
    out = []
    for i in range(count):
        bitpos = i * width
        byte, off = divmod(bitpos, 8)
        span = (off + width + 7) // 8
        window = int.from_bytes(data[byte:byte + span], "little")
        out.append((window >> off) & mask)
    return out


def read_uint_slot(data: bytes, index: int, width: int) -> int:
    bitpos = index * width
    byte, off = divmod(bitpos, 8)
    span = (off + width + 7) // 8
    window = int.from_bytes(data[byte:byte + span], "little")
    return (window >> off) & ((1 << width) - 1)


def clear_uint_slot(buf: bytearray, index: int, width: int) -> None:
    """Zero element `index`'s bits in place; neighbouring bits untouched."""
    bitpos = index * width
    byte, off = divmod(bitpos, 8)
    span = (off + width + 7) // 8
    window = int.from_bytes(buf[byte:byte + span], "little")
    window &= ~(((1 << width) - 1) << off)
    buf[byte:byte + span] = window.to_bytes(span, "little")


def write_uint_slot(buf: bytearray, index: int, width: int, value: int) -> None:
    """Overwrite element `index` in place; value must fit the width."""
    if not 0 <= value < (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    clear_uint_slot(buf, index, width)
    bitpos = index * width
    byte, off = divmod(bitpos, 8)
    span = (off + width + 7) // 8
    window = int.from_bytes(buf[byte:byte + span], "little")
    window |= value << off
    buf[byte:byte + span] = window.to_bytes(span, "little")
