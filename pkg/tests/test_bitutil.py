import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bullion import bitutil
from bullion.errors import CorruptBlock


def ref_uleb128(value: int) -> bytes:
    """Independent LEB128 reference built from a bit string."""
    bits = bin(value)[2:]
    bits = bits.zfill(((len(bits) + 6) // 7) * 7)
    groups = [bits[max(0, i - 7):i] for i in range(len(bits), 0, -7)]
    out = bytearray(int(g, 2) for g in groups)
    for i in range(len(out) - 1):
        out[i] |= 0x80
    return bytes(out)


def ref_pack_bits_le(values: list[int], width: int) -> bytes:
    """Independent bit-stream reference: one long LSB-first bit string."""
    bits = []
    for v in values:
        for b in range(width):
            bits.append((v >> b) & 1)
    out = bytearray((len(bits) + 7) // 8)
    for i, bit in enumerate(bits):
        out[i // 8] |= bit << (i % 8)
    return bytes(out)


@pytest.mark.parametrize("value,expected", [
    (300, bytes([0xAC, 0x02])),
    (0, bytes([0x00])),
    (127, bytes([0x7F])),
    (128, bytes([0x80, 0x01])),
])
def test_uvarint_known_values(value, expected):
    assert bitutil.encode_uvarint(value) == expected
    assert bitutil.encode_uvarint(value) == ref_uleb128(value)
    got, pos = bitutil.decode_uvarint(expected)
    assert (got, pos) == (value, len(expected))


@given(st.integers(min_value=0, max_value=2**80))
def test_uvarint_matches_reference(value):
    enc = bitutil.encode_uvarint(value)
    assert enc == ref_uleb128(value)
    assert bitutil.decode_uvarint(enc) == (value, len(enc))
    assert bitutil.uvarint_len(value) == len(enc)


def test_uvarint_continuation_bits():
    rng = random.Random(1)
    for _ in range(500):
        enc = bitutil.encode_uvarint(rng.randrange(2**40))
        assert all(b & 0x80 for b in enc[:-1])
        assert not enc[-1] & 0x80


def test_uvarint_truncated():
    with pytest.raises(CorruptBlock):
        bitutil.decode_uvarint(bytes([0x80]))


@given(st.integers(min_value=-2**70, max_value=2**70))
def test_zigzag_round_trip(v):
    z = bitutil.zigzag_encode(v)
    assert z >= 0
    assert bitutil.zigzag_decode(z) == v


@pytest.mark.parametrize("v,z", [(0, 0), (-1, 1), (1, 2), (-2, 3), (2, 4)])
def test_zigzag_known(v, z):
    assert bitutil.zigzag_encode(v) == z
    assert bitutil.zigzag_decode(z) == v


def test_pack_uints_matches_bitstring_reference():
    assert bitutil.pack_uints([3, 7, 5], 3) == ref_pack_bits_le([3, 7, 5], 3)
    rng = random.Random(2)
    for _ in range(300):
        width = rng.randrange(1, 67)
        values = [rng.randrange(1 << width) for _ in range(rng.randrange(0, 40))]
        packed = bitutil.pack_uints(values, width)
        assert packed == ref_pack_bits_le(values, width)
        assert bitutil.unpack_uints(packed, len(values), width) == values
        for i, v in enumerate(values):
            assert bitutil.read_uint_slot(packed, i, width) == v


def test_clear_uint_slot_only_touches_its_bits():
    rng = random.Random(3)
    for _ in range(300):
        width = rng.randrange(1, 50)
        values = [rng.randrange(1 << width) for _ in range(rng.randrange(1, 30))]
        buf = bytearray(bitutil.pack_uints(values, width))
        i = rng.randrange(len(values))
        bitutil.clear_uint_slot(buf, i, width)
        expect = list(values)
        expect[i] = 0
        assert bitutil.unpack_uints(bytes(buf), len(values), width) == expect


def test_pack_bits_round_trip():
    rng = random.Random(4)
    for _ in range(200):
        flags = [rng.random() < 0.5 for _ in range(rng.randrange(0, 70))]
        assert bitutil.unpack_bits(bitutil.pack_bits(flags), len(flags)) == flags
