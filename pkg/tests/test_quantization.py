import math
import struct

import numpy as np
import pytest

ml_dtypes = pytest.importorskip("ml_dtypes")

from bullion.errors import DistinctOverflow, UnsupportedType
from bullion.quantization import (
    QuantSpec,
    QuantTarget,
    dequantize_floats,
    invert_rehash,
    join_dual,
    narrow_to_bits,
    quantize_floats,
    rehash_ints,
    split_dual,
    widen_from_bits,
)

_SPECIALS = np.array([0.0, -0.0, np.inf, -np.inf, np.nan, -np.nan,
                      np.float32(1e-45), np.float32(-1e-45),
                      np.finfo(np.float32).max, np.finfo(np.float32).min,
                      np.finfo(np.float32).tiny, 1.0, -1.0, 0.1, 0.3],
                     dtype=np.float32)


def _sample_floats(n: int, seed: int) -> np.ndarray:
    """Wide exponent coverage: random bit patterns filtered to finite floats,
    plus uniform values and the specials."""
    rng = np.random.RandomState(seed)
    bits = rng.randint(0, 2**32, size=n, dtype=np.uint64).astype(np.uint32)
    raw = bits.view(np.float32)
    uniform = rng.uniform(-1e5, 1e5, size=n // 4).astype(np.float32)
    return np.concatenate([raw, uniform, _SPECIALS])


def _assert_matches_oracle(values: np.ndarray, mine: np.ndarray, ref: np.ndarray,
                           widen_target: QuantTarget) -> None:
    mine_f = widen_from_bits(mine, widen_target)
    ref_f = widen_from_bits(ref.view(mine.dtype), widen_target)
    both_nan = np.isnan(mine_f) & np.isnan(ref_f)
    same = (mine == ref.view(mine.dtype)) | both_nan
    bad = np.nonzero(~same)[0]
    assert bad.size == 0, (
        f"{bad.size} mismatches; first at input {values[bad[0]]!r}: "
        f"mine {hex(int(mine[bad[0]]))} vs oracle {hex(int(ref.view(mine.dtype)[bad[0]]))}")


class TestNarrowingAgainstOracles:
    def test_fp16_million_samples(self):
        x = _sample_floats(500_000, 0)
        with np.errstate(over="ignore", invalid="ignore"):
            ref = x.astype(np.float16).view(np.uint16)
        _assert_matches_oracle(x, narrow_to_bits(x, QuantTarget.FP16), ref,
                               QuantTarget.FP16)

    def test_bf16_million_samples(self):
        x = _sample_floats(500_000, 1)
        with np.errstate(over="ignore", invalid="ignore"):
            ref = x.astype(ml_dtypes.bfloat16).view(np.uint16)
        _assert_matches_oracle(x, narrow_to_bits(x, QuantTarget.BF16), ref,
                               QuantTarget.BF16)

    def test_fp8_e5m2_million_samples(self):
        x = _sample_floats(500_000, 2)
        with np.errstate(over="ignore", invalid="ignore"):
            ref = x.astype(ml_dtypes.float8_e5m2).view(np.uint8)
        _assert_matches_oracle(x, narrow_to_bits(x, QuantTarget.FP8_E5M2), ref,
                               QuantTarget.FP8_E5M2)

    def test_fp8_e4m3_million_samples_within_range(self):
        # the oracle turns overflow into NaN; this library saturates to the
        # format max instead, so compare only inside the shared range
        x = _sample_floats(500_000, 3)
        finite_ok = np.isfinite(x) & (np.abs(x) <= 464.0)
        x = np.concatenate([x[finite_ok], _SPECIALS[4:6]])  # NaNs still shared
        with np.errstate(over="ignore", invalid="ignore"):
            ref = x.astype(ml_dtypes.float8_e4m3fn).view(np.uint8)
        _assert_matches_oracle(x, narrow_to_bits(x, QuantTarget.FP8_E4M3), ref,
                               QuantTarget.FP8_E4M3)

    def test_e4m3_saturation_policy(self):
        bits = narrow_to_bits([500.0, -500.0, 1e30, np.inf, -np.inf],
                              QuantTarget.FP8_E4M3)
        widened = widen_from_bits(bits[:3], QuantTarget.FP8_E4M3)
        assert list(widened) == [448.0, -448.0, 448.0]
        assert np.isnan(widen_from_bits(bits[3:], QuantTarget.FP8_E4M3)).all()

    def test_fp16_bf16_overflow_saturates_to_inf(self):
        assert widen_from_bits(narrow_to_bits([1e30], QuantTarget.FP16),
                               QuantTarget.FP16)[0] == np.inf
        assert widen_from_bits(narrow_to_bits([-1e39], QuantTarget.BF16),
                               QuantTarget.BF16)[0] == -np.inf

    @pytest.mark.parametrize("target,patterns", [
        (QuantTarget.FP16, 1 << 16),
        (QuantTarget.BF16, 1 << 16),
        (QuantTarget.FP8_E4M3, 1 << 8),
        (QuantTarget.FP8_E5M2, 1 << 8),
    ])
    def test_every_pattern_widens_then_renarrows_to_itself(self, target, patterns):
        dtype = np.uint16 if patterns == 1 << 16 else np.uint8
        bits = np.arange(patterns, dtype=dtype)
        widened = widen_from_bits(bits, target)
        renarrowed = narrow_to_bits(widened, target)
        not_nan = ~np.isnan(widened)
        assert np.array_equal(renarrowed[not_nan], bits[not_nan])
        assert np.isnan(widen_from_bits(renarrowed[~not_nan], target)).all()


class TestQuantizePayloads:
    def test_known_values(self):
        spec = QuantSpec(QuantTarget.FP16)
        assert quantize_floats([1.0], spec) == bytes([0x00, 0x3C])
        assert narrow_to_bits([0.1], QuantTarget.FP16)[0] == 0x2E66
        assert dequantize_floats(bytes([0x66, 0x2E]), spec)[0] == pytest.approx(
            0.0999755859375, abs=0)

    def test_fp16_relative_error_bound(self):
        rng = np.random.RandomState(4)
        x = rng.uniform(2.0**-10, 2.0**10, size=200_000).astype(np.float32)
        spec = QuantSpec(QuantTarget.FP16)
        back = np.array(dequantize_floats(quantize_floats(x, spec), spec),
                        dtype=np.float64)
        rel = np.abs(back - x.astype(np.float64)) / x.astype(np.float64)
        assert rel.max() <= 2.0**-11

    def test_payload_is_half_of_fp32(self):
        n = 10_000
        values = np.linspace(-3, 3, n, dtype=np.float32)
        for target in (QuantTarget.FP16, QuantTarget.BF16):
            assert len(quantize_floats(values, QuantSpec(target))) == 2 * n == 4 * n // 2
        for target in (QuantTarget.FP8_E4M3, QuantTarget.FP8_E5M2):
            assert len(quantize_floats(values, QuantSpec(target))) == n == 4 * n // 4

    def test_quantize_idempotent(self):
        x = _sample_floats(50_000, 5)
        for target in (QuantTarget.FP16, QuantTarget.BF16,
                       QuantTarget.FP8_E4M3, QuantTarget.FP8_E5M2):
            spec = QuantSpec(target)
            once = quantize_floats(x, spec)
            again = quantize_floats(dequantize_floats(once, spec), spec)
            assert once == again

    def test_nan_round_trips_as_nan(self):
        for target in (QuantTarget.FP16, QuantTarget.BF16,
                       QuantTarget.FP8_E4M3, QuantTarget.FP8_E5M2):
            spec = QuantSpec(target)
            out = dequantize_floats(quantize_floats([np.nan], spec), spec)
            assert math.isnan(out[0])

    def test_non_float_target_rejected(self):
        with pytest.raises(UnsupportedType):
            quantize_floats([1.0], QuantSpec(QuantTarget.INT_REHASH))


class TestDualSplit:
    def test_bit_split_of_0_3(self):
        (bits,) = struct.unpack("<I", struct.pack("<f", 0.3))
        assert bits == 0x3E99999A
        hi, lo = split_dual([0.3])
        assert (hi[0], lo[0]) == (0x3E99, 0x999A)
        assert join_dual(hi, lo)[0] == np.float32(0.3)

    def test_zero(self):
        hi, lo = split_dual([0.0])
        assert (hi[0], lo[0]) == (0, 0)

    def test_hi_half_is_truncated_bfloat16(self):
        x = np.float32(1.7)
        hi, lo = split_dual([x])
        assert join_dual(hi, np.zeros_like(lo))[0] == widen_from_bits(
            hi, QuantTarget.BF16)[0]

    def test_specials_bit_identical(self):
        specials = np.array([0.0, -0.0, np.inf, -np.inf, np.nan,
                             np.float32(1e-45), np.float32(-1e-45)], dtype=np.float32)
        hi, lo = split_dual(specials)
        joined = join_dual(hi, lo)
        assert np.array_equal(joined.view(np.uint32), specials.view(np.uint32))

    def test_million_random_bit_identical(self):
        rng = np.random.RandomState(6)
        bits = rng.randint(0, 2**32, size=1_000_000, dtype=np.uint64).astype(np.uint32)
        x = bits.view(np.float32)
        hi, lo = split_dual(x)
        assert np.array_equal(join_dual(hi, lo).view(np.uint32), bits)

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            join_dual(np.zeros(2, np.uint16), np.zeros(3, np.uint16))


class TestRehash:
    def test_first_occurrence(self):
        codes, table = rehash_ints([10**12, 5, 10**12])
        assert list(codes) == [0, 1, 0]
        assert table.values == [10**12, 5]
        assert table.width == 8
        assert invert_rehash(codes, table) == [10**12, 5, 10**12]

    def test_width_grows_with_distinct_count(self):
        codes, table = rehash_ints(list(range(300)))
        assert table.width == 16
        assert codes.dtype == np.uint16
        codes, table = rehash_ints(list(range(70_000)))
        assert table.width == 32

    def test_lossless_random(self):
        import random
        rng = random.Random(7)
        values = [rng.randrange(-2**62, 2**62) for _ in range(5000)]
        codes, table = rehash_ints(values)
        assert invert_rehash(codes, table) == values

    def test_overflow_guard(self):
        from bullion.quantization import code_width
        assert code_width(1 << 8)[0] == 8
        assert code_width((1 << 8) + 1)[0] == 16
        assert code_width((1 << 16) + 1)[0] == 32
        with pytest.raises(DistinctOverflow):
            code_width(1 << 32)
