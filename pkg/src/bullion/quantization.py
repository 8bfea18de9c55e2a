"""Storage-side precision reduction for floats and range reduction for ints.

Float narrowing (fp32 -> fp16 / bf16 / fp8) always rounds to nearest, ties
to even. Widening back to fp32 is exact for every representable value.
The dual 16-bit split is a bit split of the fp32 pattern: the high half is
a valid bfloat16 on its own, and joining the halves is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DistinctOverflow, UnsupportedType


class QuantTarget(IntEnum):
    """Persisted 1-byte quantization tags; never renumbered."""

    NONE = 0
    FP16 = 1
    BF16 = 2
    FP8_E4M3 = 3
    FP8_E5M2 = 4
    INT_REHASH = 5
    DUAL_SPLIT_16 = 6


_TARGET_NAMES = {
    "fp16": QuantTarget.FP16,
    "bf16": QuantTarget.BF16,
    "fp8_e4m3": QuantTarget.FP8_E4M3,
    "fp8": QuantTarget.FP8_E4M3,
    "fp8_e5m2": QuantTarget.FP8_E5M2,
    "int_rehash": QuantTarget.INT_REHASH,
    "dual_split_16": QuantTarget.DUAL_SPLIT_16,
}


@dataclass(frozen=True)
class QuantSpec:
    """Per-column quantization; rounding is round-to-nearest-even."""

    target: QuantTarget

    @classmethod
    def parse(cls, name: str) -> "QuantSpec":
        try:
            return cls(_TARGET_NAMES[name.strip().lower()])
        except KeyError:
            raise UnsupportedType(f"unknown quantization target {name!r}") from None

    @property
    def name(self) -> str:
        return self.target.name.lower()


# (exponent bits, mantissa bits, bias, has_inf) per float target
_FORMATS = {
    QuantTarget.FP16: (5, 10, 15, True),
    QuantTarget.BF16: (8, 7, 127, True),
    QuantTarget.FP8_E4M3: (4, 3, 7, False),
    QuantTarget.FP8_E5M2: (5, 2, 15, True),
}

FLOAT_TARGETS = frozenset(_FORMATS)


def _as_f32(values) -> np.ndarray:
    with np.errstate(over="ignore"):  # out-of-range f64 saturates to inf
        arr = np.ascontiguousarray(values, dtype=np.float32)
    return np.atleast_1d(arr)


def narrow_to_bits(values, target: QuantTarget) -> np.ndarray:
    """fp32 values -> target bit patterns (uint16 or uint8), RNE.

    Overflow saturates to +/-Inf where the target has Inf, and to the
    format max for E4M3 (which has none). Inf maps to the target's Inf,
    or to NaN for E4M3. NaN maps to the target's canonical quiet NaN.
    """
    exp_bits, man_bits, bias, has_inf = _FORMATS[target]
    x = _as_f32(values)
    bits32 = x.view(np.uint32).astype(np.int64)
    sign = (bits32 >> 31) & 1
    absbits = bits32 & 0x7FFFFFFF
    exp32 = absbits >> 23
    man32 = absbits & 0x7FFFFF

    shift_n = 23 - man_bits
    et = exp32 - 127 + bias

    # normal inputs landing in the target's normal range
    lsb_n = (man32 >> shift_n) & 1
    mant_rounded = (man32 + ((1 << (shift_n - 1)) - 1) + lsb_n) >> shift_n
    bits_normal = (et << man_bits) + mant_rounded  # mantissa carry feeds the exponent

    # normal inputs landing in the target's subnormal range
    full = man32 + (1 << 23)
    sh = np.minimum(shift_n + 1 - et, 40)
    sh = np.maximum(sh, 1)
    lsb_s = (full >> sh) & 1
    units = (full + ((np.int64(1) << (sh - 1)) - 1) + lsb_s) >> sh
    # units overflowing the subnormal range lands exactly on the first normal

    # subnormal inputs: value = man32 * 2^-149; target unit = 2^(1-bias-man_bits)
    s0 = 150 - bias - man_bits
    lsb_0 = (man32 >> s0) & 1 if s0 < 63 else 0
    units0 = (man32 + ((np.int64(1) << (s0 - 1)) - 1) + lsb_0) >> s0 if s0 < 63 else np.zeros_like(man32)

    tbits = np.where(et >= 1, bits_normal, units)
    tbits = np.where(exp32 == 0, units0, tbits)

    exp_all = (1 << exp_bits) - 1
    if has_inf:
        inf_t = exp_all << man_bits
        nan_t = inf_t | (1 << (man_bits - 1))
        tbits = np.where(tbits >= inf_t, inf_t, tbits)  # overflow -> Inf
        tbits = np.where(exp32 == 255, np.where(man32 != 0, nan_t, inf_t), tbits)
    else:
        nan_t = (exp_all << man_bits) | ((1 << man_bits) - 1)
        tbits = np.where(tbits >= nan_t, nan_t - 1, tbits)  # overflow -> format max
        tbits = np.where(exp32 == 255, nan_t, tbits)  # Inf and NaN -> NaN

    out = tbits | (sign << (exp_bits + man_bits))
    dtype = np.uint8 if exp_bits + man_bits + 1 <= 8 else np.uint16
    return out.astype(dtype)


def widen_from_bits(bits, target: QuantTarget) -> np.ndarray:
    """Target bit patterns -> exact fp32 values."""
    exp_bits, man_bits, bias, has_inf = _FORMATS[target]
    if target == QuantTarget.BF16:
        b = np.atleast_1d(np.asarray(bits, dtype=np.uint16)).astype(np.uint32)
        return (b << 16).view(np.float32)
    if target == QuantTarget.FP16:
        b = np.atleast_1d(np.asarray(bits, dtype=np.uint16))
        return b.view(np.float16).astype(np.float32)
    b = np.atleast_1d(np.asarray(bits)).astype(np.int64)
    sign = (b >> (exp_bits + man_bits)) & 1
    exp_all = (1 << exp_bits) - 1
    exp = (b >> man_bits) & exp_all
    man = b & ((1 << man_bits) - 1)
    normal = np.ldexp((man + (1 << man_bits)).astype(np.float32),
                      (exp - bias - man_bits).astype(np.int32))
    subnormal = np.ldexp(man.astype(np.float32),
                         np.int32(1 - bias - man_bits))
    out = np.where(exp == 0, subnormal, normal).astype(np.float32)
    if has_inf:
        out = np.where((exp == exp_all) & (man == 0), np.float32(np.inf), out)
        out = np.where((exp == exp_all) & (man != 0), np.float32(np.nan), out)
    else:
        out = np.where((exp == exp_all) & (man == ((1 << man_bits) - 1)),
                       np.float32(np.nan), out)
    return np.where(sign == 1, -out, out).astype(np.float32)


def quantize_floats(values, spec: QuantSpec) -> bytes:
    """Encode fp32 values as the target's little-endian bit patterns."""
    if spec.target not in FLOAT_TARGETS:
        raise UnsupportedType(f"{spec.name} is not a float quantization target")
    bits = narrow_to_bits(values, spec.target)
    return bits.astype(bits.dtype.newbyteorder("<")).tobytes()


def dequantize_floats(payload: bytes, spec: QuantSpec) -> list[float]:
    """Decode a quantized payload back to (exactly representable) floats."""
    if spec.target not in FLOAT_TARGETS:
        raise UnsupportedType(f"{spec.name} is not a float quantization target")
    width = target_byte_width(spec.target)
    dtype = np.dtype("<u2") if width == 2 else np.dtype("u1")
    bits = np.frombuffer(payload, dtype=dtype)
    return [float(v) for v in widen_from_bits(bits, spec.target)]


def target_byte_width(target: QuantTarget) -> int:
    exp_bits, man_bits, _, _ = _FORMATS[target]
    return (exp_bits + man_bits + 1) // 8


def split_dual(values) -> tuple[np.ndarray, np.ndarray]:
    """fp32 -> (high 16 bits, low 16 bits) of each bit pattern.

    The high half is a valid bfloat16 usable standalone; concatenating the
    halves reconstructs the original fp32 bits exactly.
    """
    bits = _as_f32(values).view(np.uint32)
    hi = (bits >> 16).astype(np.uint16)
    lo = (bits & 0xFFFF).astype(np.uint16)
    return hi, lo


def join_dual(hi, lo) -> np.ndarray:
    """Exact inverse of split_dual."""
    hi = np.atleast_1d(np.asarray(hi, dtype=np.uint16))
    lo = np.atleast_1d(np.asarray(lo, dtype=np.uint16))
    if hi.shape != lo.shape:
        raise ValueError(f"half lengths differ: {hi.shape} vs {lo.shape}")
    bits = (hi.astype(np.uint32) << 16) | lo.astype(np.uint32)
    return bits.view(np.float32)


@dataclass
class RehashTable:
    """First-occurrence list of original values; code = position."""

    values: list[int]
    width: int  # code width in bits: 8, 16 or 32


def rehash_ints(values) -> tuple[np.ndarray, RehashTable]:
    """Map wide integers to dense first-occurrence codes, losslessly."""
    mapping: dict[int, int] = {}
    table: list[int] = []
    codes = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        code = mapping.get(v)
        if code is None:
            code = len(table)
            mapping[v] = code
            table.append(v)
        codes[i] = code
    width, dtype = code_width(len(table))
    return codes.astype(dtype), RehashTable(table, width)


def code_width(distinct: int) -> tuple[int, type]:
    """Smallest of 8/16/32 bits that holds this many distinct codes."""
    if distinct >= 1 << 32:
        raise DistinctOverflow(f"{distinct} distinct values exceed 32-bit codes")
    if distinct <= 1 << 8:
        return 8, np.uint8
    if distinct <= 1 << 16:
        return 16, np.uint16
    return 32, np.uint32


def invert_rehash(codes, table: RehashTable) -> list[int]:
    values = table.values
    return [values[int(c)] for c in codes]


def pack_exact(values, kind) -> bytes:
    """Pack floats already representable in a reduced format; reject others."""
    from .encoding.blocks import ValueKind

    target = {
        ValueKind.FLOAT16: QuantTarget.FP16,
        ValueKind.BFLOAT16: QuantTarget.BF16,
        ValueKind.FLOAT8_E4M3: QuantTarget.FP8_E4M3,
        ValueKind.FLOAT8_E5M2: QuantTarget.FP8_E5M2,
    }[kind]
    arr = _as_f32(values)
    bits = narrow_to_bits(arr, target)
    back = widen_from_bits(bits, target)
    exact = (back == arr) | (np.isnan(back) & np.isnan(arr))
    if not bool(np.all(exact)):
        raise UnsupportedType(f"value not exactly representable as {target.name}")
    return bits.astype(bits.dtype.newbyteorder("<")).tobytes()


def unpack_exact(data: bytes, kind) -> list[float]:
    from .encoding.blocks import ValueKind

    target = {
        ValueKind.FLOAT16: QuantTarget.FP16,
        ValueKind.BFLOAT16: QuantTarget.BF16,
        ValueKind.FLOAT8_E4M3: QuantTarget.FP8_E4M3,
        ValueKind.FLOAT8_E5M2: QuantTarget.FP8_E5M2,
    }[kind]
    width = target_byte_width(target)
    dtype = np.dtype("<u2") if width == 2 else np.dtype("u1")
    bits = np.frombuffer(data, dtype=dtype)
    return [float(v) for v in widen_from_bits(bits, target)]
