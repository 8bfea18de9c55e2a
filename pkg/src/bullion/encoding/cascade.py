"""Sample-based scheme selection with bounded recursive (cascading) encoding.

Selection encodes a deterministic sample of the input under every
applicable candidate, keeps the smallest serialized result (ties go to the
lowest scheme tag), then encodes the full input with the winner. A final
guard against the plain layout makes the chosen size never exceed it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..errors import EmptyInput, UnsupportedType
from . import schemes
from .blocks import (
    EncodedBlock,
    SchemeId,
    ValueKind,
    infer_kind,
    serialize_block,
)

ALL_SCHEMES = frozenset(SchemeId)

# Schemes that may carry child blocks; admissible only above the depth cap.
_PARENT_SCHEMES = frozenset({
    SchemeId.RLE, SchemeId.DICTIONARY, SchemeId.ZIGZAG, SchemeId.NULLABLE,
})

# Sub-column candidate fences that keep parent blocks maskable in place:
# dictionary codes must erase to literal zero (the mask entry), and RLE
# sub-columns must stay patchable at equal size when re-encoding after a
# deletion would not shrink (run merging can widen the count bit width).
_RLE_COUNT_SCHEMES = frozenset({
    SchemeId.TRIVIAL, SchemeId.FIXED_BIT_WIDTH, SchemeId.VARINT,
})
_RLE_VALUE_SCHEMES = frozenset({
    SchemeId.TRIVIAL, SchemeId.CONSTANT, SchemeId.FIXED_BIT_WIDTH,
    SchemeId.VARINT, SchemeId.FOR_DELTA, SchemeId.DICTIONARY,
})
_DICT_CODE_SCHEMES = frozenset({
    SchemeId.TRIVIAL, SchemeId.FIXED_BIT_WIDTH, SchemeId.VARINT, SchemeId.RLE,
})  # no CONSTANT: every code slot must stay individually erasable


def _fenced(config: EncodingConfig, allowed: frozenset[SchemeId]) -> EncodingConfig:
    candidates = config.candidate_set & allowed
    if not candidates:
        candidates = frozenset({SchemeId.TRIVIAL})
    return replace(config, candidate_set=candidates)


@dataclass(frozen=True)
class EncodingConfig:
    max_recursion_depth: int = 2
    sample_fraction: float = 0.01
    min_sample: int = 1024
    candidate_set: frozenset[SchemeId] = field(default=ALL_SCHEMES)
    allow_chunked: bool = True

    def __post_init__(self):
        if self.max_recursion_depth < 1:
            raise ValueError("max_recursion_depth must be >= 1")
        if not 0 < self.sample_fraction <= 1:
            raise ValueError("sample_fraction must be in (0, 1]")


DEFAULT_CONFIG = EncodingConfig()


def sample_values(values, config: EncodingConfig) -> list:
    """First 1024 values plus a uniform stride sample; no RNG, reproducible."""
    n = len(values)
    target = max(config.min_sample, math.ceil(n * config.sample_fraction))
    if n <= target:
        return list(values)
    head = list(values[:config.min_sample])
    remaining = target - len(head)
    if remaining <= 0:
        return head
    tail_len = n - len(head)
    stride = max(1, tail_len // remaining)
    i = config.min_sample
    while len(head) < target and i < n:
        head.append(values[i])
        i += stride
    return head


def _applicable(values, kind: ValueKind, depth: int, config: EncodingConfig) -> list[SchemeId]:
    has_null = any(v is None for v in values)
    allow_children = depth < config.max_recursion_depth
    out: list[SchemeId] = []
    if has_null:
        if SchemeId.NULLABLE in config.candidate_set and allow_children:
            out.append(SchemeId.NULLABLE)
        return out

    is_int = kind == ValueKind.INT64
    nonneg = is_int and all(v >= 0 for v in values)
    for scheme in sorted(config.candidate_set):
        if scheme == SchemeId.TRIVIAL:
            out.append(scheme)
        elif scheme == SchemeId.CONSTANT:
            if values and all(v == values[0] for v in values):
                out.append(scheme)
        elif scheme == SchemeId.MAINLY_CONSTANT:
            if values:
                out.append(scheme)
        elif scheme == SchemeId.RLE:
            if allow_children and values:
                out.append(scheme)
        elif scheme == SchemeId.DICTIONARY:
            if allow_children and values:
                out.append(scheme)
        elif scheme == SchemeId.FIXED_BIT_WIDTH:
            if nonneg:
                out.append(scheme)
        elif scheme == SchemeId.VARINT:
            if nonneg:
                out.append(scheme)
        elif scheme == SchemeId.ZIGZAG:
            if is_int and allow_children and not nonneg:
                out.append(scheme)
        elif scheme == SchemeId.FOR_DELTA:
            if is_int and values:
                out.append(scheme)
        elif scheme == SchemeId.CHUNKED:
            if config.allow_chunked:
                out.append(scheme)
    return out


def encode_with_scheme(values, scheme: SchemeId, kind: ValueKind,
                       config: EncodingConfig = DEFAULT_CONFIG,
                       depth: int = 0) -> EncodedBlock:
    """Encode with one fixed top scheme; children cascade at depth+1."""
    if scheme == SchemeId.TRIVIAL:
        return schemes.trivial_block(values, kind)
    if scheme == SchemeId.CONSTANT:
        return schemes.constant_block(values, kind)
    if scheme == SchemeId.MAINLY_CONSTANT:
        return schemes.mainly_constant_block(values, kind)
    if scheme == SchemeId.FIXED_BIT_WIDTH:
        return schemes.fixed_bit_width_block(values)
    if scheme == SchemeId.VARINT:
        return schemes.varint_block(values)
    if scheme == SchemeId.FOR_DELTA:
        return schemes.for_delta_block(values)
    if scheme == SchemeId.CHUNKED:
        return schemes.chunked_block(values, kind)
    if scheme == SchemeId.RLE:
        run_values, run_counts = schemes.split_runs(values)
        vc = _encode_child(run_values, kind, _fenced(config, _RLE_VALUE_SCHEMES), depth + 1)
        cc = _encode_child(run_counts, ValueKind.INT64,
                           _fenced(config, _RLE_COUNT_SCHEMES), depth + 1)
        block = EncodedBlock(SchemeId.RLE, b"", len(values), [vc, cc], kind)
        block.masked = schemes.supports_masking(block)
        return block
    if scheme == SchemeId.DICTIONARY:
        entries, codes = schemes.dictionary_codes(values, kind)
        codes_child = _encode_child(codes, ValueKind.INT64,
                                    _fenced(config, _DICT_CODE_SCHEMES), depth + 1)
        return schemes.dictionary_block(entries, codes_child, kind)
    if scheme == SchemeId.ZIGZAG:
        schemes._require_ints(values)
        mapped = [v << 1 if v >= 0 else (-v << 1) - 1 for v in values]
        child = _encode_child(mapped, ValueKind.INT64, config, depth + 1)
        return schemes.zigzag_block(child, len(values))
    if scheme == SchemeId.NULLABLE:
        dense = [v for v in values if v is not None]
        dense_kind = kind if dense else ValueKind.INT64
        child = _encode_child(dense, dense_kind, config, depth + 1)
        return schemes.nullable_block(values, child, kind)
    raise UnsupportedType(f"unknown scheme {scheme!r}")


def _encode_child(values, kind: ValueKind, config: EncodingConfig, depth: int) -> EncodedBlock:
    if not len(values):
        return schemes.trivial_block(values, kind)
    return _cascade(values, kind, config, depth)


def _cascade(values, kind: ValueKind, config: EncodingConfig, depth: int) -> EncodedBlock:
    candidates = _applicable(values, kind, depth, config)
    if not candidates:
        raise UnsupportedType(
            f"no candidate scheme accepts kind {kind.name} at depth {depth}")
    sample = sample_values(values, config)
    best_scheme = None
    best_size = None
    for scheme in candidates:  # candidates are tag-sorted; first win = lowest tag
        try:
            size = encode_with_scheme(sample, scheme, kind, config, depth).serialized_size()
        except UnsupportedType:
            continue
        if best_size is None or size < best_size:
            best_scheme, best_size = scheme, size
    if best_scheme is None:
        raise UnsupportedType(
            f"no candidate scheme accepts kind {kind.name} at depth {depth}")
    block = encode_with_scheme(values, best_scheme, kind, config, depth)
    if best_scheme != SchemeId.TRIVIAL and SchemeId.TRIVIAL in candidates:
        # sampling can mislead on skewed tails; never do worse than plain
        try:
            trivial = schemes.trivial_block(values, kind)
        except UnsupportedType:
            return block
        if trivial.serialized_size() < block.serialized_size():
            block = trivial
    return block


def encode_cascading(values, config: EncodingConfig | None = None,
                     kind: ValueKind | None = None) -> EncodedBlock:
    """Pick the smallest encoding over the candidate set, recursively."""
    if not len(values):
        raise EmptyInput("cannot encode an empty value sequence")
    if config is None:
        config = DEFAULT_CONFIG
    if kind is None:
        kind = infer_kind(values)
    return _cascade(values, kind, config, 0)


def estimate_size(sample, scheme: SchemeId, config: EncodingConfig | None = None,
                  kind: ValueKind | None = None) -> int:
    """Serialized size the scheme would produce for this sample.

    Deterministic, and exact whenever the sample is the full input.
    """
    if config is None:
        config = DEFAULT_CONFIG
    if kind is None:
        kind = infer_kind(sample)
    return len(serialize_block(encode_with_scheme(sample, scheme, kind, config, 0)))
