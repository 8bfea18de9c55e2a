import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bullion.errors import CorruptBlock, EmptyInput
from bullion.sparse_delta import (
    SparseDeltaBlock,
    SparseDeltaEntry,
    decode_sequence_column,
    deserialize_sparse_block,
    encode_sequence_column,
    find_sliding_window,
    serialize_sparse_block,
)

# sixteen-element version of the engagement-history column the delta
# format was designed around: second vector prepends 76 and drops the
# last element; the third repeats the second unchanged
FIG_BASE = [92, 82, 66, 18, 67, 51, 24, 73, 88, 12, 41, 85, 59, 30, 47, 55]
FIG_SECOND = [76] + FIG_BASE[0:15]
FIG_THIRD = list(FIG_SECOND)


def brute_force_window(prev, curr, min_fraction):
    """Exhaustive decomposition search; the correctness oracle."""
    best = None
    m = len(curr)
    for head_len in range(m):
        for start in range(len(prev)):
            length = 0
            while (head_len + length < m and start + length < len(prev)
                   and curr[head_len + length] == prev[start + length]):
                length += 1
                cand = (-length, head_len, start)
                if best is None or cand < best:
                    best = cand
    if best is None:
        return None
    length, head_len, start = -best[0], best[1], best[2]
    if length < min_fraction * m:
        return None
    return (start, start + length - 1, curr[:head_len], curr[head_len + length:])


class TestFindSlidingWindow:
    def test_head_plus_prefix(self):
        assert find_sliding_window([1, 2, 3, 4], [9, 1, 2, 3], 0.5) == (0, 2, [9], [])

    def test_identity(self):
        v = [4, 5, 6, 7]
        assert find_sliding_window(v, v, 0.5) == (0, 3, [], [])

    def test_no_common_slice(self):
        assert find_sliding_window([1, 2], [7, 8], 0.5) is None

    def test_empty_prev_rejected(self):
        with pytest.raises(EmptyInput):
            find_sliding_window([], [1], 0.5)

    def test_empty_curr_is_literal(self):
        assert find_sliding_window([1, 2], [], 0.5) is None

    def test_matches_brute_force(self):
        rng = random.Random(0)
        for _ in range(3000):
            n = rng.randrange(1, 13)
            m = rng.randrange(0, 13)
            domain = rng.choice([2, 4, 2**40, 2**70])
            prev = [rng.randrange(-domain, domain) for _ in range(n)]
            curr = [rng.randrange(-domain, domain) for _ in range(m)]
            if rng.random() < 0.5 and m > 2:
                a = rng.randrange(n)
                b = rng.randrange(a, n)
                curr = curr[:1] + prev[a:b + 1] + curr[1:2]
            frac = rng.choice([0.0, 0.25, 0.5, 0.9, 1.0])
            assert find_sliding_window(prev, curr, frac) == \
                brute_force_window(prev, curr, frac)

    def test_repetitive_vectors_fast_path(self):
        prev = [3] * 200
        curr = [3] * 200
        assert find_sliding_window(prev, curr, 0.5) == (0, 199, [], [])


class TestEncodeColumn:
    def test_fig_entries_match_expected_fields(self):
        block = encode_sequence_column([FIG_BASE, FIG_SECOND, FIG_THIRD])
        e0, e1, e2 = block.entries
        assert (e0.delta_flag, e0.base_data) == (0, FIG_BASE)
        assert (e1.delta_flag, e1.range_start, e1.range_end) == (1, 0, 14)
        assert (len(e1.head), e1.head, len(e1.tail), e1.tail) == (1, [76], 0, [])
        assert (e2.delta_flag, e2.range_start, e2.range_end) == (1, 0, 15)
        assert (len(e2.head), len(e2.tail)) == (0, 0)

    def test_single_vector(self):
        block = encode_sequence_column([[1, 2, 3]])
        assert len(block.entries) == 1
        assert block.entries[0].delta_flag == 0

    def test_first_entry_always_base(self):
        rng = random.Random(1)
        for _ in range(50):
            vectors = [[rng.randrange(10) for _ in range(rng.randrange(0, 8))]
                       for _ in range(rng.randrange(1, 6))]
            block = encode_sequence_column(vectors)
            assert block.entries[0].delta_flag == 0

    def test_no_window_falls_back_to_base(self):
        block = encode_sequence_column([[1, 2, 3, 4], [9, 9, 9, 9]])
        assert block.entries[1].delta_flag == 0
        assert block.entries[1].base_data == [9, 9, 9, 9]

    def test_empty_column_rejected(self):
        with pytest.raises(EmptyInput):
            encode_sequence_column([])


class TestDecodeColumn:
    def test_fig_round_trip(self):
        vectors = [FIG_BASE, FIG_SECOND, FIG_THIRD]
        assert decode_sequence_column(encode_sequence_column(vectors)) == vectors

    def test_base_only_block(self):
        block = SparseDeltaBlock([SparseDeltaEntry(0, base_data=[5, 6]),
                                  SparseDeltaEntry(0, base_data=[7])])
        assert decode_sequence_column(block) == [[5, 6], [7]]

    def test_range_overrun_detected(self):
        block = SparseDeltaBlock([
            SparseDeltaEntry(0, base_data=[1, 2]),
            SparseDeltaEntry(1, range_start=0, range_end=5),
        ])
        with pytest.raises(CorruptBlock):
            decode_sequence_column(block)

    def test_delta_without_predecessor_detected(self):
        block = SparseDeltaBlock([SparseDeltaEntry(1, 0, 0, [], [])])
        with pytest.raises(CorruptBlock):
            decode_sequence_column(block)

    def test_chained_reference_is_previous_not_first(self):
        # third vector windows over the *second* (which added new data)
        v0 = [1, 2, 3, 4, 5, 6]
        v1 = [9, 1, 2, 3, 4, 5]
        v2 = [8, 9, 1, 2, 3, 4]
        block = encode_sequence_column([v0, v1, v2])
        assert [e.delta_flag for e in block.entries] == [0, 1, 1]
        assert block.entries[2].head == [8]
        assert decode_sequence_column(block) == [v0, v1, v2]


def shifted_window_vectors(rng, count, length=256, max_shift=16, domain=1 << 40):
    vectors = [[rng.randrange(domain) for _ in range(length)]]
    for _ in range(count - 1):
        prev = vectors[-1]
        h = rng.randrange(0, max_shift // 2 + 1)
        t = rng.randrange(0, max_shift - h + 1)
        keep = length - h - t
        start = rng.randrange(0, length - keep + 1)
        vectors.append([rng.randrange(domain) for _ in range(h)]
                       + prev[start:start + keep]
                       + [rng.randrange(domain) for _ in range(t)])
    return vectors


class TestSerialization:
    def test_round_trip_shifted_windows(self):
        rng = random.Random(2)
        vectors = shifted_window_vectors(rng, 400, length=64, max_shift=8)
        data = serialize_sparse_block(encode_sequence_column(vectors))
        assert decode_sequence_column(deserialize_sparse_block(data)) == vectors

    def test_variable_length_vectors(self):
        rng = random.Random(3)
        vectors = [[rng.randrange(100) for _ in range(rng.randrange(0, 20))]
                   for _ in range(100)]
        data = serialize_sparse_block(encode_sequence_column(vectors))
        assert decode_sequence_column(deserialize_sparse_block(data)) == vectors

    def test_compression_bound_on_shifted_windows(self):
        rng = random.Random(4)
        vectors = shifted_window_vectors(rng, 1000)
        data = serialize_sparse_block(encode_sequence_column(vectors))
        plain = sum(len(v) for v in vectors) * 8
        assert len(data) <= 0.25 * plain

    def test_bulk_compression_flag_round_trip(self):
        vectors = [[7] * 64 for _ in range(5)]  # compressible bulk
        block = encode_sequence_column(vectors, min_overlap_fraction=1.1)
        assert all(e.delta_flag == 0 for e in block.entries)
        packed = serialize_sparse_block(block, compress_bulk=True)
        raw = serialize_sparse_block(block, compress_bulk=False)
        assert len(packed) < len(raw)
        assert decode_sequence_column(deserialize_sparse_block(packed)) == vectors
        assert decode_sequence_column(deserialize_sparse_block(raw)) == vectors

    def test_truncation_detected(self):
        data = serialize_sparse_block(encode_sequence_column([[1, 2], [2, 3]]))
        with pytest.raises(CorruptBlock):
            deserialize_sparse_block(data[:len(data) - 1])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(st.integers(-2**62, 2**62), max_size=12),
                min_size=1, max_size=12))
def test_any_vector_list_round_trips(vectors):
    data = serialize_sparse_block(encode_sequence_column(vectors))
    assert decode_sequence_column(deserialize_sparse_block(data)) == vectors
