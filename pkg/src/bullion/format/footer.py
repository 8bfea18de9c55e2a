"""Flat binary footer: every array readable by offset arithmetic alone.

Opening a file parses one fixed-size header; array positions follow from
the counts in it, so open cost does not grow with column count. Column
lookup is a binary search over fixed 12-byte (hash, index) entries with a
full-name check against the string heap to guard hash collisions.

Footer layout (little-endian, no padding):

    header           num_rows u64, n_pages u32, n_groups u32, n_cols u32,
                     dv_words u32, n_checksums u32, heap_offset u32
    page_types       u8  x n_pages        top-level scheme byte per page
    rows_per_page    u32 x n_pages
    page_offsets     u64 x n_pages        absolute file offsets
    pages_per_group  u32 x n_groups       physical pages per row group
    group_offsets    u64 x n_groups       absolute file offsets
    column_sizes     u32 x n_groups*n_cols    chunk byte sizes
    column_offsets   u32 x n_groups*n_cols    chunk offsets from group start
    deletion_vec     u64 x dv_words       1 bit per row, 1 = deleted
    checksums        u64 x n_checksums    pages, then groups, then root
    name_index       (hash u64, column u32) x n_cols, sorted by hash
    schema           (name_off u32, name_len u32, type u8, compliance u8,
                      sparse u8, quant u8) x n_cols
    string heap      column names, UTF-8

Pages are enumerated per (group, logical column, page slot); a chunk's
pages are physically contiguous, so page byte sizes follow from adjacent
page offsets and the chunk extent.

The file tail after the footer is: footer length u32, then magic "BULN".
"""

from __future__ import annotations

import struct

from ..checksums import hash64
from ..errors import ColumnNotFound, CorruptBlock, TruncatedFooter
from ..quantization import QuantSpec, QuantTarget
from .schema import ColumnSchema, LogicalType

MAGIC = b"BULN"
_HEADER = struct.Struct("<QIIIIII")
_NAME_ENTRY = struct.Struct("<QI")
_SCHEMA_ENTRY = struct.Struct("<IIBBBB")


def name_hash(name: str) -> int:
    return hash64(name.encode("utf-8"))


def build_footer(*, num_rows: int, page_types: list[int], rows_per_page: list[int],
                 page_offsets: list[int], pages_per_group: list[int],
                 group_offsets: list[int], column_sizes: list[int],
                 column_offsets: list[int], deletion_words: list[int],
                 checksum_words: list[int], columns: list[ColumnSchema]) -> bytes:
    n_pages = len(page_types)
    n_groups = len(pages_per_group)
    n_cols = len(columns)
    if len(rows_per_page) != n_pages or len(page_offsets) != n_pages:
        raise ValueError("page array lengths disagree")
    if sum(pages_per_group) != n_pages:
        raise ValueError("pages_per_group does not cover all pages")
    if len(column_sizes) != n_groups * n_cols or len(column_offsets) != n_groups * n_cols:
        raise ValueError("chunk array lengths disagree")
    if len(checksum_words) != n_pages + n_groups + 1:
        raise ValueError("checksum word count mismatch")
    if len(deletion_words) != (num_rows + 63) // 64:
        raise ValueError("deletion vector does not cover num_rows")

    heap = bytearray()
    schema_entries = bytearray()
    for col in columns:
        raw = col.name.encode("utf-8")
        quant = col.quantization.target if col.quantization else QuantTarget.NONE
        schema_entries += _SCHEMA_ENTRY.pack(len(heap), len(raw), col.logical_type,
                                             col.compliance_level,
                                             1 if col.is_sparse_sequence else 0,
                                             quant)
        heap += raw

    index = sorted((name_hash(c.name), i) for i, c in enumerate(columns))
    name_index = b"".join(_NAME_ENTRY.pack(h, i) for h, i in index)

    body = bytearray()
    body += bytes(page_types)
    body += struct.pack(f"<{n_pages}I", *rows_per_page)
    body += struct.pack(f"<{n_pages}Q", *page_offsets)
    body += struct.pack(f"<{n_groups}I", *pages_per_group)
    body += struct.pack(f"<{n_groups}Q", *group_offsets)
    body += struct.pack(f"<{n_groups * n_cols}I", *column_sizes)
    body += struct.pack(f"<{n_groups * n_cols}I", *column_offsets)
    body += struct.pack(f"<{len(deletion_words)}Q", *deletion_words)
    body += struct.pack(f"<{len(checksum_words)}Q", *checksum_words)
    body += name_index
    body += schema_entries
    heap_offset = _HEADER.size + len(body)
    header = _HEADER.pack(num_rows, n_pages, n_groups, n_cols,
                          len(deletion_words), len(checksum_words), heap_offset)
    return header + bytes(body) + bytes(heap)


class FooterView:
    """Read-only view over footer bytes (or a zero-copy memoryview of
    them); array cells are decoded on access, never up front."""

    __slots__ = ("buf", "num_rows", "n_pages", "n_groups", "n_cols", "dv_words",
                 "n_checksums", "_off_page_types", "_off_rows_per_page",
                 "_off_page_offsets", "_off_pages_per_group", "_off_group_offsets",
                 "_off_column_sizes", "_off_column_offsets", "_off_deletion",
                 "_off_checksums", "_off_name_index", "_off_schema", "_off_heap",
                 "_group_page_prefix", "_group_row_prefix")

    def __init__(self, buf: bytes):
        if len(buf) < _HEADER.size:
            raise TruncatedFooter(f"footer of {len(buf)} bytes is too short")
        (self.num_rows, self.n_pages, self.n_groups, self.n_cols,
         self.dv_words, self.n_checksums, heap_offset) = _HEADER.unpack_from(buf, 0)
        off = _HEADER.size
        self._off_page_types = off
        off += self.n_pages
        self._off_rows_per_page = off
        off += 4 * self.n_pages
        self._off_page_offsets = off
        off += 8 * self.n_pages
        self._off_pages_per_group = off
        off += 4 * self.n_groups
        self._off_group_offsets = off
        off += 8 * self.n_groups
        n_chunks = self.n_groups * self.n_cols
        self._off_column_sizes = off
        off += 4 * n_chunks
        self._off_column_offsets = off
        off += 4 * n_chunks
        self._off_deletion = off
        off += 8 * self.dv_words
        self._off_checksums = off
        off += 8 * self.n_checksums
        self._off_name_index = off
        off += _NAME_ENTRY.size * self.n_cols
        self._off_schema = off
        off += _SCHEMA_ENTRY.size * self.n_cols
        self._off_heap = off
        if heap_offset != off or len(buf) < off:
            raise TruncatedFooter("footer arrays exceed the footer buffer")
        self.buf = buf
        self._group_page_prefix = None
        self._group_row_prefix = None

    # -- per-cell accessors ------------------------------------------------
    def page_type(self, i: int) -> int:
        return self.buf[self._off_page_types + i]

    def rows_per_page(self, i: int) -> int:
        return struct.unpack_from("<I", self.buf, self._off_rows_per_page + 4 * i)[0]

    def page_offset(self, i: int) -> int:
        return struct.unpack_from("<Q", self.buf, self._off_page_offsets + 8 * i)[0]

    def pages_per_group(self, g: int) -> int:
        return struct.unpack_from("<I", self.buf, self._off_pages_per_group + 4 * g)[0]

    def group_offset(self, g: int) -> int:
        return struct.unpack_from("<Q", self.buf, self._off_group_offsets + 8 * g)[0]

    def column_size(self, g: int, c: int) -> int:
        return struct.unpack_from("<I", self.buf, self._off_column_sizes + 4 * (g * self.n_cols + c))[0]

    def column_offset(self, g: int, c: int) -> int:
        return struct.unpack_from("<I", self.buf, self._off_column_offsets + 4 * (g * self.n_cols + c))[0]

    def deletion_word(self, w: int) -> int:
        return struct.unpack_from("<Q", self.buf, self._off_deletion + 8 * w)[0]

    def deletion_words(self) -> list[int]:
        return list(struct.unpack_from(f"<{self.dv_words}Q", self.buf, self._off_deletion))

    def checksum(self, i: int) -> int:
        return struct.unpack_from("<Q", self.buf, self._off_checksums + 8 * i)[0]

    def checksum_words(self) -> list[int]:
        return list(struct.unpack_from(f"<{self.n_checksums}Q", self.buf, self._off_checksums))

    def name_entry(self, i: int) -> tuple[int, int]:
        return _NAME_ENTRY.unpack_from(self.buf, self._off_name_index + _NAME_ENTRY.size * i)

    def column_name(self, c: int) -> str:
        name_off, name_len = struct.unpack_from("<II", self.buf,
                                                self._off_schema + _SCHEMA_ENTRY.size * c)
        start = self._off_heap + name_off
        return bytes(self.buf[start:start + name_len]).decode("utf-8")

    def column_schema(self, c: int) -> ColumnSchema:
        name_off, name_len, ltype, compliance, sparse, quant = _SCHEMA_ENTRY.unpack_from(
            self.buf, self._off_schema + _SCHEMA_ENTRY.size * c)
        start = self._off_heap + name_off
        name = bytes(self.buf[start:start + name_len]).decode("utf-8")
        spec = QuantSpec(QuantTarget(quant)) if quant else None
        return ColumnSchema(name, LogicalType(ltype), spec, compliance, bool(sparse))

    def schema(self) -> list[ColumnSchema]:
        return [self.column_schema(c) for c in range(self.n_cols)]

    # -- lookup and layout arithmetic ---------------------------------------
    def lookup(self, name: str) -> int:
        """Binary search on the name index; verifies the stored full name."""
        target = name_hash(name)
        lo, hi = 0, self.n_cols
        while lo < hi:
            mid = (lo + hi) // 2
            h, _ = self.name_entry(mid)
            if h < target:
                lo = mid + 1
            else:
                hi = mid
        i = lo
        while i < self.n_cols:
            h, col = self.name_entry(i)
            if h != target:
                break
            if self.column_name(col) == name:
                return col
            i += 1  # hash collision; check the neighbouring entries
        raise ColumnNotFound(f"column {name!r} not in file")

    def _page_prefix(self) -> list[int]:
        if self._group_page_prefix is None:
            prefix = [0]
            for g in range(self.n_groups):
                prefix.append(prefix[-1] + self.pages_per_group(g))
            self._group_page_prefix = prefix
        return self._group_page_prefix

    def pages_per_chunk(self, g: int) -> int:
        total = self.pages_per_group(g)
        ppc, rem = divmod(total, self.n_cols)
        if rem:
            raise CorruptBlock(f"group {g}: {total} pages not divisible by {self.n_cols} columns")
        return ppc

    def page_ordinal(self, g: int, c: int, k: int) -> int:
        return self._page_prefix()[g] + c * self.pages_per_chunk(g) + k

    def group_rows(self, g: int) -> int:
        ppc = self.pages_per_chunk(g)
        base = self.page_ordinal(g, 0, 0)
        return sum(self.rows_per_page(base + k) for k in range(ppc))

    def _row_prefix(self) -> list[int]:
        if self._group_row_prefix is None:
            prefix = [0]
            for g in range(self.n_groups):
                prefix.append(prefix[-1] + self.group_rows(g))
            self._group_row_prefix = prefix
        return self._group_row_prefix

    def group_row_start(self, g: int) -> int:
        return self._row_prefix()[g]

    def chunk_range(self, g: int, c: int) -> tuple[int, int]:
        """Absolute (offset, size) of one column chunk."""
        return self.group_offset(g) + self.column_offset(g, c), self.column_size(g, c)

    def page_range(self, g: int, c: int, k: int) -> tuple[int, int]:
        """Absolute (offset, size) of one page, padding included."""
        ppc = self.pages_per_chunk(g)
        ordinal = self.page_ordinal(g, c, k)
        off = self.page_offset(ordinal)
        if k + 1 < ppc:
            return off, self.page_offset(ordinal + 1) - off
        chunk_off, chunk_size = self.chunk_range(g, c)
        return off, chunk_off + chunk_size - off

    def deleted_count(self) -> int:
        return sum(bin(w).count("1") for w in self.deletion_words())

    # -- mutation support (in-place footer rewrite) -------------------------
    def deletion_region(self) -> tuple[int, int]:
        return self._off_deletion, 8 * self.dv_words

    def checksum_region(self) -> tuple[int, int]:
        return self._off_checksums, 8 * self.n_checksums

    def with_updates(self, deletion_words: list[int], checksum_words: list[int]) -> bytes:
        """Footer bytes with the deletion vector and checksums replaced.

        Both arrays are fixed-size from write time, so the footer always
        fits its original slot and data pages never move.
        """
        if len(deletion_words) != self.dv_words or len(checksum_words) != self.n_checksums:
            raise ValueError("updated arrays must keep their original sizes")
        buf = bytearray(self.buf)
        struct.pack_into(f"<{self.dv_words}Q", buf, self._off_deletion, *deletion_words)
        struct.pack_into(f"<{self.n_checksums}Q", buf, self._off_checksums, *checksum_words)
        return bytes(buf)
