"""File reader: footer open, column lookup, coalesced projection, verify."""

from __future__ import annotations

import io
import mmap
import struct
from dataclasses import dataclass
from pathlib import Path

from ..checksums import _hash_words, hash64, tree_from_words
from ..compliance.vectors import DeletionVector
from ..encoding import MASK
from ..errors import BadMagic, RowOutOfRange, TruncatedFooter
from .footer import MAGIC, FooterView
from .pages import decode_page
from .schema import ColumnSchema

DEFAULT_COALESCE_GAP = 1 << 20


@dataclass
class ReadStats:
    preads: int = 0
    bytes_read: int = 0


@dataclass
class VerifyReport:
    ok: bool
    first_bad_page: int | None = None
    first_bad_group: int | None = None
    root_ok: bool = True

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "first_bad_page": self.first_bad_page,
            "first_bad_group": self.first_bad_group,
            "root_ok": self.root_ok,
        }


@dataclass
class RowLocation:
    group: int
    page: int
    offset: int


class _Source:
    """pread-style access over a path or an in-memory file image."""

    def __init__(self, src):
        self._mmap = None
        if isinstance(src, (bytes, bytearray)):
            self._blob = bytes(src)
            self._f = io.BytesIO(self._blob)
            self.size = len(src)
        else:
            self._blob = None
            self._f = open(Path(src), "rb")
            self._f.seek(0, io.SEEK_END)
            self.size = self._f.tell()
        self.stats = ReadStats()

    def pread(self, offset: int, size: int) -> bytes:
        self._f.seek(offset)
        data = self._f.read(size)
        self.stats.preads += 1
        self.stats.bytes_read += len(data)
        return data

    def view(self, offset: int, size: int) -> memoryview:
        """Zero-copy window; file-backed sources are memory-mapped so the
        cost of taking the view does not scale with its size."""
        if self._blob is not None:
            return memoryview(self._blob)[offset:offset + size]
        if self._mmap is None:
            self._mmap = mmap.mmap(self._f.fileno(), 0, prot=mmap.PROT_READ)
        return memoryview(self._mmap)[offset:offset + size]

    def close(self) -> None:
        if self._mmap is not None:
            try:
                self._mmap.close()
            except BufferError:
                pass  # footer views still alive; the GC unmaps later
            self._mmap = None
        self._f.close()


class BullionFile:
    """An opened file: footer view plus targeted page reads."""

    def __init__(self, source: _Source, footer: FooterView):
        self._source = source
        self.footer = footer

    @classmethod
    def open(cls, src) -> "BullionFile":
        source = _Source(src)
        try:
            footer = _read_footer_from(source)
        except Exception:
            source.close()
            raise
        return cls(source, footer)

    def close(self) -> None:
        self._source.close()

    def __enter__(self) -> "BullionFile":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def read_stats(self) -> ReadStats:
        return self._source.stats

    def deletion_vector(self) -> DeletionVector:
        return DeletionVector(self.footer.num_rows, self.footer.deletion_words())

    def project(self, names: list[str], coalesce_gap: int = DEFAULT_COALESCE_GAP,
                include_deleted: bool = False, mask_as=MASK) -> dict[str, list]:
        """Read the named columns; byte ranges closer than the gap merge
        into one read. Deleted rows are dropped unless include_deleted,
        in which case they surface as `mask_as`."""
        f = self.footer
        cols = [(name, f.lookup(name)) for name in names]
        dv = self.deletion_vector() if f.deleted_count() else None
        out: dict[str, list] = {name: [] for name in names}
        for g in range(f.n_groups):
            ranges = sorted(
                (f.chunk_range(g, c) + (name, c)) for name, c in cols)
            merged: list[list] = []
            for off, size, name, c in ranges:
                if merged and off - (merged[-1][0] + merged[-1][1]) <= coalesce_gap:
                    prev = merged[-1]
                    prev[1] = max(prev[1], off + size - prev[0])
                    prev[2].append((off, size, name, c))
                else:
                    merged.append([off, size, [(off, size, name, c)]])
            chunk_bytes: dict[str, bytes] = {}
            for m_off, m_size, members in merged:
                blob = self._source.pread(m_off, m_size)
                for off, size, name, c in members:
                    chunk_bytes[name] = blob[off - m_off:off - m_off + size]
            g_row0 = f.group_row_start(g)
            for name, c in cols:
                col_schema = f.column_schema(c)
                values = self._decode_chunk(col_schema, chunk_bytes[name], g, c, g_row0, dv)
                out[name].extend(values)
        if dv is not None:
            for name in names:
                col = out[name]
                if include_deleted:
                    out[name] = [mask_as if dv.get(i) else v for i, v in enumerate(col)]
                else:
                    out[name] = [v for i, v in enumerate(col) if not dv.get(i)]
        return out

    def _decode_chunk(self, col: ColumnSchema, chunk: bytes, g: int, c: int,
                      g_row0: int, dv: DeletionVector | None) -> list:
        f = self.footer
        ppc = f.pages_per_chunk(g)
        chunk_off = f.chunk_range(g, c)[0]
        values: list = []
        row = g_row0
        for k in range(ppc):
            off, size = f.page_range(g, c, k)
            rows = f.rows_per_page(f.page_ordinal(g, c, k))
            bits = dv.slice_bits(row, rows) if dv is not None else None
            page = chunk[off - chunk_off:off - chunk_off + size]
            values.extend(decode_page(col, page, rows, bits))
            row += rows
        return values

    def scan(self, **kwargs) -> dict[str, list]:
        names = [self.footer.column_name(c) for c in range(self.footer.n_cols)]
        return self.project(names, **kwargs)

    def read_page(self, g: int, c: int, k: int) -> bytes:
        off, size = self.footer.page_range(g, c, k)
        return self._source.pread(off, size)

    def verify(self) -> VerifyReport:
        """Recompute page hashes from bytes, then group and root hashes
        from the stored words, against the stored checksum arrays."""
        f = self.footer
        stored = f.checksum_words()
        tree = tree_from_words(stored, [f.pages_per_group(g) for g in range(f.n_groups)])
        first_bad_page = None
        ordinal = 0
        for g in range(f.n_groups):
            ppc = f.pages_per_chunk(g)
            for c in range(f.n_cols):
                for k in range(ppc):
                    off, size = f.page_range(g, c, k)
                    if hash64(self._source.pread(off, size)) != tree.page_hashes[ordinal]:
                        if first_bad_page is None:
                            first_bad_page = ordinal
                    ordinal += 1
        first_bad_group = None
        start = 0
        for g, count in enumerate(tree.group_page_counts):
            if _hash_words(tree.page_hashes[start:start + count]) != tree.group_hashes[g]:
                if first_bad_group is None:
                    first_bad_group = g
            start += count
        root_ok = _hash_words(tree.group_hashes) == tree.root
        ok = first_bad_page is None and first_bad_group is None and root_ok
        return VerifyReport(ok, first_bad_page, first_bad_group, root_ok)


def _read_footer_from(source: _Source) -> FooterView:
    if source.size < 8:
        raise BadMagic("file too short for a footer tail")
    tail = source.pread(source.size - 8, 8)
    if tail[4:] != MAGIC:
        raise BadMagic(f"bad magic {tail[4:]!r}")
    (footer_len,) = struct.unpack_from("<I", tail, 0)
    if footer_len + 8 > source.size:
        raise TruncatedFooter(f"footer of {footer_len} bytes exceeds the file")
    # a zero-copy window: opening cost is independent of footer size
    return FooterView(source.view(source.size - 8 - footer_len, footer_len))


def read_footer(src) -> FooterView:
    """Open just the footer of a file (path or bytes)."""
    if isinstance(src, FooterView):
        return src
    source = _Source(src)
    try:
        return _read_footer_from(source)
    finally:
        source.close()


def lookup_column(footer: FooterView, name: str) -> int:
    return footer.lookup(name)


def locate_row(footer: FooterView, row_id: int) -> RowLocation:
    """Map a global row ordinal to (group, page slot, offset in page)."""
    if not 0 <= row_id < footer.num_rows:
        raise RowOutOfRange(f"row {row_id} outside [0, {footer.num_rows})")
    g = 0
    while footer.group_row_start(g + 1) <= row_id:
        g += 1
    rem = row_id - footer.group_row_start(g)
    base = footer.page_ordinal(g, 0, 0)
    for k in range(footer.pages_per_chunk(g)):
        rows = footer.rows_per_page(base + k)
        if rem < rows:
            return RowLocation(g, k, rem)
        rem -= rows
    raise RowOutOfRange(f"row {row_id} beyond the row partition")  # unreachable


def project_columns(src, names: list[str], coalesce_gap: int = DEFAULT_COALESCE_GAP,
                    include_deleted: bool = False, mask_as=MASK) -> dict[str, list]:
    with BullionFile.open(src) as f:
        return f.project(names, coalesce_gap, include_deleted, mask_as)


def scan_file(src, **kwargs) -> dict[str, list]:
    with BullionFile.open(src) as f:
        return f.scan(**kwargs)


def verify_file(src) -> VerifyReport:
    with BullionFile.open(src) as f:
        return f.verify()
