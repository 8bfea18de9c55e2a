"""File writer: row groups of column chunks, pages, checksums, flat footer."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

from ..checksums import compute_checksum_tree
from ..encoding import EncodingConfig, SchemeId
from ..encoding.cascade import DEFAULT_CONFIG
from ..errors import EmptyInput, SchemaMismatch
from ..layout import ColumnOrderSpec, RowOrderSpec, reorder_columns, reorder_rows
from .footer import MAGIC, build_footer
from .pages import encode_page, prepare_column_values, wrap_page
from .schema import ColumnSchema

_PAGE_TYPE_NAMES = {int(s): s.name for s in SchemeId}
_PAGE_TYPE_NAMES[200] = "SPARSE_DELTA"
_PAGE_TYPE_NAMES[201] = "LIST"
_PAGE_TYPE_NAMES[202] = "DUAL_SPLIT"


@dataclass(frozen=True)
class WriteOptions:
    rows_per_page: int = 4096
    pages_per_group: int = 16
    row_order: RowOrderSpec | None = None
    column_order: ColumnOrderSpec | None = None
    encoding_config: EncodingConfig = DEFAULT_CONFIG
    compress_sparse_bulk: bool = True

    def __post_init__(self):
        if self.rows_per_page < 1:
            raise ValueError("rows_per_page must be >= 1")
        if self.pages_per_group < 1:
            raise ValueError("pages_per_group must be >= 1")


@dataclass
class WriteStats:
    num_rows: int = 0
    num_groups: int = 0
    num_pages: int = 0
    file_bytes: int = 0
    data_bytes: int = 0
    footer_bytes: int = 0
    column_bytes: dict[str, int] = field(default_factory=dict)
    column_schemes: dict[str, dict[str, int]] = field(default_factory=dict)
    row_permutation: list[int] | None = None

    def to_dict(self) -> dict:
        return {
            "num_rows": self.num_rows,
            "num_groups": self.num_groups,
            "num_pages": self.num_pages,
            "file_bytes": self.file_bytes,
            "data_bytes": self.data_bytes,
            "footer_bytes": self.footer_bytes,
            "column_bytes": dict(self.column_bytes),
            "column_schemes": {k: dict(v) for k, v in self.column_schemes.items()},
        }


def _merge_batches(schema: list[ColumnSchema], batches) -> dict[str, list]:
    if isinstance(batches, dict):
        batches = [batches]
    names = [c.name for c in schema]
    merged: dict[str, list] = {n: [] for n in names}
    for bi, batch in enumerate(batches):
        missing = set(names) - set(batch)
        extra = set(batch) - set(names)
        if missing or extra:
            raise SchemaMismatch(
                f"batch {bi}: missing columns {sorted(missing)}, unknown {sorted(extra)}")
        lengths = {len(batch[n]) for n in names}
        if len(lengths) > 1:
            raise SchemaMismatch(f"batch {bi}: column lengths differ: {sorted(lengths)}")
        for n in names:
            merged[n].extend(batch[n])
    return merged


def write_file_bytes(schema: list[ColumnSchema], batches,
                     options: WriteOptions | None = None) -> tuple[bytes, WriteStats]:
    """Serialize rows into a complete file image; deterministic for equal input."""
    options = options or WriteOptions()
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise SchemaMismatch("duplicate column names in schema")
    by_name = {c.name: c for c in schema}

    data = _merge_batches(schema, batches)
    num_rows = len(data[names[0]]) if names else 0
    if num_rows == 0:
        raise EmptyInput("no rows to write")

    stats = WriteStats(num_rows=num_rows)
    if options.row_order is not None and options.row_order.mode != "none":
        perm, data = reorder_rows(data, options.row_order)
        stats.row_permutation = perm

    prepared = {c.name: prepare_column_values(c, data[c.name]) for c in schema}

    physical_names = (reorder_columns(names, options.column_order)
                      if options.column_order is not None else list(names))

    group_rows = options.rows_per_page * options.pages_per_group
    n_groups = (num_rows + group_rows - 1) // group_rows
    n_cols = len(schema)
    col_index = {n: i for i, n in enumerate(names)}

    body = bytearray()
    group_offsets: list[int] = []
    pages_per_group: list[int] = []
    # logical (group, column, page) ordering for all page/chunk arrays
    page_types: dict[tuple[int, int, int], int] = {}
    rows_per_page: dict[tuple[int, int, int], int] = {}
    page_offsets: dict[tuple[int, int, int], int] = {}
    page_blobs: dict[tuple[int, int, int], bytes] = {}
    column_sizes = [0] * (n_groups * n_cols)
    column_offsets = [0] * (n_groups * n_cols)
    ppc_by_group: list[int] = []

    for g in range(n_groups):
        g_start = g * group_rows
        g_rows = min(group_rows, num_rows - g_start)
        ppc = (g_rows + options.rows_per_page - 1) // options.rows_per_page
        ppc_by_group.append(ppc)
        pages_per_group.append(ppc * n_cols)
        group_off = len(body)
        group_offsets.append(group_off)
        for name in physical_names:
            col = by_name[name]
            c = col_index[name]
            chunk_off = len(body) - group_off
            for k in range(ppc):
                r0 = g_start + k * options.rows_per_page
                r1 = min(r0 + options.rows_per_page, g_start + g_rows)
                values = prepared[name][r0:r1]
                ptype, content = encode_page(col, values, options.encoding_config,
                                             options.compress_sparse_bulk)
                page = wrap_page(content)
                key = (g, c, k)
                page_types[key] = ptype
                rows_per_page[key] = r1 - r0
                page_offsets[key] = len(body)
                page_blobs[key] = page
                body += page
                tname = _PAGE_TYPE_NAMES.get(ptype, str(ptype))
                stats.column_schemes.setdefault(name, {})
                stats.column_schemes[name][tname] = stats.column_schemes[name].get(tname, 0) + 1
                stats.column_bytes[name] = stats.column_bytes.get(name, 0) + len(page)
            chunk_size = (len(body) - group_off) - chunk_off
            if chunk_off > 0xFFFFFFFF or chunk_size > 0xFFFFFFFF:
                raise SchemaMismatch("row group exceeds the 4 GiB chunk addressing limit")
            column_sizes[g * n_cols + c] = chunk_size
            column_offsets[g * n_cols + c] = chunk_off

    ordered_keys = [(g, c, k)
                    for g in range(n_groups)
                    for c in range(n_cols)
                    for k in range(ppc_by_group[g])]
    tree = compute_checksum_tree([page_blobs[key] for key in ordered_keys],
                                 pages_per_group)

    footer = build_footer(
        num_rows=num_rows,
        page_types=[page_types[key] for key in ordered_keys],
        rows_per_page=[rows_per_page[key] for key in ordered_keys],
        page_offsets=[page_offsets[key] for key in ordered_keys],
        pages_per_group=pages_per_group,
        group_offsets=group_offsets,
        column_sizes=column_sizes,
        column_offsets=column_offsets,
        deletion_words=[0] * ((num_rows + 63) // 64),
        checksum_words=tree.words(),
        columns=schema,
    )
    blob = bytes(body) + footer + struct.pack("<I", len(footer)) + MAGIC
    stats.num_groups = n_groups
    stats.num_pages = len(ordered_keys)
    stats.data_bytes = len(body)
    stats.footer_bytes = len(footer)
    stats.file_bytes = len(blob)
    return blob, stats


def write_file(path: str | Path, schema: list[ColumnSchema], batches,
               options: WriteOptions | None = None) -> WriteStats:
    blob, stats = write_file_bytes(schema, batches, options)
    Path(path).write_bytes(blob)
    return stats
