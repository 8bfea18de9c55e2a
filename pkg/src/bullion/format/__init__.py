"""File format: writer, reader, flat footer, page layout."""

from __future__ import annotations

from .footer import MAGIC, FooterView, build_footer, name_hash
from .pages import decode_page, encode_page, page_content, wrap_page
from .reader import (
    DEFAULT_COALESCE_GAP,
    BullionFile,
    ReadStats,
    RowLocation,
    VerifyReport,
    locate_row,
    lookup_column,
    project_columns,
    read_footer,
    scan_file,
    verify_file,
)
from .schema import ColumnSchema, LogicalType, schema_from_json, schema_to_json
from .writer import WriteOptions, WriteStats, write_file, write_file_bytes

__all__ = [
    "MAGIC",
    "FooterView",
    "build_footer",
    "name_hash",
    "ColumnSchema",
    "LogicalType",
    "schema_from_json",
    "schema_to_json",
    "WriteOptions",
    "WriteStats",
    "write_file",
    "write_file_bytes",
    "BullionFile",
    "ReadStats",
    "RowLocation",
    "VerifyReport",
    "read_footer",
    "lookup_column",
    "locate_row",
    "project_columns",
    "scan_file",
    "verify_file",
    "DEFAULT_COALESCE_GAP",
    "encode_page",
    "decode_page",
    "wrap_page",
    "page_content",
]
