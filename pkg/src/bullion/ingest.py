"""CSV and JSON-lines ingestion mapped through a column schema.

CSV cells hold scalars; list columns are JSON arrays (also accepted as a
JSON-encoded cell inside CSV). Errors carry row and column context.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import SchemaMismatch
from .format.schema import ColumnSchema, LogicalType


def _convert(col: ColumnSchema, raw, row: int):
    lt = col.logical_type
    try:
        if lt == LogicalType.INT64:
            if isinstance(raw, bool):
                raise ValueError("bool is not an int")
            if isinstance(raw, int):
                return raw
            return int(str(raw).strip())
        if lt in (LogicalType.FLOAT32, LogicalType.FLOAT64):
            if isinstance(raw, bool):
                raise ValueError("bool is not a number")
            if isinstance(raw, (int, float)):
                return float(raw)
            return float(str(raw).strip())
        if lt == LogicalType.STRING:
            if not isinstance(raw, str):
                raise ValueError(f"expected string, got {type(raw).__name__}")
            return raw
        # list columns
        if isinstance(raw, str):
            raw = json.loads(raw)
        if not isinstance(raw, list):
            raise ValueError(f"expected a JSON array, got {type(raw).__name__}")
        if lt == LogicalType.LIST_INT64:
            out = []
            for v in raw:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ValueError(f"array element {v!r} is not an int")
                out.append(v)
            return out
        out = []
        for v in raw:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"array element {v!r} is not a number")
            out.append(float(v))
        return out
    except (ValueError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"row {row}, column {col.name!r}: {exc}") from None


def read_csv(path: str | Path, schema: list[ColumnSchema]) -> dict[str, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c.name for c in schema if c.name not in header]
        if missing:
            raise SchemaMismatch(f"CSV header is missing columns {missing}")
        batch: dict[str, list] = {c.name: [] for c in schema}
        for i, row in enumerate(reader):
            for col in schema:
                cell = row.get(col.name)
                if cell is None:
                    raise SchemaMismatch(f"row {i}, column {col.name!r}: missing cell")
                batch[col.name].append(_convert(col, cell, i))
    return batch


def read_jsonl(path: str | Path, schema: list[ColumnSchema]) -> dict[str, list]:
    batch: dict[str, list] = {c.name: [] for c in schema}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"row {i}: invalid JSON: {exc}") from None
            if not isinstance(record, dict):
                raise SchemaMismatch(f"row {i}: expected a JSON object")
            for col in schema:
                if col.name not in record:
                    raise SchemaMismatch(f"row {i}, column {col.name!r}: missing key")
                batch[col.name].append(_convert(col, record[col.name], i))
    return batch


def read_input(path: str | Path, schema: list[ColumnSchema],
               fmt: str | None = None) -> dict[str, list]:
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix in (".jsonl", ".ndjson", ".json") else "csv"
    if fmt == "csv":
        return read_csv(path, schema)
    if fmt == "jsonl":
        return read_jsonl(path, schema)
    raise SchemaMismatch(f"unknown input format {fmt!r}")
