"""Column schema model and its JSON form."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from ..errors import SchemaMismatch, UnsupportedType
from ..quantization import QuantSpec, QuantTarget


class LogicalType(IntEnum):
    """Persisted 1-byte column type tags."""

    INT64 = 0
    FLOAT32 = 1
    FLOAT64 = 2
    STRING = 3
    LIST_INT64 = 4
    LIST_FLOAT32 = 5


_TYPE_NAMES = {
    "int64": LogicalType.INT64,
    "float32": LogicalType.FLOAT32,
    "float64": LogicalType.FLOAT64,
    "string": LogicalType.STRING,
    "list<int64>": LogicalType.LIST_INT64,
    "list<float32>": LogicalType.LIST_FLOAT32,
}
TYPE_NAMES = {v: k for k, v in _TYPE_NAMES.items()}

LIST_TYPES = frozenset({LogicalType.LIST_INT64, LogicalType.LIST_FLOAT32})
FLOAT_COLUMN_TYPES = frozenset({LogicalType.FLOAT32, LogicalType.FLOAT64})


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    logical_type: LogicalType
    quantization: QuantSpec | None = None
    compliance_level: int = 2
    is_sparse_sequence: bool = False

    def __post_init__(self):
        if not self.name:
            raise SchemaMismatch("column name must be non-empty")
        if self.compliance_level not in (0, 1, 2):
            raise SchemaMismatch(f"compliance level {self.compliance_level} not in 0/1/2")
        if self.is_sparse_sequence and self.logical_type != LogicalType.LIST_INT64:
            raise SchemaMismatch(
                f"{self.name}: sparse sequences must be list<int64>, "
                f"got {TYPE_NAMES[self.logical_type]}")
        q = self.quantization
        if q is not None and q.target != QuantTarget.NONE:
            if q.target == QuantTarget.INT_REHASH:
                if self.logical_type != LogicalType.INT64:
                    raise SchemaMismatch(f"{self.name}: int_rehash requires int64")
            elif self.logical_type not in FLOAT_COLUMN_TYPES:
                raise SchemaMismatch(
                    f"{self.name}: {q.name} requires a float column")

    @property
    def type_name(self) -> str:
        return TYPE_NAMES[self.logical_type]


def parse_type_name(name: str) -> LogicalType:
    key = name.strip().lower().replace(" ", "")
    if key not in _TYPE_NAMES:
        raise UnsupportedType(f"unknown logical type {name!r}")
    return _TYPE_NAMES[key]


def schema_from_json(items: list[dict]) -> list[ColumnSchema]:
    """Schema file entries: name, type, and optional compliance_level,
    sparse, quantize fields."""
    columns = []
    seen = set()
    for i, item in enumerate(items):
        try:
            name = item["name"]
            ltype = parse_type_name(item["type"])
        except KeyError as exc:
            raise SchemaMismatch(f"schema entry {i}: missing key {exc}") from None
        if name in seen:
            raise SchemaMismatch(f"duplicate column name {name!r}")
        seen.add(name)
        quant = None
        if item.get("quantize"):
            quant = QuantSpec.parse(item["quantize"])
        columns.append(ColumnSchema(
            name=name,
            logical_type=ltype,
            quantization=quant,
            compliance_level=int(item.get("compliance_level", 2)),
            is_sparse_sequence=bool(item.get("sparse", False)),
        ))
    if not columns:
        raise SchemaMismatch("schema has no columns")
    return columns


def schema_to_json(columns: list[ColumnSchema]) -> list[dict]:
    out = []
    for col in columns:
        item: dict = {"name": col.name, "type": col.type_name}
        if col.compliance_level != 2:
            item["compliance_level"] = col.compliance_level
        if col.is_sparse_sequence:
            item["sparse"] = True
        if col.quantization is not None and col.quantization.target != QuantTarget.NONE:
            item["quantize"] = col.quantization.name
        out.append(item)
    return out
