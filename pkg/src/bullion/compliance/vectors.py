"""Deletion vectors and compliance level model."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from ..errors import RowOutOfRange


class ComplianceLevel(IntEnum):
    PLAIN = 0      # no deletion support in the file itself
    VECTOR = 1     # deletion vector only; readers skip marked rows
    PHYSICAL = 2   # vector plus in-place masking of the encoded values


class DeletionVector:
    """One bit per row in file order; bits only ever go 0 -> 1."""

    __slots__ = ("num_rows", "_words")

    def __init__(self, num_rows: int, words: list[int] | None = None):
        self.num_rows = num_rows
        n_words = (num_rows + 63) // 64
        if words is None:
            self._words = [0] * n_words
        else:
            if len(words) != n_words:
                raise ValueError(f"need {n_words} words for {num_rows} rows, got {len(words)}")
            self._words = list(words)

    def _check(self, row: int) -> None:
        if not 0 <= row < self.num_rows:
            raise RowOutOfRange(f"row {row} outside [0, {self.num_rows})")

    def set(self, row: int) -> bool:
        """Mark a row deleted; returns True when the bit was newly set."""
        self._check(row)
        w, b = divmod(row, 64)
        mask = 1 << b
        if self._words[w] & mask:
            return False
        self._words[w] |= mask
        return True

    def get(self, row: int) -> bool:
        self._check(row)
        w, b = divmod(row, 64)
        return bool(self._words[w] & (1 << b))

    def count(self) -> int:
        return sum(bin(w).count("1") for w in self._words)

    def slice_bits(self, start: int, n: int) -> list[bool]:
        return [self.get(start + i) for i in range(n)]

    def words(self) -> list[int]:
        return list(self._words)

    def __len__(self) -> int:
        return self.num_rows


@dataclass
class DeleteStats:
    rows_deleted: int = 0
    pages_rewritten: int = 0
    bytes_rewritten: int = 0
    file_bytes: int = 0
    unsupported_columns: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows_deleted": self.rows_deleted,
            "pages_rewritten": self.pages_rewritten,
            "bytes_rewritten": self.bytes_rewritten,
            "file_bytes": self.file_bytes,
            "rewrite_ratio": (self.bytes_rewritten / self.file_bytes
                              if self.file_bytes else 0.0),
            "unsupported_columns": dict(self.unsupported_columns),
        }
