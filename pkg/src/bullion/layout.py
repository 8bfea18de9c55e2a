"""Write-time data organization: row and column reordering.

Row reordering sorts whole rows by a quality score, descending, so reads
that filter on quality touch a contiguous prefix. Column reordering
places frequently read columns' chunks adjacently inside each row group;
the logical schema seen by readers is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MissingScoreColumn, NonNumericScore, UnknownColumn


@dataclass(frozen=True)
class RowOrderSpec:
    mode: str = "none"  # "none" | "quality_desc"
    score_column: str = ""


@dataclass(frozen=True)
class ColumnOrderSpec:
    mode: str = "schema_order"  # "schema_order" | "frequency"
    frequency_ranking: tuple[str, ...] = field(default_factory=tuple)


def reorder_rows(batch: dict[str, list], spec: RowOrderSpec) -> tuple[list[int], dict[str, list]]:
    """Stable descending sort on the score column, applied to every column.

    Returns (permutation, reordered batch); permutation[i] is the source
    row index of output row i.
    """
    if spec.mode == "none":
        n = len(next(iter(batch.values()))) if batch else 0
        return list(range(n)), dict(batch)
    if spec.mode != "quality_desc":
        raise ValueError(f"unknown row order mode {spec.mode!r}")
    if spec.score_column not in batch:
        raise MissingScoreColumn(f"score column {spec.score_column!r} not in batch")
    scores = batch[spec.score_column]
    for i, s in enumerate(scores):
        if isinstance(s, bool) or not isinstance(s, (int, float)) or (
                isinstance(s, float) and math.isnan(s)):
            raise NonNumericScore(f"row {i}: score {s!r} is not numeric")
    perm = sorted(range(len(scores)), key=scores.__getitem__, reverse=True)
    reordered = {name: [col[i] for i in perm] for name, col in batch.items()}
    return perm, reordered


def reorder_columns(schema_names: list[str], spec: ColumnOrderSpec) -> list[str]:
    """Physical chunk placement order: ranked columns first, rest as declared."""
    if spec.mode == "schema_order":
        return list(schema_names)
    if spec.mode != "frequency":
        raise ValueError(f"unknown column order mode {spec.mode!r}")
    present = set(schema_names)
    for name in spec.frequency_ranking:
        if name not in present:
            raise UnknownColumn(f"ranked column {name!r} not in schema")
    ranked = list(dict.fromkeys(spec.frequency_ranking))
    rest = [n for n in schema_names if n not in set(ranked)]
    return ranked + rest
