"""Deletion compliance: levels, vectors, in-place masking, row deletion."""

from __future__ import annotations

from .delete import delete_rows
from .masking import (
    MaskResult,
    mask_bitpacked,
    mask_block,
    mask_dictionary,
    mask_for_delta,
    mask_rle,
    mask_varint,
)
from .vectors import ComplianceLevel, DeleteStats, DeletionVector

__all__ = [
    "ComplianceLevel",
    "DeletionVector",
    "DeleteStats",
    "delete_rows",
    "mask_bitpacked",
    "mask_varint",
    "mask_rle",
    "mask_dictionary",
    "mask_for_delta",
    "mask_block",
    "MaskResult",
]
