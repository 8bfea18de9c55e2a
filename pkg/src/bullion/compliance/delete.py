"""Deletion-compliant row removal over written files.

Level 0 refuses (a full rewrite must be explicit). Level 1 sets deletion
vector bits in the footer and touches no page. Level 2 additionally
masks the deleted values inside every affected page in place, updating
only those pages' checksums (one leaf, its group hash, the root) and the
footer; pages never grow and never move.

Columns whose pages cannot mask in place (chained sparse deltas, list
composites, dual-split halves, or a non-maskable scheme) get level-1
treatment and are reported in the stats; `strict=True` raises instead,
before any byte is modified.
"""

from __future__ import annotations

import fcntl
import os
from bisect import bisect_right
from pathlib import Path

from ..checksums import tree_from_words, update_checksums_incremental
from ..encoding.blocks import deserialize_block, serialize_block
from ..errors import (
    CorruptBlock,
    ExclusiveAccessRequired,
    FullRewriteRequired,
    RowOutOfRange,
    UnsupportedEncoding,
)
from ..format.footer import MAGIC, FooterView
from ..format.pages import column_value_kind, page_content, wrap_page
from ..format.schema import LIST_TYPES
from ..quantization import QuantTarget
from .masking import mask_block
from .vectors import ComplianceLevel, DeleteStats, DeletionVector


def delete_rows(path: str | Path, row_ids, level: ComplianceLevel | int,
                strict: bool = False) -> DeleteStats:
    level = ComplianceLevel(level)
    if level == ComplianceLevel.PLAIN:
        raise FullRewriteRequired(
            "level 0 has no deletion support; rewrite the file without the rows")
    path = Path(path)
    with open(path, "r+b") as f:
        try:
            fcntl.flock(f.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            raise ExclusiveAccessRequired(f"{path}: {exc}") from None
        try:
            return _delete_locked(f, row_ids, level, strict)
        finally:
            fcntl.flock(f.fileno(), fcntl.LOCK_UN)


def _read_footer(f) -> tuple[FooterView, int, int]:
    f.seek(0, os.SEEK_END)
    file_size = f.tell()
    f.seek(file_size - 8)
    tail = f.read(8)
    if tail[4:] != MAGIC:
        raise CorruptBlock(f"bad magic {tail[4:]!r}")
    footer_len = int.from_bytes(tail[:4], "little")
    footer_pos = file_size - 8 - footer_len
    f.seek(footer_pos)
    return FooterView(f.read(footer_len)), footer_pos, file_size


def _delete_locked(f, row_ids, level: ComplianceLevel, strict: bool) -> DeleteStats:
    footer, footer_pos, file_size = _read_footer(f)
    stats = DeleteStats(file_bytes=file_size)

    dv = DeletionVector(footer.num_rows, footer.deletion_words())
    targets = sorted(set(int(r) for r in row_ids))
    for r in targets:
        if not 0 <= r < footer.num_rows:
            raise RowOutOfRange(f"row {r} outside [0, {footer.num_rows})")
    new_rows = [r for r in targets if not dv.get(r)]
    stats.rows_deleted = len(new_rows)
    if not new_rows:
        return stats

    tree_words = footer.checksum_words()
    if level == ComplianceLevel.PHYSICAL:
        tree_words = _mask_pages(f, footer, dv, new_rows, strict, stats)

    for r in new_rows:
        dv.set(r)
    new_footer = footer.with_updates(dv.words(), tree_words)
    f.seek(footer_pos)
    f.write(new_footer)
    f.flush()
    stats.bytes_rewritten += len(new_footer)
    return stats


def _page_slots(footer: FooterView, rows: list[int]) -> dict[tuple[int, int], list[int]]:
    """Group target rows into (group, page slot) -> offsets within the page."""
    prefix = [footer.group_row_start(g) for g in range(footer.n_groups + 1)]
    out: dict[tuple[int, int], list[int]] = {}
    for r in rows:
        g = bisect_right(prefix, r) - 1
        rem = r - prefix[g]
        base = footer.page_ordinal(g, 0, 0)
        for k in range(footer.pages_per_chunk(g)):
            n = footer.rows_per_page(base + k)
            if rem < n:
                out.setdefault((g, k), []).append(rem)
                break
            rem -= n
    return out


def _column_block_reason(col) -> str | None:
    if col.is_sparse_sequence:
        return "chained sliding-window deltas cannot mask in place"
    if col.logical_type in LIST_TYPES:
        return "list pages do not support in-place masking"
    if col.quantization and col.quantization.target == QuantTarget.DUAL_SPLIT_16:
        return "dual-split pages do not support in-place masking"
    if col.compliance_level < 2:
        return f"column compliance level is {col.compliance_level}"
    return None


def _mask_pages(f, footer: FooterView, dv: DeletionVector, new_rows: list[int],
                strict: bool, stats: DeleteStats) -> list[int]:
    slots = _page_slots(footer, new_rows)
    tree = tree_from_words(footer.checksum_words(),
                           [footer.pages_per_group(g) for g in range(footer.n_groups)])

    # first pass: parse and mask every affected page in memory, deciding
    # per-column support, so nothing is written once anything can fail
    plans = []  # (ordinal, page_off, page_size, old_page, new_page)
    unsupported: dict[str, str] = {}
    for c in range(footer.n_cols):
        col = footer.column_schema(c)
        reason = _column_block_reason(col)
        if reason is not None:
            unsupported[col.name] = reason
            continue
        kind = column_value_kind(col)
        col_plans = []
        for (g, k), offsets in sorted(slots.items()):
            off, size = footer.page_range(g, c, k)
            f.seek(off)
            page = f.read(size)
            content = page_content(page)
            block, used = deserialize_block(content, kind, 0)
            if used != len(content):
                raise CorruptBlock(f"page ({g},{c},{k}) has trailing bytes")
            if not block.masked:
                reason = f"scheme {block.scheme.name} does not support masking"
                break
            rows_in_page = footer.rows_per_page(footer.page_ordinal(g, c, k))
            row0 = footer.group_row_start(g) + _slot_row_offset(footer, g, k)
            if block.value_count == rows_in_page:
                stream_offsets = offsets
            else:
                prior = dv.slice_bits(row0, rows_in_page)
                if block.value_count + sum(prior) != rows_in_page:
                    raise CorruptBlock(
                        f"page ({g},{c},{k}) stream length disagrees with deletions")
                shift = [0] * rows_in_page
                seen = 0
                for i in range(rows_in_page):
                    shift[i] = seen
                    if prior[i]:
                        seen += 1
                stream_offsets = [o - shift[o] for o in offsets]
            try:
                result = mask_block(block, stream_offsets)
            except UnsupportedEncoding as exc:
                reason = str(exc)
                break
            new_content = serialize_block(result.block)
            if len(new_content) + 4 > size:
                reason = f"masked page would grow past its {size} bytes"
                break
            new_page = wrap_page(new_content, physical_size=size)
            col_plans.append((footer.page_ordinal(g, c, k), off, size, page, new_page))
        if reason is not None:
            unsupported[col.name] = reason
            continue
        plans.extend(col_plans)

    if unsupported and strict:
        raise UnsupportedEncoding(
            "; ".join(f"{name}: {why}" for name, why in sorted(unsupported.items())))
    stats.unsupported_columns.update(unsupported)

    for ordinal, off, size, old_page, new_page in plans:
        if new_page == old_page:
            continue
        f.seek(off)
        f.write(new_page)
        stats.pages_rewritten += 1
        stats.bytes_rewritten += size
        tree = update_checksums_incremental(tree, ordinal, new_page)

    return tree.words()


def _slot_row_offset(footer: FooterView, g: int, k: int) -> int:
    base = footer.page_ordinal(g, 0, 0)
    return sum(footer.rows_per_page(base + i) for i in range(k))
