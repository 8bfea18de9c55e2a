"""Paper-aligned micro-benchmarks: footer flatness and deletion I/O.

Structural metrics (bytes touched, pages rewritten, ratios) are exact and
reproducible for a given seed; wall-clock rows vary with hardware.
"""

from __future__ import annotations

import io
import csv as _csv
import random
import shutil
import statistics
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .compliance import ComplianceLevel, delete_rows
from .encoding import EncodingConfig, SchemeId
from .format import BullionFile, ColumnSchema, LogicalType, WriteOptions, write_file


@dataclass
class BenchReport:
    rows: list[tuple] = field(default_factory=list)  # (parameter, metric, value, unit)

    def add(self, parameter, metric: str, value, unit: str) -> None:
        self.rows.append((parameter, metric, value, unit))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = _csv.writer(out)
        w.writerow(["parameter", "metric", "value", "unit"])
        for row in self.rows:
            w.writerow(row)
        return out.getvalue()

    def value(self, parameter, metric: str):
        for p, m, v, _ in self.rows:
            if p == parameter and m == metric:
                return v
        raise KeyError((parameter, metric))


def _wide_file(path: Path, n_cols: int, rows: int, seed: int) -> None:
    rng = random.Random(seed)
    schema = [ColumnSchema(f"col_{i:05d}", LogicalType.INT64) for i in range(n_cols)]
    batch = {c.name: [rng.randrange(1 << 20) for _ in range(rows)] for c in schema}
    options = WriteOptions(
        rows_per_page=rows, pages_per_group=1,
        encoding_config=EncodingConfig(candidate_set=frozenset({SchemeId.TRIVIAL})))
    write_file(path, schema, batch, options)


def bench_footer(column_counts: list[int], trials: int = 5, seed: int = 0,
                 rows: int = 4, workdir: str | Path | None = None) -> BenchReport:
    """Footer open + one column lookup, per column count; median over trials.

    All files are generated up front and trials interleave across counts,
    so a load spike on the host skews every count equally rather than one.
    """
    report = BenchReport()
    tmp = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="bullion-bench-"))
    own_tmp = workdir is None
    try:
        paths = {}
        for count in column_counts:
            path = tmp / f"wide_{count}.bln"
            if not path.exists():
                _wide_file(path, count, rows, seed)
            paths[count] = path
            with BullionFile.open(path) as f:  # warm the cache, check the target
                assert f.footer.lookup(f"col_{count // 2:05d}") == count // 2
        times: dict[int, list[float]] = {c: [] for c in column_counts}
        for _ in range(max(1, trials)):
            for count in column_counts:
                target = f"col_{count // 2:05d}"
                t0 = time.perf_counter()
                with BullionFile.open(paths[count]) as f:
                    f.footer.lookup(target)
                times[count].append((time.perf_counter() - t0) * 1000.0)
        for count in column_counts:
            with BullionFile.open(paths[count]) as f:
                footer_bytes = len(f.footer.buf)
            report.add(count, "open_lookup_ms_median",
                       round(statistics.median(times[count]), 4), "ms")
            report.add(count, "footer_bytes", footer_bytes, "bytes")
            report.add(count, "file_bytes", paths[count].stat().st_size, "bytes")
    finally:
        if own_tmp:
            shutil.rmtree(tmp, ignore_errors=True)
    return report


def build_delete_fixture(path: Path, pages_per_column: int = 100,
                         rows_per_page: int = 2000, columns: int = 2,
                         seed: int = 0) -> None:
    """A file of equal bit-packable pages, for deletion I/O accounting."""
    rng = random.Random(seed)
    rows = pages_per_column * rows_per_page
    schema = [ColumnSchema(f"f{i}", LogicalType.INT64) for i in range(columns)]
    batch = {c.name: [rng.randrange(1 << 40) for _ in range(rows)] for c in schema}
    write_file(path, schema, batch,
               WriteOptions(rows_per_page=rows_per_page, pages_per_group=10))


def delete_target_rows(total_rows: int, rows_per_page: int, fraction: float,
                       mode: str) -> list[int]:
    count = max(1, min(total_rows, round(total_rows * fraction)))
    if mode == "clustered":
        # fill whole pages starting from the third page (clamped for large
        # fractions so the span stays inside the file)
        start = min(2 * rows_per_page, total_rows - count)
        return list(range(start, start + count))
    if mode == "scattered":
        stride = max(1, total_rows // count)
        return list(range(0, total_rows, stride))[:count]
    raise ValueError(f"unknown delete mode {mode!r}")


def bench_delete(pages_per_column: int = 100, rows_per_page: int = 2000,
                 columns: int = 2, fraction: float = 0.02,
                 level: int = 2, modes: tuple[str, ...] = ("clustered", "scattered"),
                 seed: int = 0, workdir: str | Path | None = None) -> BenchReport:
    """Delete a row fraction and report rewrite ratios vs a full rewrite."""
    report = BenchReport()
    tmp = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="bullion-bench-"))
    own_tmp = workdir is None
    try:
        fixture = tmp / "delete_fixture.bln"
        build_delete_fixture(fixture, pages_per_column, rows_per_page, columns, seed)
        total_rows = pages_per_column * rows_per_page
        for mode in modes:
            work = tmp / f"delete_{mode}.bln"
            shutil.copyfile(fixture, work)
            targets = delete_target_rows(total_rows, rows_per_page, fraction, mode)
            t0 = time.perf_counter()
            stats = delete_rows(work, targets, ComplianceLevel(level))
            elapsed = (time.perf_counter() - t0) * 1000.0
            ratio = stats.bytes_rewritten / stats.file_bytes
            report.add(mode, "rows_deleted", stats.rows_deleted, "rows")
            report.add(mode, "pages_rewritten", stats.pages_rewritten, "pages")
            report.add(mode, "bytes_rewritten", stats.bytes_rewritten, "bytes")
            report.add(mode, "file_bytes", stats.file_bytes, "bytes")
            report.add(mode, "rewrite_ratio", round(ratio, 6), "fraction")
            report.add(mode, "io_reduction_vs_full_rewrite",
                       round(1.0 / ratio, 2) if ratio else 0.0, "x")
            report.add(mode, "wall_ms", round(elapsed, 2), "ms")
    finally:
        if own_tmp:
            shutil.rmtree(tmp, ignore_errors=True)
    return report
