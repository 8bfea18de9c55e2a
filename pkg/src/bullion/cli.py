"""Operator CLI: ingest, inspect, project, delete, verify, benchmarks."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bench
from .compliance import ComplianceLevel, delete_rows
from .encoding import MASK, SchemeId
from .errors import BullionError
from .format import (
    BullionFile,
    WriteOptions,
    schema_from_json,
    verify_file,
    write_file,
)
from .format.pages import PAGE_TYPE_DUAL, PAGE_TYPE_LIST, PAGE_TYPE_SPARSE
from .ingest import read_input
from .layout import ColumnOrderSpec, RowOrderSpec
from .quantization import QuantSpec

_PAGE_TYPE_NAMES = {int(s): s.name for s in SchemeId}
_PAGE_TYPE_NAMES[PAGE_TYPE_SPARSE] = "SPARSE_DELTA"
_PAGE_TYPE_NAMES[PAGE_TYPE_LIST] = "LIST"
_PAGE_TYPE_NAMES[PAGE_TYPE_DUAL] = "DUAL_SPLIT"


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Emit machine-parseable JSON.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for benchmark data generation.")
@click.pass_context
def main(ctx, as_json, seed):
    """Columnar storage for ML training data."""
    ctx.ensure_object(dict)
    ctx.obj["json"] = as_json
    ctx.obj["seed"] = seed


def _fail(ctx, exc: BullionError) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if ctx.obj.get("json"):
        click.echo(json.dumps(payload))
    else:
        click.echo(f"error: {payload['error']}: {payload['message']}", err=True)
    sys.exit(1)


def _emit(ctx, payload: dict, human: str) -> None:
    if ctx.obj.get("json"):
        click.echo(json.dumps(payload, default=_json_default))
    else:
        click.echo(human)


def _json_default(v):
    if v is MASK:
        return None
    raise TypeError(f"not JSON serializable: {v!r}")


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON schema file: [{name, type, ...}, ...].")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default=None,
              help="Input format; inferred from the extension by default.")
@click.option("--rows-per-page", type=int, default=4096, show_default=True)
@click.option("--pages-per-group", type=int, default=16, show_default=True)
@click.option("--sort-by-quality", "quality_col", default=None,
              help="Presort rows by this column, descending.")
@click.option("--column-order", "order_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="File with one column name per line; ranked columns are "
                   "placed first in each row group.")
@click.option("--quantize", "quantize", multiple=True, metavar="COL=TARGET",
              help="Override storage quantization, e.g. emb=bf16. Repeatable.")
@click.pass_context
def write(ctx, input_path, schema_path, out_path, fmt, rows_per_page,
          pages_per_group, quality_col, order_path, quantize):
    """Ingest CSV/JSONL into a columnar file."""
    try:
        schema = schema_from_json(json.loads(Path(schema_path).read_text()))
        overrides = {}
        for item in quantize:
            name, _, target = item.partition("=")
            if not target:
                raise BullionError(f"--quantize expects COL=TARGET, got {item!r}")
            overrides[name] = QuantSpec.parse(target)
        if overrides:
            missing = set(overrides) - {c.name for c in schema}
            if missing:
                raise BullionError(f"--quantize names unknown columns {sorted(missing)}")
            schema = [
                c if c.name not in overrides else type(c)(
                    c.name, c.logical_type, overrides[c.name],
                    c.compliance_level, c.is_sparse_sequence)
                for c in schema
            ]
        batch = read_input(input_path, schema, fmt)
        row_order = (RowOrderSpec("quality_desc", quality_col)
                     if quality_col else None)
        column_order = None
        if order_path:
            ranking = [ln.strip() for ln in Path(order_path).read_text().splitlines()
                       if ln.strip()]
            column_order = ColumnOrderSpec("frequency", tuple(ranking))
        options = WriteOptions(rows_per_page=rows_per_page,
                               pages_per_group=pages_per_group,
                               row_order=row_order, column_order=column_order)
        stats = write_file(out_path, schema, batch, options)
    except BullionError as exc:
        _fail(ctx, exc)
        return
    payload = {"file": str(out_path), **stats.to_dict()}
    lines = [f"wrote {out_path}: {stats.num_rows} rows, {stats.num_groups} groups, "
             f"{stats.num_pages} pages, {stats.file_bytes} bytes"]
    for name, schemes in stats.column_schemes.items():
        parts = ", ".join(f"{k}x{v}" for k, v in sorted(schemes.items()))
        lines.append(f"  {name}: {stats.column_bytes[name]} bytes ({parts})")
    _emit(ctx, payload, "\n".join(lines))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def inspect(ctx, file):
    """Summarize footer contents, schemes, and checksum status."""
    try:
        with BullionFile.open(file) as f:
            footer = f.footer
            per_column = {}
            for c in range(footer.n_cols):
                col = footer.column_schema(c)
                hist: dict[str, int] = {}
                for g in range(footer.n_groups):
                    for k in range(footer.pages_per_chunk(g)):
                        t = footer.page_type(footer.page_ordinal(g, c, k))
                        name = _PAGE_TYPE_NAMES.get(t, str(t))
                        hist[name] = hist.get(name, 0) + 1
                per_column[col.name] = {
                    "type": col.type_name,
                    "compliance_level": col.compliance_level,
                    "sparse": col.is_sparse_sequence,
                    "quantize": col.quantization.name if col.quantization else None,
                    "pages": hist,
                }
            report = f.verify()
            payload = {
                "num_rows": footer.num_rows,
                "num_columns": footer.n_cols,
                "num_groups": footer.n_groups,
                "num_pages": footer.n_pages,
                "deleted_rows": footer.deleted_count(),
                "checksums_ok": report.ok,
                "columns": per_column,
            }
    except BullionError as exc:
        _fail(ctx, exc)
        return
    lines = [
        f"rows {payload['num_rows']} (deleted {payload['deleted_rows']}), "
        f"columns {payload['num_columns']}, groups {payload['num_groups']}, "
        f"pages {payload['num_pages']}, checksums "
        + ("ok" if payload["checksums_ok"] else "BAD"),
    ]
    for name, info in per_column.items():
        quant = f" quant={info['quantize']}" if info["quantize"] else ""
        sparse = " sparse" if info["sparse"] else ""
        pages = ", ".join(f"{k}x{v}" for k, v in sorted(info["pages"].items()))
        lines.append(f"  {name}: {info['type']}{sparse}{quant} "
                     f"level={info['compliance_level']} [{pages}]")
    _emit(ctx, payload, "\n".join(lines))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--columns", required=True, help="Comma-separated column names.")
@click.option("--gap", type=int, default=1 << 20, show_default=True,
              help="Coalesce reads whose byte ranges are closer than this.")
@click.option("--limit", type=int, default=20, show_default=True,
              help="Rows to print in human output (JSON always prints all).")
@click.option("--include-deleted", is_flag=True,
              help="Surface deleted rows as nulls instead of dropping them.")
@click.pass_context
def project(ctx, file, columns, gap, limit, include_deleted):
    """Read a subset of columns."""
    names = [c.strip() for c in columns.split(",") if c.strip()]
    try:
        with BullionFile.open(file) as f:
            data = f.project(names, coalesce_gap=gap,
                             include_deleted=include_deleted,
                             mask_as=None if ctx.obj.get("json") else MASK)
            stats = f.read_stats
    except BullionError as exc:
        _fail(ctx, exc)
        return
    n = len(data[names[0]]) if names else 0
    payload = {"num_rows": n, "columns": data,
               "preads": stats.preads, "bytes_read": stats.bytes_read}
    lines = [f"{n} rows; {stats.preads} reads, {stats.bytes_read} bytes"]
    for name in names:
        shown = data[name][:limit]
        suffix = " ..." if n > limit else ""
        lines.append(f"  {name}: {shown}{suffix}")
    _emit(ctx, payload, "\n".join(lines))


@main.command()
@click.option("--file", "file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--rows", "rows_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Text file with one row ordinal per line.")
@click.option("--level", type=click.Choice(["0", "1", "2"]), required=True)
@click.option("--strict", is_flag=True,
              help="Fail instead of downgrading unmaskable columns to level 1.")
@click.pass_context
def delete(ctx, file, rows_path, level, strict):
    """Delete rows at the given compliance level, in place."""
    try:
        row_ids = []
        for ln in Path(rows_path).read_text().splitlines():
            ln = ln.split("#", 1)[0].strip()
            if ln:
                row_ids.append(int(ln))
        stats = delete_rows(file, row_ids, ComplianceLevel(int(level)), strict=strict)
    except ValueError as exc:
        _fail(ctx, BullionError(f"bad row id file: {exc}"))
        return
    except BullionError as exc:
        _fail(ctx, exc)
        return
    # the stats contract is JSON either way; --json keeps it single-line
    d = stats.to_dict()
    _emit(ctx, d, json.dumps(d, indent=2))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def verify(ctx, file):
    """Recompute page hashes and walk the checksum hierarchy."""
    try:
        report = verify_file(file)
    except BullionError as exc:
        _fail(ctx, exc)
        return
    _emit(ctx, report.to_dict(),
          "ok" if report.ok else
          f"CORRUPT: first bad page {report.first_bad_page}, "
          f"first bad group {report.first_bad_group}, root_ok={report.root_ok}")
    if not report.ok:
        sys.exit(1)


@main.command("bench-footer")
@click.option("--columns", default="100,1000,10000,20000", show_default=True,
              help="Comma-separated column counts.")
@click.option("--trials", type=int, default=5, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Write the CSV report here instead of stdout.")
@click.pass_context
def bench_footer_cmd(ctx, columns, trials, out_path):
    """Footer open + single-column lookup time vs column count."""
    counts = [int(c) for c in columns.split(",") if c.strip()]
    report = bench.bench_footer(counts, trials=trials, seed=ctx.obj["seed"])
    _write_report(ctx, report, out_path)


@main.command("bench-delete")
@click.option("--pages", type=int, default=100, show_default=True,
              help="Pages per column.")
@click.option("--rows-per-page", type=int, default=2000, show_default=True)
@click.option("--columns", type=int, default=2, show_default=True)
@click.option("--fraction", type=float, default=0.02, show_default=True)
@click.option("--level", type=click.Choice(["1", "2"]), default="2", show_default=True)
@click.option("--mode", type=click.Choice(["clustered", "scattered", "both"]),
              default="both", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.pass_context
def bench_delete_cmd(ctx, pages, rows_per_page, columns, fraction, level, mode, out_path):
    """Deletion rewrite I/O vs a full-file rewrite."""
    modes = ("clustered", "scattered") if mode == "both" else (mode,)
    report = bench.bench_delete(pages_per_column=pages, rows_per_page=rows_per_page,
                                columns=columns, fraction=fraction, level=int(level),
                                modes=modes, seed=ctx.obj["seed"])
    _write_report(ctx, report, out_path)


def _write_report(ctx, report: bench.BenchReport, out_path) -> None:
    csv_text = report.to_csv()
    if out_path:
        Path(out_path).write_text(csv_text)
        click.echo(f"wrote {out_path}")
    elif ctx.obj.get("json"):
        click.echo(json.dumps({"rows": report.rows}))
    else:
        click.echo(csv_text, nl=False)


if __name__ == "__main__":
    main()
