"""Command line interface for the competitiveness-network pipeline.

Three subcommands: ``ingest-check`` validates an input table, ``year``
reports on a single year, ``series`` reports on every year found. Exit
codes: 0 success, 1 unusable input or configuration, 2 series finished
but some years failed.
"""

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from .pipeline import (
    PipelineConfig,
    _dump_json,
    _windowed_counts,
    emit,
    ingest,
    load_config,
    run_series,
    run_year,
)


def _fail(message):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _input_options(fn):
    fn = click.option(
        "--input-format", type=click.Choice(["long", "wide"]), default="long",
        show_default=True,
        help="Long CSV (year,country,activity,value) or directory of <year>.csv tables.",
    )(fn)
    fn = click.option(
        "--layer", default="other", show_default=True,
        help="Data layer label; 'science' log-damps counts unless configured otherwise.",
    )(fn)
    return fn


def _run_options(fn):
    fn = click.option("--seed", type=int, default=None, help="Override the configured master seed.")(fn)
    fn = click.option(
        "--format", "fmt", type=click.Choice(["json", "csv", "both"]), default="both",
        show_default=True, help="Which report files to write.",
    )(fn)
    fn = click.option(
        "--out", "out_dir", type=click.Path(file_okay=False), default=None,
        help="Output directory; omit to print JSON to stdout.",
    )(fn)
    fn = click.option(
        "--config", "config_path", type=click.Path(dir_okay=False),
        default=None, help="JSON file of configuration overrides.",
    )(fn)
    return fn


def _load_inputs(input_path, layer, input_format, config_path, seed):
    try:
        config = load_config(config_path) if config_path else PipelineConfig()
        if seed is not None:
            config = replace(config, seed=seed)
        counts = ingest(input_path, layer=layer, input_format=input_format)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        _fail(exc)
    return counts, config


def _formats(fmt):
    return ("json", "csv") if fmt == "both" else (fmt,)


@click.group()
def main():
    """Structure of country x activity count data: nested competitiveness
    networks, their communities, and significance against null models."""


@main.command("ingest-check")
@click.argument("input_path", type=click.Path())
@_input_options
def ingest_check(input_path, layer, input_format):
    """Validate an input table and summarize its contents."""
    try:
        counts = ingest(input_path, layer=layer, input_format=input_format)
    except (ValueError, OSError) as exc:
        _fail(exc)
    years = sorted(counts)
    first = counts[years[0]]
    click.echo(
        f"ok: {len(years)} year(s) {years[0]}..{years[-1]}, "
        f"{len(first.rows)} countries x {len(first.cols)} activities, layer {layer}"
    )
    for y in years:
        W = counts[y].W
        click.echo(f"  {y}: {int((W > 0).sum())} nonzero entries, total weight {W.sum():g}")


@main.command("year")
@click.argument("input_path", type=click.Path())
@click.option("--year", "year", type=int, required=True, help="Year to report on.")
@_input_options
@_run_options
def year_cmd(input_path, year, layer, input_format, config_path, out_dir, fmt, seed):
    """Full report for one year."""
    counts, config = _load_inputs(input_path, layer, input_format, config_path, seed)
    if year not in counts:
        _fail(f"year {year} not present in the data")
    try:
        report = run_year(_windowed_counts(counts, year, config.window_years), config)
    except (ValueError, RuntimeError) as exc:
        _fail(exc)
    if out_dir is None:
        click.echo(_to_json(report))
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = _formats(fmt)
    written = []
    if "json" in formats:
        path = out / f"report_{year}.json"
        _dump_json(report, path)
        written.append(path)
    if "csv" in formats:
        series_like = {
            "layer": report["layer"],
            "config": report["config"],
            "years": [year],
            "reports": {year: report},
            "failures": {},
        }
        written.extend(emit(series_like, out, formats=("csv",)))
    for path in written:
        click.echo(str(path))


@main.command("series")
@click.argument("input_path", type=click.Path())
@_input_options
@_run_options
def series_cmd(input_path, layer, input_format, config_path, out_dir, fmt, seed):
    """Reports for every year in the input; keeps going past bad years."""
    counts, config = _load_inputs(input_path, layer, input_format, config_path, seed)
    series = run_series(counts, config)
    if out_dir is None:
        click.echo(_to_json(series))
    else:
        for path in emit(series, out_dir, formats=_formats(fmt)):
            click.echo(str(path))
    failures = series["failures"]
    if failures:
        for y in sorted(failures):
            click.echo(f"failed {y}: {failures[y]}", err=True)
        sys.exit(2)


def _to_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
