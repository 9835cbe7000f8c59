"""End-to-end runs: counts in, yearly structure reports out.

The pipeline ties the pieces together for one data layer (trade,
science, technology, or anything shaped like country x activity counts):

1. ingest yearly count tables into matrices over a common identifier
   universe (the sorted union across years, zero-filled),
2. per year: optional log transform, RCA, binarization, then density,
   RCA histogram, NODF, temperature, fitness/complexity, communities,
   and z-scores of the chosen metrics against the chosen null models,
3. emit machine-readable JSON plus CSV trend tables.

Reports contain no timestamps and embed the full configuration and all
derived seeds, so a rerun of the same inputs is byte-identical.
"""

import csv
import json
import warnings
from dataclasses import asdict, dataclass, fields
from functools import partial
from pathlib import Path

import numpy as np

from .community import _partition_modularity, optimize_modularity, project
from .matrices import CountMatrix, binarize, compute_rca, density, log_transform, rca_histogram
from .nestedness import fitness_complexity, nodf, pack_order, temperature
from .nullmodels import derive_seed, ensemble_stats, fit_bicm, fit_er

_MODEL_SEED_INDEX = {"er": 0, "bicm": 1}
_OPTIMIZER_SEED = 0  # fixed so observed and sampled partitions face identical optimizers

_DEFAULT_HIST_EDGES = tuple(float(e) for e in np.logspace(-4.0, 4.0, 65))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run depends on besides the counts themselves.

    ``log_transform=None`` resolves per layer: citation-like "science"
    counts are log-damped, every other layer is used raw.
    ``window_years`` aggregates counts over a trailing window ending at
    the report year (years missing from the data are simply absent from
    the window).
    """

    threshold: float = 1.0
    log_transform: bool | None = None
    window_years: int = 1
    n_samples: int = 1000
    seed: int = 0
    models: tuple = ("er", "bicm")
    metrics: tuple = ("nodf", "temperature", "modularity")
    hist_edges: tuple = _DEFAULT_HIST_EDGES
    restarts: int = 10
    u_max: float = 0.04145
    pack_method: str = "fitness_complexity"
    fc_tol: float = 1e-10
    fc_max_iter: int = 1000
    bicm_tol: float = 1e-8
    bicm_max_iter: int = 10000
    bicm_damping: float = 0.5
    n_jobs: int = 1

    def __post_init__(self):
        for name in ("models", "metrics", "hist_edges"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        unknown = set(self.models) - set(_MODEL_SEED_INDEX)
        if unknown:
            raise ValueError(f"unknown null models: {sorted(unknown)}")
        unknown = set(self.metrics) - {"nodf", "temperature", "modularity"}
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        if self.pack_method not in ("fitness_complexity", "degree"):
            raise ValueError(f"unknown packing method: {self.pack_method!r}")
        for name in ("window_years", "n_samples", "restarts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def to_dict(self):
        d = asdict(self)
        for name in ("models", "metrics", "hist_edges"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _reported_config(config):
    # n_jobs is an execution knob; emitted reports must not depend on it
    d = config.to_dict()
    del d["n_jobs"]
    return d


def load_config(path):
    """PipelineConfig from a JSON file of config keys (all optional)."""
    with open(path, encoding="utf-8") as fh:
        return PipelineConfig.from_dict(json.load(fh))


# ---------------------------------------------------------------- ingest


def _parse_value(text, lineno, where):
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"{where}: line {lineno}: not a number: {text!r}") from None
    if not np.isfinite(value):
        raise ValueError(f"{where}: line {lineno}: value must be finite")
    if value < 0:
        raise ValueError(f"{where}: line {lineno}: negative value {value!r}")
    return value


def _read_long(path):
    """(year, country, activity) -> value from one long-format CSV."""
    where = str(path)
    entries = {}
    n_dup = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["year", "country", "activity", "value"]:
            raise ValueError(f"{where}: line 1: expected header year,country,activity,value")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{where}: line {lineno}: expected 4 fields, got {len(row)}")
            try:
                year = int(row[0])
            except ValueError:
                raise ValueError(f"{where}: line {lineno}: not a year: {row[0]!r}") from None
            country, activity = row[1].strip(), row[2].strip()
            if not country or not activity:
                raise ValueError(f"{where}: line {lineno}: empty identifier")
            key = (year, country, activity)
            if key in entries:
                n_dup += 1
            entries[key] = entries.get(key, 0.0) + _parse_value(row[3], lineno, where)
    if not entries:
        raise ValueError(f"{where}: no data rows")
    if n_dup:
        warnings.warn(f"{where}: {n_dup} duplicate (year, country, activity) rows summed")
    return entries


def _read_wide(path):
    """Same mapping from a directory of <year>.csv country-by-activity tables."""
    files = sorted(Path(path).glob("*.csv"))
    if not files:
        raise ValueError(f"{path}: no <year>.csv files found")
    entries = {}
    n_dup = 0
    for f in files:
        try:
            year = int(f.stem)
        except ValueError:
            raise ValueError(f"{f}: file name must be <year>.csv") from None
        with open(f, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "country" or len(header) < 2:
                raise ValueError(f"{f}: line 1: expected header country,<activity>,...")
            activities = [a.strip() for a in header[1:]]
            if len(set(activities)) != len(activities):
                raise ValueError(f"{f}: line 1: duplicate activity column")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ValueError(
                        f"{f}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                    )
                country = row[0].strip()
                if not country:
                    raise ValueError(f"{f}: line {lineno}: empty identifier")
                for activity, cell in zip(activities, row[1:]):
                    key = (year, country, activity)
                    if key in entries:
                        n_dup += 1
                    entries[key] = entries.get(key, 0.0) + _parse_value(cell, lineno, f)
    if not entries:
        raise ValueError(f"{path}: no data rows")
    if n_dup:
        warnings.warn(f"{path}: {n_dup} duplicate country rows summed")
    return entries


def ingest(path, layer="other", input_format="long"):
    """Yearly count matrices over a common identifier universe.

    ``long`` expects one CSV with the exact header
    ``year,country,activity,value``; ``wide`` expects a directory of
    ``<year>.csv`` tables with countries as rows and activities as
    columns. Duplicated entries are summed with a warning; malformed or
    negative values fail with their line number. The identifier universe
    is the sorted union over all years; missing pairs are zero.

    Returns
    -------
    dict mapping year to CountMatrix.
    """
    fmt = str(input_format).removesuffix("_csv")
    if fmt == "long":
        entries = _read_long(path)
    elif fmt == "wide":
        entries = _read_wide(path)
    else:
        raise ValueError(f"input_format must be 'long' or 'wide', got {input_format!r}")
    countries = tuple(sorted({c for _, c, _ in entries}))
    activities = tuple(sorted({a for _, _, a in entries}))
    row_index = {c: i for i, c in enumerate(countries)}
    col_index = {a: j for j, a in enumerate(activities)}
    out = {}
    for (year, country, activity), value in entries.items():
        if year not in out:
            out[year] = np.zeros((len(countries), len(activities)))
        out[year][row_index[country], col_index[activity]] += value
    return {
        year: CountMatrix(countries, activities, W, layer=layer, year=year)
        for year, W in sorted(out.items())
    }


# ---------------------------------------------------------------- running


def _metric_nodf(bipartite):
    return nodf(bipartite).nodf_total


def _metric_temperature(bipartite, u_max, fc_tol, fc_max_iter):
    return temperature(
        bipartite, u_max=u_max, fc_tol=fc_tol, fc_max_iter=fc_max_iter
    ).temperature


def _metric_callables(config):
    table = {
        "nodf": _metric_nodf,
        "temperature": partial(
            _metric_temperature,
            u_max=config.u_max, fc_tol=config.fc_tol, fc_max_iter=config.fc_max_iter,
        ),
        "modularity": partial(
            _partition_modularity,
            side="rows", normalized=False,
            restarts=config.restarts, optimizer_seed=_OPTIMIZER_SEED,
        ),
    }
    return {name: table[name] for name in config.metrics}


def _windowed_counts(counts_by_year, year, window):
    """Counts summed over the trailing window ending at ``year``."""
    base = counts_by_year[year]
    if window == 1:
        return base
    W = np.zeros_like(base.W)
    for y in range(year - window + 1, year + 1):
        if y in counts_by_year:
            W = W + counts_by_year[y].W
    return CountMatrix(base.rows, base.cols, W, layer=base.layer, year=year)


def _fit_model(name, bipartite, config):
    if name == "er":
        model = fit_er(bipartite)
        info = {"p": model.p}
    else:
        model = fit_bicm(
            bipartite,
            tol=config.bicm_tol,
            max_iter=config.bicm_max_iter,
            damping=config.bicm_damping,
        )
        info = {"residual": model.residual, "iterations": model.iterations}
    return model, info


def run_year(counts, config):
    """Full structural report for one count matrix, as a JSON-ready dict.

    The matrix's own ``year`` indexes the derived seed stream (a missing
    year counts as 0). Raises on unusable input (all-zero counts,
    null-model non-convergence); ``run_series`` turns such failures into
    recorded entries instead of aborting the whole series.
    """
    year = counts.year if counts.year is not None else 0
    use_log = config.log_transform
    if use_log is None:
        use_log = counts.layer == "science"
    if use_log:
        counts = log_transform(counts)
    rca = compute_rca(counts)
    bip = binarize(rca, config.threshold)

    edges = np.asarray(config.hist_edges)
    nonzero = rca.R[rca.R > 0]
    hist = {
        "bin_edges": list(config.hist_edges),
        "counts": [int(c) for c in rca_histogram(rca.R, edges)],
        "underflow": int((nonzero < edges[0]).sum()),
        "overflow": int((nonzero > edges[-1]).sum()),
    }

    fc = fitness_complexity(bip, tol=config.fc_tol, max_iter=config.fc_max_iter)
    ordering = None
    if config.pack_method == "degree":
        ordering = pack_order(bip, "degree")
    temp = temperature(
        bip, ordering=ordering,
        u_max=config.u_max, fc_tol=config.fc_tol, fc_max_iter=config.fc_max_iter,
    )
    nodf_res = nodf(bip)

    partition = optimize_modularity(
        project(bip, side="rows"), restarts=config.restarts, seed=_OPTIMIZER_SEED
    )

    year_seed = derive_seed(config.seed, year)
    metrics = _metric_callables(config)
    null_models = {}
    for name in config.models:
        model, info = _fit_model(name, bip, config)
        model_seed = derive_seed(year_seed, _MODEL_SEED_INDEX[name])
        stats = ensemble_stats(
            bip, model, metrics,
            n_samples=config.n_samples, seed=model_seed, n_jobs=config.n_jobs,
        )
        info["seed"] = model_seed
        info["stats"] = {m: asdict(s) for m, s in stats.items()}
        null_models[name] = info

    report = {
        "layer": counts.layer,
        "year": counts.year,
        "config": _reported_config(config),
        "year_seed": year_seed,
        "matrix": {
            "n_rows": bip.shape[0],
            "n_cols": bip.shape[1],
            "n_links": bip.n_links,
            "density": density(bip),
        },
        "rca_histogram": hist,
        "fitness": {c: float(v) for c, v in zip(bip.rows, fc.fitness)},
        "complexity": {a: float(v) for a, v in zip(bip.cols, fc.complexity)},
        "nestedness": {
            "nodf_total": nodf_res.nodf_total,
            "nodf_rows": nodf_res.nodf_rows,
            "nodf_cols": nodf_res.nodf_cols,
            "temperature": temp.temperature,
            "unexpectedness": temp.unexpectedness,
            "fill": temp.fill,
            "isocline_exponent": temp.isocline_exponent,
            "n_dropped_rows": temp.n_dropped_rows,
            "n_dropped_cols": temp.n_dropped_cols,
        },
        "communities": {
            "labels": {c: int(l) for c, l in zip(bip.rows, partition.labels)},
            "n_communities": partition.n_communities,
            "modularity": partition.modularity,
        },
        "null_models": null_models,
        "diagnostics": {"fc_iterations": fc.iterations, "fc_converged": fc.converged},
    }
    return _jsonable(report)


def run_series(counts_by_year, config):
    """Reports for every ingested year; failures recorded, not fatal.

    ``counts_by_year`` maps year to CountMatrix, as returned by
    ``ingest``. With ``window_years > 1`` each report is computed on
    counts summed over the trailing window ending at its year.
    """
    reports = {}
    failures = {}
    for year in sorted(counts_by_year):
        try:
            windowed = _windowed_counts(counts_by_year, year, config.window_years)
            reports[year] = run_year(windowed, config)
        except (ValueError, RuntimeError) as exc:
            failures[year] = f"layer {counts_by_year[year].layer}, year {year}: {exc}"
    layers = {cm.layer for cm in counts_by_year.values()}
    return _jsonable({
        "layer": sorted(layers)[0] if len(layers) == 1 else sorted(layers),
        "config": _reported_config(config),
        "years": sorted(counts_by_year),
        "reports": reports,
        "failures": failures,
    })


# ---------------------------------------------------------------- emitting


def _jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _dump_json(payload, path):
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def emit(series_report, out_dir, formats=("json", "csv")):
    """Write a series report to disk; returns the written paths.

    ``json`` writes one ``report_<year>.json`` per successful year plus
    the full nested report (including failures) to ``series.json``;
    ``csv`` writes the year-by-year trend tables ``density.csv``,
    ``rca_histogram.csv`` (with underflow/overflow rows, so counts sum to
    the number of nonzero RCA entries), ``nestedness_zscores.csv`` and
    ``modularity.csv``. Failed years appear only in ``series.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        for year in sorted(series_report["reports"]):
            path = out / f"report_{year}.json"
            _dump_json(series_report["reports"][year], path)
            written.append(path)
        path = out / "series.json"
        _dump_json(series_report, path)
        written.append(path)
    if "csv" in formats:
        reports = [series_report["reports"][y] for y in sorted(series_report["reports"])]

        rows = [
            (r["year"], r["matrix"]["n_rows"], r["matrix"]["n_cols"],
             r["matrix"]["n_links"], r["matrix"]["density"])
            for r in reports
        ]
        path = out / "density.csv"
        _write_csv(path, ["year", "n_rows", "n_cols", "n_links", "density"], rows)
        written.append(path)

        rows = []
        for r in reports:
            h = r["rca_histogram"]
            edges = h["bin_edges"]
            rows.append((r["year"], "underflow", "", edges[0], h["underflow"]))
            for lo, hi, n in zip(edges[:-1], edges[1:], h["counts"]):
                rows.append((r["year"], "bin", lo, hi, n))
            rows.append((r["year"], "overflow", edges[-1], "", h["overflow"]))
        path = out / "rca_histogram.csv"
        _write_csv(path, ["year", "kind", "lower", "upper", "count"], rows)
        written.append(path)

        rows = []
        for r in reports:
            for model in sorted(r["null_models"]):
                stats = r["null_models"][model]["stats"]
                for metric in ("nodf", "temperature"):
                    if metric not in stats:
                        continue
                    s = stats[metric]
                    rows.append((
                        r["year"], model, metric, s["empirical_value"],
                        s["sample_mean"], s["sample_std"], s["z_score"],
                        s["n_samples"], s["n_excluded"],
                    ))
        path = out / "nestedness_zscores.csv"
        _write_csv(
            path,
            ["year", "model", "metric", "empirical", "sample_mean",
             "sample_std", "z_score", "n_samples", "n_excluded"],
            rows,
        )
        written.append(path)

        rows = []
        for r in reports:
            base = (r["year"], r["communities"]["n_communities"],
                    r["communities"]["modularity"])
            any_model = False
            for model in sorted(r["null_models"]):
                stats = r["null_models"][model]["stats"]
                if "modularity" in stats:
                    s = stats["modularity"]
                    rows.append(base + (model, s["sample_mean"], s["sample_std"], s["z_score"]))
                    any_model = True
            if not any_model:
                rows.append(base + ("", "", "", ""))
        path = out / "modularity.csv"
        _write_csv(
            path,
            ["year", "n_communities", "modularity", "model",
             "sample_mean", "sample_std", "z_score"],
            rows,
        )
        written.append(path)
    return written
