"""Batch pipeline stages wired together: rank, tune, train, evaluate,
forecast, report.

Each stage recomputes its upstream inputs from the config (ingestion and
ranking are cheap and deterministic), reads artifacts produced by earlier
stages where the contract requires it (best-params, model files), and
writes all outputs atomically under the output directory together with a
run manifest keyed by a config hash rather than wall-clock time.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

from . import __version__
from .config import PipelineConfig
from .data import (
    CountryPanel,
    IndicatorSeries,
    build_panel,
    impute_series,
    load_target_csv,
    load_wdi_csv,
    znormalize,
)
from .edr import EdrParams, FeatureRanking, rank_features
from .errors import DataError
from .evaluation import backtest_model, forecast, split_train_test
from .gbtree import HyperParams, deserialize_model, fit_panel, serialize_model
from .tuning import grid_search, leaderboard_csv_rows


def _atomic_write(path: str, content: str) -> None:
    """Write via a temp file renamed into place; no partial outputs."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def config_hash(config: PipelineConfig) -> str:
    doc = config.to_dict()
    # hash the run inputs, not where outputs land
    doc["paths"].pop("out", None)
    canonical = json.dumps(doc, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_manifest(config: PipelineConfig, command: str, outputs: list[str]) -> str:
    path = os.path.join(config.out_dir, f"manifest_{command}.json")
    doc = {
        "command": command,
        "config_hash": config_hash(config),
        "seed": config.seed,
        "version": __version__,
        "outputs": sorted(os.path.basename(o) for o in outputs),
    }
    _atomic_write(path, json.dumps(doc, indent=2) + "\n")
    return path


class Dataset:
    """Per-country target series and candidate indicator series."""

    def __init__(self, targets: dict[str, IndicatorSeries], candidates: dict[str, list[IndicatorSeries]]):
        self.targets = targets
        self.candidates = candidates

    @property
    def countries(self) -> list[str]:
        return sorted(self.targets)


def load_dataset(config: PipelineConfig) -> Dataset:
    indicators = load_wdi_csv(config.indicators_csv, config.year_range)
    targets = load_target_csv(config.target_csv)
    by_country: dict[str, list[IndicatorSeries]] = {}
    for s in indicators:
        by_country.setdefault(s.country, []).append(s)
    target_map = {}
    for t in targets:
        if t.country not in by_country:
            raise DataError(
                f"target country {t.country} has no indicator rows in "
                f"{config.indicators_csv}"
            )
        restricted = {
            y: t.observations.get(y)
            for y in range(config.year_range[0], config.year_range[1] + 1)
        }
        target_map[t.country] = IndicatorSeries(
            t.country, t.indicator_code, t.indicator_name, restricted
        )
    return Dataset(target_map, by_country)


def rank_country(
    config: PipelineConfig, dataset: Dataset, country: str
) -> tuple[FeatureRanking, dict[str, str]]:
    """Full similarity ranking of eligible candidates for one country.

    Eligibility requires coverage >= threshold before imputation; target
    and candidates are imputed and z-normalized only for the ranking.
    """
    target = impute_series(dataset.targets[country])
    target_norm, _ = znormalize(target)
    names = {}
    normalized = {}
    for s in dataset.candidates[country]:
        if s.coverage(config.year_range) < config.coverage_threshold:
            continue
        if s.num_observed() < 2:
            continue
        aligned = IndicatorSeries(
            s.country,
            s.indicator_code,
            s.indicator_name,
            {
                y: s.observations.get(y)
                for y in range(config.year_range[0], config.year_range[1] + 1)
            },
        )
        norm, _ = znormalize(impute_series(aligned))
        normalized[s.indicator_code] = norm.values()
        names[s.indicator_code] = s.indicator_name
    if len(normalized) < config.top_k:
        raise DataError(
            f"{country}: only {len(normalized)} eligible candidates, "
            f"need at least k={config.top_k}"
        )
    ranking = rank_features(
        target_norm.values(), normalized, EdrParams(config.epsilon), k=len(normalized)
    )
    return ranking, names


def build_country_panel(
    config: PipelineConfig, dataset: Dataset, country: str
) -> CountryPanel:
    ranking, _ = rank_country(config, dataset, country)
    selected = ranking.top(config.top_k).codes()
    target = impute_series(dataset.targets[country])
    return build_panel(
        target,
        dataset.candidates[country],
        selected,
        config.year_range,
        config.coverage_threshold,
    )


def _best_params_path(config: PipelineConfig, country: str) -> str:
    return os.path.join(config.out_dir, f"best_params_{country}.json")


def _model_path(config: PipelineConfig, country: str) -> str:
    return os.path.join(config.out_dir, f"model_{country}.json")


def run_rank(config: PipelineConfig, echo=print) -> list[str]:
    dataset = load_dataset(config)
    outputs = []
    for country in dataset.countries:
        ranking, names = rank_country(config, dataset, country)
        top = ranking.top(config.top_k)
        rows = [
            [str(e.rank), e.indicator_code, names[e.indicator_code], str(e.distance)]
            for e in top.entries
        ]
        path = os.path.join(config.out_dir, f"ranking_{country}.csv")
        _atomic_write(
            path, _csv_text(["rank", "indicator_code", "indicator_name", "edr_distance"], rows)
        )
        outputs.append(path)
        echo(f"{country}: top-{config.top_k} predictors: " + ", ".join(top.codes()))
    outputs.append(write_manifest(config, "rank", outputs))
    return outputs


def run_tune(config: PipelineConfig, echo=print) -> list[str]:
    dataset = load_dataset(config)
    outputs = []
    for country in dataset.countries:
        panel = build_country_panel(config, dataset, country)
        train, _ = split_train_test(panel, config.last_train_year)
        result = grid_search(train, config.grid, config.cv, config.seed)
        lb_path = os.path.join(config.out_dir, f"leaderboard_{country}.csv")
        _atomic_write(
            lb_path,
            _csv_text(
                ["rank", "params_json", "mean_mape", "fold_scores_json"],
                leaderboard_csv_rows(result),
            ),
        )
        bp_path = _best_params_path(config, country)
        _atomic_write(
            bp_path,
            json.dumps(
                {
                    "country": country,
                    "params": result.best_params.to_json_dict(),
                    "cv_mape": result.best_score,
                },
                indent=2,
            )
            + "\n",
        )
        outputs.extend([lb_path, bp_path])
        echo(f"{country}: best CV MAPE {result.best_score:.4f}%")
    outputs.append(write_manifest(config, "tune", outputs))
    return outputs


def _load_best_params(config: PipelineConfig, country: str) -> HyperParams:
    path = _best_params_path(config, country)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return HyperParams.from_json_dict(doc["params"])
    except FileNotFoundError:
        raise DataError(f"best-params file not found: {path}; run `tune` first") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: invalid best-params file: {exc}") from exc


def run_train(config: PipelineConfig, echo=print) -> list[str]:
    dataset = load_dataset(config)
    outputs = []
    for country in dataset.countries:
        panel = build_country_panel(config, dataset, country)
        train, _ = split_train_test(panel, config.last_train_year)
        params = _load_best_params(config, country)
        model = fit_panel(train, params, config.seed)
        path = _model_path(config, country)
        _atomic_write(path, serialize_model(model) + "\n")
        outputs.append(path)
        echo(f"{country}: trained {len(model.trees)} trees")
    outputs.append(write_manifest(config, "train", outputs))
    return outputs


def _load_model(config: PipelineConfig, country: str):
    path = _model_path(config, country)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}; run `train` first") from None
    return deserialize_model(text)


def run_evaluate(config: PipelineConfig, echo=print) -> list[str]:
    dataset = load_dataset(config)
    summary_rows = []
    prediction_rows = []
    for country in dataset.countries:
        panel = build_country_panel(config, dataset, country)
        model = _load_model(config, country)
        report = backtest_model(model, panel, config.last_train_year)
        summary_rows.append([country, repr(report.train_mape), repr(report.test_mape)])
        for r in report.rows:
            prediction_rows.append(
                [country, r.split, str(r.year), repr(r.actual), repr(r.predicted)]
            )
        echo(
            f"{country}: train MAPE {report.train_mape:.4f}%  "
            f"test MAPE {report.test_mape:.4f}%"
        )
    summary_path = os.path.join(config.out_dir, "summary.csv")
    predictions_path = os.path.join(config.out_dir, "predictions.csv")
    _atomic_write(
        summary_path, _csv_text(["country", "train_mape", "test_mape"], summary_rows)
    )
    _atomic_write(
        predictions_path,
        _csv_text(["country", "split", "year", "actual", "predicted"], prediction_rows),
    )
    outputs = [summary_path, predictions_path]
    outputs.append(write_manifest(config, "evaluate", outputs))
    return outputs


def run_forecast(config: PipelineConfig, echo=print) -> list[str]:
    dataset = load_dataset(config)
    rows = []
    for country in dataset.countries:
        panel = build_country_panel(config, dataset, country)
        model = _load_model(config, country)
        result = forecast(model, panel, config.horizon, config.trend_window)
        for year, pred in zip(result.horizon_years, result.predictions):
            rows.append([country, str(year), repr(pred), result.method])
        echo(
            f"{country}: forecast {result.horizon_years[0]}-{result.horizon_years[-1]}"
            if result.horizon_years
            else f"{country}: empty horizon"
        )
    path = os.path.join(config.out_dir, "forecast.csv")
    _atomic_write(path, _csv_text(["country", "year", "predicted", "method"], rows))
    outputs = [path, write_manifest(config, "forecast", [path])]
    return outputs


def _svg_line_chart(
    title: str, series: dict[str, list[tuple[float, float]]], width=640, height=360
) -> str:
    """Minimal multi-series line chart: one polyline per series."""
    pad = 50
    points = [p for pts in series.values() for p in pts]
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys), max(ys)
    x_span = (x_max - x_min) or 1.0
    y_span = (y_max - y_min) or 1.0

    def sx(x):
        return pad + (x - x_min) / x_span * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y_min) / y_span * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for i, (name, pts) in enumerate(series.items()):
        color = colors[i % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>'
        )
        parts.append(
            f'<text x="{width - pad + 4}" y="{pad + 16 * i + 10}" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def run_report(config: PipelineConfig, echo=print, svg: bool = True) -> list[str]:
    """Per-country actual-vs-predicted CSV (plus optional SVG chart)."""
    predictions_path = os.path.join(config.out_dir, "predictions.csv")
    forecast_path = os.path.join(config.out_dir, "forecast.csv")
    try:
        with open(predictions_path, newline="", encoding="utf-8") as fh:
            pred_rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise DataError(
            f"predictions file not found: {predictions_path}; run `evaluate` first"
        ) from None
    forecast_rows = []
    if os.path.exists(forecast_path):
        with open(forecast_path, newline="", encoding="utf-8") as fh:
            forecast_rows = list(csv.DictReader(fh))

    outputs = []
    countries = sorted({r["country"] for r in pred_rows})
    for country in countries:
        rows = [r for r in pred_rows if r["country"] == country]
        csv_rows = [[r["split"], r["year"], r["actual"], r["predicted"]] for r in rows]
        path = os.path.join(config.out_dir, f"actual_vs_predicted_{country}.csv")
        _atomic_write(path, _csv_text(["split", "year", "actual", "predicted"], csv_rows))
        outputs.append(path)
        if svg:
            actual = [(float(r["year"]), float(r["actual"])) for r in rows]
            predicted = [(float(r["year"]), float(r["predicted"])) for r in rows]
            series = {"actual": actual, "predicted": predicted}
            fc = [
                (float(r["year"]), float(r["predicted"]))
                for r in forecast_rows
                if r["country"] == country
            ]
            if fc:
                series["forecast"] = fc
            svg_path = os.path.join(config.out_dir, f"chart_{country}.svg")
            _atomic_write(svg_path, _svg_line_chart(country, series))
            outputs.append(svg_path)
        echo(f"{country}: report written")
    outputs.append(write_manifest(config, "report", outputs))
    return outputs


def run_all(config: PipelineConfig, echo=print, svg: bool = True) -> list[str]:
    outputs = []
    outputs += run_rank(config, echo)
    outputs += run_tune(config, echo)
    outputs += run_train(config, echo)
    outputs += run_evaluate(config, echo)
    outputs += run_forecast(config, echo)
    outputs += run_report(config, echo, svg=svg)
    return outputs
