"""Command-line front end: a thin client over the pipeline stages.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
error (including corrupt model files).
"""

from __future__ import annotations

import sys

import click

from .config import load_config
from .errors import ConfigError, DataError

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def _run(stage, config_path: str, seed, out, **kwargs):
    from . import pipeline  # deferred so --help stays fast

    try:
        config = load_config(config_path)
        if seed is not None:
            config.seed = seed
        if out is not None:
            config.out_dir = out
        stage_fn = getattr(pipeline, f"run_{stage}")
        stage_fn(config, echo=click.echo, **kwargs)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (DataError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True, type=str, help="Pipeline config file (YAML).")(fn)
    fn = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Override the config seed.")(fn)
    fn = click.option("--out", type=str, default=None, help="Override the output directory.")(fn)
    return fn


@click.group()
def main():
    """Panel forecasting pipeline: similarity ranking, boosted trees,
    grid-search tuning, backtesting, and multi-year forecasts."""


@main.command()
@_common_options
def rank(config_path, seed, out):
    """Rank candidate indicators against the target per country."""
    _run("rank", config_path, seed, out)


@main.command()
@_common_options
def tune(config_path, seed, out):
    """Grid-search hyperparameters with cross-validation per country."""
    _run("tune", config_path, seed, out)


@main.command()
@_common_options
def train(config_path, seed, out):
    """Train per-country models with the tuned hyperparameters."""
    _run("train", config_path, seed, out)


@main.command()
@_common_options
def evaluate(config_path, seed, out):
    """Backtest trained models; writes summary and per-year predictions."""
    _run("evaluate", config_path, seed, out)


@main.command()
@_common_options
def forecast(config_path, seed, out):
    """Forecast the target over the configured horizon."""
    _run("forecast", config_path, seed, out)


@main.command()
@_common_options
@click.option("--no-svg", is_flag=True, help="Write CSV reports only.")
def report(config_path, seed, out, no_svg):
    """Export actual-vs-predicted reports (CSV, optional SVG chart)."""
    _run("report", config_path, seed, out, svg=not no_svg)


@main.command(name="all")
@_common_options
@click.option("--no-svg", is_flag=True, help="Write CSV reports only.")
def run_all(config_path, seed, out, no_svg):
    """Run the whole pipeline: rank, tune, train, evaluate, forecast, report."""
    _run("all", config_path, seed, out, svg=not no_svg)


if __name__ == "__main__":
    main()
