"""Backtesting with MAPE on a chronological split and 5-year forecasting.

Predictor trajectories beyond the panel are simulated with a per-feature
OLS linear trend over the trailing observed window, then fed through the
trained model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CountryPanel
from .errors import DataError
from .gbtree import BoostedModel, HyperParams, fit_panel, predict

DEFAULT_LAST_TRAIN_YEAR = 2017
DEFAULT_HORIZON = 5
DEFAULT_TREND_WINDOW = 8


@dataclass(frozen=True)
class YearRow:
    split: str  # "train" or "test"
    year: int
    actual: float
    predicted: float


@dataclass(frozen=True)
class BacktestReport:
    country: str
    train_mape: float
    test_mape: float
    rows: tuple[YearRow, ...]


@dataclass(frozen=True)
class ForecastResult:
    country: str
    horizon_years: tuple[int, ...]
    predictions: tuple[float, ...]
    simulated_features: np.ndarray
    method: str


def mape(actual, forecast) -> float:
    """Mean absolute percentage error, in percent.

    Zero actuals are a hard error: silently skipping them would change
    the averaging count.
    """
    actual = np.asarray(actual, dtype=float)
    forecast = np.asarray(forecast, dtype=float)
    if actual.size == 0:
        raise ValueError("mape of empty vectors is undefined")
    if actual.shape != forecast.shape:
        raise ValueError(f"length mismatch: {actual.shape} vs {forecast.shape}")
    if np.any(actual == 0):
        raise ValueError("actual contains zero values; MAPE is undefined")
    return float(np.mean(np.abs((actual - forecast) / actual)) * 100.0)


def split_train_test(
    panel: CountryPanel, last_train_year: int = DEFAULT_LAST_TRAIN_YEAR
) -> tuple[CountryPanel, CountryPanel]:
    """Chronological split: train years <= last_train_year, test years after."""
    train_idx = [i for i, y in enumerate(panel.years) if y <= last_train_year]
    test_idx = [i for i, y in enumerate(panel.years) if y > last_train_year]
    if not train_idx:
        raise DataError(f"empty train split for last_train_year={last_train_year}")
    if not test_idx:
        raise DataError(f"empty test split for last_train_year={last_train_year}")
    return panel.rows(train_idx), panel.rows(test_idx)


def backtest_model(
    model: BoostedModel,
    panel: CountryPanel,
    last_train_year: int = DEFAULT_LAST_TRAIN_YEAR,
) -> BacktestReport:
    """Score an already-trained model on both sides of the split."""
    train, test = split_train_test(panel, last_train_year)
    rows = []
    for split_name, part in (("train", train), ("test", test)):
        for i, year in enumerate(part.years):
            rows.append(
                YearRow(
                    split=split_name,
                    year=year,
                    actual=float(part.target[i]),
                    predicted=predict(model, part.features[i]),
                )
            )
    train_pred = [r.predicted for r in rows if r.split == "train"]
    test_pred = [r.predicted for r in rows if r.split == "test"]
    return BacktestReport(
        country=panel.country,
        train_mape=mape(train.target, train_pred),
        test_mape=mape(test.target, test_pred),
        rows=tuple(rows),
    )


def backtest(
    panel: CountryPanel,
    params: HyperParams,
    seed: int,
    last_train_year: int = DEFAULT_LAST_TRAIN_YEAR,
) -> BacktestReport:
    """Fit on the training years, then score both splits."""
    train, _ = split_train_test(panel, last_train_year)
    model = fit_panel(train, params, seed)
    return backtest_model(model, panel, last_train_year)


def simulate_predictors(
    panel: CountryPanel,
    horizon: int,
    trend_window: int = DEFAULT_TREND_WINDOW,
) -> np.ndarray:
    """Extrapolate each feature with an OLS line over its trailing window.

    Only observed cells enter the fit (missing history is skipped); the
    window covers the most recent ``trend_window`` observed years. The
    output has no missing cells.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    future_years = np.array(
        [panel.years[-1] + i for i in range(1, horizon + 1)], dtype=float
    )
    out = np.empty((horizon, panel.num_features), dtype=float)
    years = np.array(panel.years, dtype=float)
    for j, code in enumerate(panel.feature_codes):
        col = panel.features[:, j]
        mask = ~np.isnan(col)
        if mask.sum() < 2:
            raise DataError(
                f"feature {code} for {panel.country} has fewer than 2 observations"
            )
        obs_years = years[mask][-trend_window:]
        obs_vals = col[mask][-trend_window:]
        slope, intercept = np.polyfit(obs_years, obs_vals, 1)
        out[:, j] = slope * future_years + intercept
    return out


def forecast(
    model: BoostedModel,
    panel: CountryPanel,
    horizon: int = DEFAULT_HORIZON,
    trend_window: int = DEFAULT_TREND_WINDOW,
) -> ForecastResult:
    """Predict the target over the horizon years following the panel."""
    if tuple(model.feature_codes) != tuple(panel.feature_codes):
        raise DataError(
            f"model features {list(model.feature_codes)} do not match panel "
            f"features {panel.feature_codes}"
        )
    simulated = simulate_predictors(panel, horizon, trend_window)
    years = tuple(panel.years[-1] + i for i in range(1, horizon + 1))
    predictions = tuple(predict(model, simulated[i]) for i in range(horizon))
    return ForecastResult(
        country=panel.country,
        horizon_years=years,
        predictions=predictions,
        simulated_features=simulated,
        method=f"ols_trend_m{trend_window}",
    )
