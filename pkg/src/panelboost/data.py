"""Ingestion and preparation of indicator / target panels.

Loads wide-format indicator CSVs and long-format target CSVs, repairs
missing values by linear interpolation, z-normalizes series for the
similarity ranking, and assembles per-country aligned panels.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

DEFAULT_YEAR_RANGE = (2008, 2023)
DEFAULT_COVERAGE_THRESHOLD = 0.7


@dataclass(frozen=True)
class IndicatorSeries:
    """One (country, indicator) yearly series; None marks a missing value."""

    country: str
    indicator_code: str
    indicator_name: str
    observations: dict[int, float | None]

    def __post_init__(self):
        years = list(self.observations)
        if years != sorted(years) or len(years) != len(set(years)):
            raise DataError(
                f"years must be strictly increasing for "
                f"({self.country}, {self.indicator_code})"
            )
        if not any(v is not None for v in self.observations.values()):
            raise DataError(
                f"series ({self.country}, {self.indicator_code}) has no observations"
            )

    @property
    def years(self) -> list[int]:
        return list(self.observations)

    def values(self) -> list[float | None]:
        return list(self.observations.values())

    def num_observed(self) -> int:
        return sum(1 for v in self.observations.values() if v is not None)

    def is_fully_observed(self) -> bool:
        return all(v is not None for v in self.observations.values())

    def coverage(self, year_range: tuple[int, int]) -> float:
        """Fraction of years in [y_min, y_max] with an observed value."""
        y_min, y_max = year_range
        n_years = y_max - y_min + 1
        observed = sum(
            1
            for y, v in self.observations.items()
            if v is not None and y_min <= y <= y_max
        )
        return observed / n_years


@dataclass(frozen=True)
class NormStats:
    """Mean / population std recorded so normalization is invertible."""

    mean: float
    std: float

    def __post_init__(self):
        if self.std < 0:
            raise DataError("std must be non-negative")


@dataclass
class CountryPanel:
    """Aligned target vector and feature matrix over a year range.

    ``features`` is an (n_years, k) float array with NaN marking missing
    cells; the target carries no missing values.
    """

    country: str
    years: list[int]
    target: np.ndarray
    features: np.ndarray
    feature_codes: list[str]

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float)
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            self.features = self.features.reshape(len(self.years), -1)
        if len(self.target) != len(self.years):
            raise DataError("target length must match years")
        if np.isnan(self.target).any():
            raise DataError("target must not contain missing values")
        if self.features.shape != (len(self.years), len(self.feature_codes)):
            raise DataError("feature matrix shape must be |years| x |feature_codes|")

    @property
    def num_features(self) -> int:
        return len(self.feature_codes)

    def rows(self, indices) -> "CountryPanel":
        """Sub-panel restricted to the given row indices (chronological order kept)."""
        idx = sorted(indices)
        return CountryPanel(
            country=self.country,
            years=[self.years[i] for i in idx],
            target=self.target[idx],
            features=self.features[idx, :],
            feature_codes=list(self.feature_codes),
        )

    def to_json(self) -> str:
        features = [
            [None if math.isnan(v) else v for v in row] for row in self.features
        ]
        return json.dumps(
            {
                "country": self.country,
                "years": self.years,
                "target": self.target.tolist(),
                "feature_codes": self.feature_codes,
                "features": features,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CountryPanel":
        try:
            doc = json.loads(text)
            features = np.array(
                [[math.nan if v is None else float(v) for v in row] for row in doc["features"]],
                dtype=float,
            ).reshape(len(doc["years"]), len(doc["feature_codes"]))
            return cls(
                country=doc["country"],
                years=[int(y) for y in doc["years"]],
                target=np.array(doc["target"], dtype=float),
                features=features,
                feature_codes=list(doc["feature_codes"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed panel document: {exc}") from exc


def _parse_cell(raw: str, path: str, line_no: int) -> float | None:
    raw = raw.strip()
    if raw == "":
        return None
    try:
        return float(raw)
    except ValueError:
        raise DataError(
            f"{path}:{line_no}: non-numeric cell {raw!r}"
        ) from None


def load_wdi_csv(
    path: str, year_range: tuple[int, int] = DEFAULT_YEAR_RANGE
) -> list[IndicatorSeries]:
    """Load a wide indicator CSV: country,indicator_code,indicator_name,<year>...

    Blank cells become missing values; observations are restricted to
    ``year_range``. Duplicate (country, indicator) rows are a hard error.
    """
    y_min, y_max = year_range
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header[:3]] != [
            "country",
            "indicator_code",
            "indicator_name",
        ]:
            raise DataError(
                f"{path}: malformed header, expected "
                f"country,indicator_code,indicator_name,<year>,..."
            )
        try:
            year_cols = [int(c) for c in header[3:]]
        except ValueError:
            raise DataError(f"{path}: malformed header, year columns must be integers") from None

        series: list[IndicatorSeries] = []
        seen: dict[tuple[str, str], int] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != 3 + len(year_cols):
                raise DataError(f"{path}:{line_no}: expected {3 + len(year_cols)} cells")
            country, code, name = (c.strip() for c in row[:3])
            key = (country, code)
            if key in seen:
                raise DataError(
                    f"{path}: duplicate (country, indicator) ({country}, {code}) "
                    f"at lines {seen[key]} and {line_no}"
                )
            seen[key] = line_no
            obs: dict[int, float | None] = {}
            for year, raw in zip(year_cols, row[3:]):
                if y_min <= year <= y_max:
                    obs[year] = _parse_cell(raw, path, line_no)
            obs = dict(sorted(obs.items()))
            if not any(v is not None for v in obs.values()):
                continue
            series.append(IndicatorSeries(country, code, name, obs))
    return series


def write_wdi_csv(series: list[IndicatorSeries], path: str, year_range: tuple[int, int]) -> None:
    """Write series back in the wide CSV layout (inverse of load_wdi_csv)."""
    y_min, y_max = year_range
    years = list(range(y_min, y_max + 1))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country", "indicator_code", "indicator_name"] + [str(y) for y in years])
        for s in series:
            cells = []
            for y in years:
                v = s.observations.get(y)
                cells.append("" if v is None else repr(v))
            writer.writerow([s.country, s.indicator_code, s.indicator_name] + cells)


def load_target_csv(path: str) -> list[IndicatorSeries]:
    """Load a long-format target CSV with columns country,year,value."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header] != ["country", "year", "value"]:
            raise DataError(f"{path}: malformed header, expected country,year,value")

        per_country: dict[str, dict[int, float]] = {}
        seen: dict[tuple[str, int], int] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{line_no}: expected 3 cells")
            country = row[0].strip()
            try:
                year = int(row[1])
            except ValueError:
                raise DataError(f"{path}:{line_no}: unparseable year {row[1]!r}") from None
            try:
                value = float(row[2])
            except ValueError:
                raise DataError(f"{path}:{line_no}: unparseable value {row[2]!r}") from None
            key = (country, year)
            if key in seen:
                raise DataError(
                    f"{path}: duplicate (country, year) ({country}, {year}) "
                    f"at lines {seen[key]} and {line_no}"
                )
            seen[key] = line_no
            per_country.setdefault(country, {})[year] = value

    if not per_country:
        raise DataError(f"{path}: no target observations")
    return [
        IndicatorSeries(country, "TARGET", "target index", dict(sorted(obs.items())))
        for country, obs in sorted(per_country.items())
    ]


def impute_series(s: IndicatorSeries) -> IndicatorSeries:
    """Fill gaps: linear interpolation inside, nearest-value fill at the edges.

    Interpolation weights by year distance, so uneven year spacing is
    handled correctly. Idempotent; requires >= 2 observed values.
    """
    observed = [(y, v) for y, v in s.observations.items() if v is not None]
    if len(observed) < 2:
        raise DataError(
            f"insufficient coverage for ({s.country}, {s.indicator_code}): "
            f"{len(observed)} observed values, need >= 2"
        )
    if s.is_fully_observed():
        return s

    obs_years = np.array([y for y, _ in observed], dtype=float)
    obs_vals = np.array([v for _, v in observed], dtype=float)
    all_years = np.array(s.years, dtype=float)
    # np.interp clamps to edge values outside the observed range
    filled = np.interp(all_years, obs_years, obs_vals)
    new_obs = {int(y): float(v) for y, v in zip(all_years, filled)}
    return IndicatorSeries(s.country, s.indicator_code, s.indicator_name, new_obs)


def znormalize(s: IndicatorSeries) -> tuple[IndicatorSeries, NormStats]:
    """Standardize a fully observed series to mean 0, population std 1.

    Zero-variance series map to all zeros with std recorded as 0.
    """
    if not s.is_fully_observed():
        raise DataError(
            f"cannot normalize series with missing values "
            f"({s.country}, {s.indicator_code})"
        )
    vals = np.array(s.values(), dtype=float)
    mean = float(vals.mean())
    std = float(vals.std())  # population std (ddof=0)
    if std > 0:
        norm = (vals - mean) / std
    else:
        norm = np.zeros_like(vals)
    new_obs = {y: float(v) for y, v in zip(s.years, norm)}
    return IndicatorSeries(s.country, s.indicator_code, s.indicator_name, new_obs), NormStats(mean, std)


def build_panel(
    target: IndicatorSeries,
    candidates: list[IndicatorSeries],
    selected_codes: list[str],
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
    coverage_threshold: float = DEFAULT_COVERAGE_THRESHOLD,
) -> CountryPanel:
    """Assemble the aligned panel for one country.

    Feature columns carry raw (unnormalized) values and keep genuine
    missing cells as NaN; normalization is only used for the similarity
    ranking, never inside the panel.
    """
    y_min, y_max = year_range
    years = list(range(y_min, y_max + 1))
    target_vals = [target.observations.get(y) for y in years]
    if any(v is None for v in target_vals):
        raise DataError(
            f"target for {target.country} is not fully observed over "
            f"{y_min}-{y_max}; impute it first"
        )
    by_code = {c.indicator_code: c for c in candidates}
    columns = []
    for code in selected_codes:
        if code not in by_code:
            raise DataError(f"indicator {code} not found for {target.country}")
        s = by_code[code]
        if s.coverage(year_range) < coverage_threshold:
            raise DataError(
                f"indicator {code} for {target.country} covers only "
                f"{s.coverage(year_range):.0%} of {y_min}-{y_max} "
                f"(threshold {coverage_threshold:.0%})"
            )
        col = [s.observations.get(y) for y in years]
        columns.append([math.nan if v is None else float(v) for v in col])
    if not selected_codes:
        logger.warning("building panel for %s with zero features", target.country)
    features = (
        np.array(columns, dtype=float).T
        if columns
        else np.empty((len(years), 0), dtype=float)
    )
    return CountryPanel(
        country=target.country,
        years=years,
        target=np.array(target_vals, dtype=float),
        features=features,
        feature_codes=list(selected_codes),
    )
