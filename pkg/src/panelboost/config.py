"""Pipeline configuration: a YAML tree mirroring the stage parameters.

Relative paths inside the file resolve against the config file's own
directory so fixture configs stay portable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .data import DEFAULT_COVERAGE_THRESHOLD, DEFAULT_YEAR_RANGE
from .edr import DEFAULT_EPSILON, DEFAULT_TOP_K
from .errors import ConfigError
from .evaluation import DEFAULT_HORIZON, DEFAULT_LAST_TRAIN_YEAR, DEFAULT_TREND_WINDOW
from .tuning import DEFAULT_CV_FOLDS, CVConfig, GridSpec


@dataclass
class PipelineConfig:
    indicators_csv: str
    target_csv: str
    out_dir: str
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE
    epsilon: float = DEFAULT_EPSILON
    top_k: int = DEFAULT_TOP_K
    coverage_threshold: float = DEFAULT_COVERAGE_THRESHOLD
    last_train_year: int = DEFAULT_LAST_TRAIN_YEAR
    cv: CVConfig = field(default_factory=CVConfig)
    grid: GridSpec = field(default_factory=lambda: GridSpec({"n_estimators": [100]}))
    horizon: int = DEFAULT_HORIZON
    trend_window: int = DEFAULT_TREND_WINDOW
    seed: int = 0

    def __post_init__(self):
        if self.year_range[0] >= self.year_range[1]:
            raise ConfigError(f"invalid year_range {self.year_range}")
        if not self.year_range[0] <= self.last_train_year < self.year_range[1]:
            raise ConfigError(
                f"last_train_year {self.last_train_year} must lie strictly "
                f"inside year_range {self.year_range}"
            )
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.top_k < 1:
            raise ConfigError(f"edr k must be >= 1, got {self.top_k}")
        if self.horizon < 0:
            raise ConfigError(f"horizon must be >= 0, got {self.horizon}")
        if self.trend_window < 2:
            raise ConfigError(f"trend_window must be >= 2, got {self.trend_window}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "paths": {
                "indicators": self.indicators_csv,
                "target": self.target_csv,
                "out": self.out_dir,
            },
            "year_range": list(self.year_range),
            "edr": {"epsilon": self.epsilon, "k": self.top_k},
            "coverage_threshold": self.coverage_threshold,
            "split": {"last_train_year": self.last_train_year},
            "cv": {"k": self.cv.k, "shuffled": self.cv.shuffled},
            "grid": {k: list(v) for k, v in self.grid.values.items()},
            "forecast": {"horizon": self.horizon, "trend_window": self.trend_window},
            "seed": self.seed,
        }


def load_config(path: str) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    base_dir = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base_dir, p)

    try:
        paths = doc["paths"]
        edr = doc.get("edr", {})
        split = doc.get("split", {})
        cv = doc.get("cv", {})
        forecast_doc = doc.get("forecast", {})
        year_range = tuple(doc.get("year_range", DEFAULT_YEAR_RANGE))
        grid_doc = doc.get("grid", {"n_estimators": [100]})
        # accept the conventional short regularizer names in config files
        grid_doc = {
            {"lambda": "reg_lambda", "alpha": "reg_alpha"}.get(k, k): v
            for k, v in grid_doc.items()
        }
        return PipelineConfig(
            indicators_csv=resolve(paths["indicators"]),
            target_csv=resolve(paths["target"]),
            out_dir=resolve(paths.get("out", "out")),
            year_range=(int(year_range[0]), int(year_range[1])),
            epsilon=float(edr.get("epsilon", DEFAULT_EPSILON)),
            top_k=int(edr.get("k", DEFAULT_TOP_K)),
            coverage_threshold=float(
                doc.get("coverage_threshold", DEFAULT_COVERAGE_THRESHOLD)
            ),
            last_train_year=int(split.get("last_train_year", DEFAULT_LAST_TRAIN_YEAR)),
            cv=CVConfig(
                k=int(cv.get("k", DEFAULT_CV_FOLDS)),
                shuffled=bool(cv.get("shuffled", False)),
            ),
            grid=GridSpec(grid_doc),
            horizon=int(forecast_doc.get("horizon", DEFAULT_HORIZON)),
            trend_window=int(forecast_doc.get("trend_window", DEFAULT_TREND_WINDOW)),
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: invalid config: {exc}") from exc
