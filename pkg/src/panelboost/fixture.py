"""Seeded generator for the bundled offline fixture dataset.

Six countries, 2008-2023, 40 candidate indicators each: a correlated
block that tracks the target (so the similarity ranking has something
real to find), a block of random walks, and a block with missing cells
(some below the coverage threshold, so eligibility filtering is
exercised). Regenerate with:

    python -m panelboost.fixture [out_dir]

The committed files under panelboost/fixtures/ were produced by this
script with the default seed; regenerating is byte-stable.
"""

from __future__ import annotations

import csv
import importlib.resources
import os
import sys

import numpy as np

FIXTURE_SEED = 7
COUNTRIES = ["ARE", "BHR", "KWT", "OMN", "QAT", "SAU"]
YEARS = list(range(2008, 2024))
N_CORRELATED = 12
N_WALKS = 20
N_GAPPY = 8  # half of these fall below the coverage threshold

CONFIG_YAML = """\
paths:
  indicators: indicators.csv
  target: target.csv
  out: out
year_range: [2008, 2023]
edr:
  epsilon: 0.25
  k: 10
coverage_threshold: 0.7
split:
  last_train_year: 2017
cv:
  k: 3
  shuffled: false
grid:
  n_estimators: [25, 50, 100]
  learning_rate: [0.05, 0.1, 0.3]
  max_depth: [2, 3, 4]
forecast:
  horizon: 5
  trend_window: 8
seed: 42
"""


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def generate_fixture(out_dir: str, seed: int = FIXTURE_SEED) -> list[str]:
    rng = np.random.Generator(np.random.PCG64(seed))
    os.makedirs(out_dir, exist_ok=True)
    n_years = len(YEARS)
    t = np.arange(n_years)

    target_rows = []
    indicator_rows = []
    for country in COUNTRIES:
        base = rng.uniform(2.1, 3.1)
        phase = rng.uniform(0, 2 * np.pi)
        target = base + 0.12 * np.sin(2 * np.pi * t / 7 + phase) + rng.normal(0, 0.01, n_years)
        for year, v in zip(YEARS, target):
            target_rows.append([country, str(year), _fmt(v)])

        idx = 1
        for _ in range(N_CORRELATED):
            scale = rng.uniform(0.5, 40.0)
            offset = rng.uniform(-20.0, 100.0)
            noise = rng.normal(0, 0.02 * scale * 0.12, n_years)
            values = scale * target + offset + noise
            indicator_rows.append(
                [country, f"IND{idx:03d}", f"indicator {idx:03d}"]
                + [_fmt(v) for v in values]
            )
            idx += 1
        for _ in range(N_WALKS):
            start = rng.uniform(-50, 50)
            walk = start + np.cumsum(rng.normal(0, rng.uniform(0.5, 5.0), n_years))
            indicator_rows.append(
                [country, f"IND{idx:03d}", f"indicator {idx:03d}"]
                + [_fmt(v) for v in walk]
            )
            idx += 1
        for gap_i in range(N_GAPPY):
            walk = rng.uniform(-10, 10) + np.cumsum(rng.normal(0, 1.0, n_years))
            miss_frac = 0.2 if gap_i < N_GAPPY // 2 else 0.5
            n_missing = int(round(miss_frac * n_years))
            missing_at = set(rng.choice(n_years, size=n_missing, replace=False).tolist())
            cells = [
                "" if i in missing_at else _fmt(v) for i, v in enumerate(walk)
            ]
            indicator_rows.append(
                [country, f"IND{idx:03d}", f"indicator {idx:03d}"] + cells
            )
            idx += 1

    indicators_path = os.path.join(out_dir, "indicators.csv")
    with open(indicators_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["country", "indicator_code", "indicator_name"] + [str(y) for y in YEARS]
        )
        writer.writerows(indicator_rows)

    target_path = os.path.join(out_dir, "target.csv")
    with open(target_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "year", "value"])
        writer.writerows(target_rows)

    config_path = os.path.join(out_dir, "config.yaml")
    with open(config_path, "w", encoding="utf-8") as fh:
        fh.write(CONFIG_YAML)

    return [indicators_path, target_path, config_path]


def fixture_dir() -> str:
    """Directory holding the committed fixture files."""
    return str(importlib.resources.files("panelboost") / "fixtures")


def fixture_config_path() -> str:
    return os.path.join(fixture_dir(), "config.yaml")


if __name__ == "__main__":
    dest = sys.argv[1] if len(sys.argv) > 1 else fixture_dir()
    for p in generate_fixture(dest):
        print(p)
