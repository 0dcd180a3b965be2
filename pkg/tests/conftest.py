import math

import numpy as np
import pytest

from panelboost.config import load_config
from panelboost.data import CountryPanel
from panelboost.fixture import fixture_config_path


@pytest.fixture
def fixture_config(tmp_path):
    """Bundled fixture dataset with outputs redirected to a temp dir."""
    cfg = load_config(fixture_config_path())
    cfg.out_dir = str(tmp_path / "out")
    return cfg


def make_panel(n_years=16, k=3, seed=0, start_year=2008, country="AAA"):
    """Small synthetic panel: target is a noisy function of the features."""
    rng = np.random.Generator(np.random.PCG64(seed))
    years = list(range(start_year, start_year + n_years))
    features = rng.normal(0, 1, size=(n_years, k))
    target = 2.5 + 0.2 * features[:, 0] + 0.05 * rng.normal(0, 1, n_years)
    return CountryPanel(
        country=country,
        years=years,
        target=target,
        features=features,
        feature_codes=[f"F{i}" for i in range(k)],
    )


@pytest.fixture
def small_panel():
    return make_panel()


def write_mini_dataset(tmp_path):
    """Tiny 2-country dataset plus config for fast CLI tests."""
    years = list(range(2008, 2024))
    ind_lines = ["country,indicator_code,indicator_name," + ",".join(map(str, years))]
    tgt_lines = ["country,year,value"]
    for ci, country in enumerate(["AAA", "BBB"]):
        for y in years:
            t = 2.0 + 0.5 * ci + 0.1 * math.sin(0.8 * (y - 2008) + ci)
            tgt_lines.append(f"{country},{y},{t:.6f}")
        for j in range(5):
            vals = []
            for y in years:
                t = 2.0 + 0.5 * ci + 0.1 * math.sin(0.8 * (y - 2008) + ci)
                vals.append(f"{(j + 1) * t + 0.01 * j * (y - 2008):.6f}")
            ind_lines.append(f"{country},C{j:02d},cand {j}," + ",".join(vals))
    (tmp_path / "indicators.csv").write_text("\n".join(ind_lines) + "\n")
    (tmp_path / "target.csv").write_text("\n".join(tgt_lines) + "\n")
    config = """\
paths:
  indicators: indicators.csv
  target: target.csv
  out: out
year_range: [2008, 2023]
edr: {epsilon: 0.25, k: 3}
split: {last_train_year: 2017}
cv: {k: 2, shuffled: false}
grid:
  n_estimators: [10]
  learning_rate: [0.3]
  max_depth: [2]
forecast: {horizon: 5, trend_window: 8}
seed: 11
"""
    cfg_path = tmp_path / "config.yaml"
    cfg_path.write_text(config)
    return cfg_path


@pytest.fixture
def mini_config_path(tmp_path):
    return write_mini_dataset(tmp_path)
