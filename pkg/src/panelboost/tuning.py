"""Exhaustive hyperparameter grid search with chronological k-fold CV.

Folds are contiguous blocks of years (no shuffling by default) because the
rows are a time series; a shuffled mode exists behind a flag for
experiments. Every grid combination is evaluated, scored by mean MAPE
over the folds, and ranked; ties go to the earlier combination in grid
order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, DataError
from .evaluation import mape
from .gbtree import HyperParams, fit, predict_matrix

DEFAULT_CV_FOLDS = 3

# Table-style default search lists; the desk-scale fixture config trims
# this to a 3x3x3 grid so a full run stays in seconds.
FULL_GRID = {
    "n_estimators": [100, 500, 1000],
    "learning_rate": [0.01, 0.1, 0.3],
    "max_depth": [3, 5, 7, 10],
    "min_child_weight": [1, 3, 5],
    "gamma": [0, 0.1, 0.5, 1],
    "subsample": [0.6, 0.8, 1],
    "colsample_bytree": [0.6, 0.8, 1],
    "colsample_bylevel": [0.6, 0.8, 1],
    "reg_lambda": [0, 1, 5, 10],
    "reg_alpha": [0, 1, 5, 10],
}

_HP_FIELDS = [f.name for f in fields(HyperParams)]


@dataclass(frozen=True)
class GridSpec:
    """Per-hyperparameter candidate lists; omitted fields pin to defaults."""

    values: dict[str, list] = field(default_factory=dict)

    def __post_init__(self):
        for name, vals in self.values.items():
            if name not in _HP_FIELDS:
                raise ConfigError(f"unknown hyperparameter {name!r} in grid")
            if not vals:
                raise ConfigError(f"grid list for {name!r} is empty")
            for v in vals:
                HyperParams(**{name: v})  # range check per value

    def combinations(self) -> list[HyperParams]:
        """Cartesian product in the lexicographic order of the grid lists."""
        names = list(self.values)
        combos = []
        for values in itertools.product(*(self.values[n] for n in names)):
            combos.append(HyperParams(**dict(zip(names, values))))
        return combos

    def size(self) -> int:
        n = 1
        for vals in self.values.values():
            n *= len(vals)
        return n


@dataclass(frozen=True)
class CVConfig:
    k: int = DEFAULT_CV_FOLDS
    shuffled: bool = False

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError(f"cv folds must be >= 2, got {self.k}")


@dataclass(frozen=True)
class LeaderboardEntry:
    params: HyperParams
    mean_mape: float
    fold_mapes: tuple[float, ...]


@dataclass(frozen=True)
class DisqualifiedEntry:
    params: HyperParams
    reason: str


@dataclass(frozen=True)
class TuneResult:
    best_params: HyperParams
    best_score: float
    leaderboard: tuple[LeaderboardEntry, ...]
    disqualified: tuple[DisqualifiedEntry, ...] = ()


def kfold_splits(n: int, k: int) -> list[tuple[list[int], list[int]]]:
    """Contiguous validation blocks covering 0..n-1 exactly once.

    Block sizes differ by at most one, with the remainder going to the
    earliest folds; each train set is the complement of its block.
    """
    if k < 2 or k > n:
        raise ConfigError(f"need 2 <= k <= n, got k={k}, n={n}")
    base, rem = divmod(n, k)
    splits = []
    start = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        val = list(range(start, start + size))
        train = list(range(0, start)) + list(range(start + size, n))
        splits.append((train, val))
        start += size
    return splits


def grid_search(panel, grid: GridSpec, cv: CVConfig, seed: int) -> TuneResult:
    """Evaluate every grid combination by k-fold CV MAPE; no pruning.

    A fold whose validation targets are all zero disqualifies the
    combination (MAPE is undefined there); disqualifications are reported
    alongside the leaderboard.
    """
    combos = grid.combinations()
    if not combos:
        raise ConfigError("grid is empty")
    n = len(panel.years)
    if n < cv.k:
        raise DataError(f"panel has {n} rows, fewer than {cv.k} folds")

    order = list(range(n))
    if cv.shuffled:
        order = list(np.random.Generator(np.random.PCG64(seed)).permutation(n))
    splits = kfold_splits(n, cv.k)

    ranked: list[tuple[float, int, LeaderboardEntry]] = []
    disqualified: list[DisqualifiedEntry] = []
    for combo_idx, params in enumerate(combos):
        fold_scores = []
        reason = None
        for fold_idx, (train_pos, val_pos) in enumerate(splits):
            train_idx = [order[i] for i in train_pos]
            val_idx = [order[i] for i in val_pos]
            actual = panel.target[val_idx]
            if np.all(actual == 0):
                reason = f"fold {fold_idx}: all validation targets are zero"
                break
            model = fit(
                panel.features[train_idx, :],
                panel.target[train_idx],
                panel.feature_codes,
                params,
                seed,
            )
            preds = predict_matrix(model, panel.features[val_idx, :])
            fold_scores.append(mape(actual, preds))
        if reason is not None:
            disqualified.append(DisqualifiedEntry(params, reason))
            continue
        mean_score = float(np.mean(fold_scores))
        entry = LeaderboardEntry(params, mean_score, tuple(fold_scores))
        ranked.append((mean_score, combo_idx, entry))

    if not ranked:
        reasons = "; ".join(sorted({d.reason for d in disqualified}))
        raise DataError(f"every grid combination was disqualified ({reasons})")
    ranked.sort(key=lambda t: (t[0], t[1]))
    leaderboard = tuple(e for _, _, e in ranked)
    return TuneResult(
        best_params=leaderboard[0].params,
        best_score=leaderboard[0].mean_mape,
        leaderboard=leaderboard,
        disqualified=tuple(disqualified),
    )


def leaderboard_csv_rows(result: TuneResult) -> list[list[str]]:
    """Rows for the `rank,params_json,mean_mape,fold_scores_json` export."""
    rows = []
    for rank, entry in enumerate(result.leaderboard, start=1):
        rows.append(
            [
                str(rank),
                json.dumps(entry.params.to_json_dict(), sort_keys=True),
                repr(entry.mean_mape),
                json.dumps(list(entry.fold_mapes)),
            ]
        )
    for entry in result.disqualified:
        rows.append(
            [
                "disqualified",
                json.dumps(entry.params.to_json_dict(), sort_keys=True),
                "",
                json.dumps({"error": entry.reason}),
            ]
        )
    return rows
