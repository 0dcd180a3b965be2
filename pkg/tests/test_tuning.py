import numpy as np
import pytest

from panelboost.data import CountryPanel
from panelboost.errors import ConfigError, DataError
from panelboost.evaluation import mape
from panelboost.gbtree import fit, predict_matrix
from panelboost.tuning import (
    CVConfig,
    GridSpec,
    grid_search,
    kfold_splits,
    leaderboard_csv_rows,
)


class TestKfoldSplits:
    def test_even_partition(self):
        splits = kfold_splits(10, 5)
        assert [val for _, val in splits] == [[0, 1], [2, 3], [4, 5], [6, 7], [8, 9]]

    def test_remainder_to_earliest_folds(self):
        splits = kfold_splits(10, 3)
        assert [len(val) for _, val in splits] == [4, 3, 3]

    def test_partition_property(self):
        for n, k in [(10, 3), (16, 5), (7, 2), (9, 9)]:
            splits = kfold_splits(n, k)
            seen = [i for _, val in splits for i in val]
            assert sorted(seen) == list(range(n))
            for train, val in splits:
                assert sorted(train + val) == list(range(n))

    def test_invalid_k(self):
        with pytest.raises(ConfigError):
            kfold_splits(5, 1)
        with pytest.raises(ConfigError):
            kfold_splits(5, 6)


class TestGridSpec:
    def test_rejects_unknown_field(self):
        with pytest.raises(ConfigError):
            GridSpec({"bogus": [1]})

    def test_rejects_invalid_value(self):
        with pytest.raises(ValueError):
            GridSpec({"learning_rate": [0.0]})

    def test_combination_order_is_lexicographic(self):
        grid = GridSpec({"n_estimators": [1, 2], "max_depth": [3, 5]})
        combos = grid.combinations()
        assert [(c.n_estimators, c.max_depth) for c in combos] == [
            (1, 3), (1, 5), (2, 3), (2, 5),
        ]
        assert grid.size() == 4


class TestGridSearch:
    def cv(self, k=2):
        return CVConfig(k=k)

    def test_singleton_grid(self, small_panel):
        grid = GridSpec({"n_estimators": [5]})
        result = grid_search(small_panel, grid, self.cv(), seed=0)
        assert len(result.leaderboard) == 1
        assert result.best_params.n_estimators == 5
        assert result.best_score == result.leaderboard[0].mean_mape

    def test_exhaustive_includes_degenerate_combo(self, small_panel):
        grid = GridSpec({"n_estimators": [0, 20]})
        result = grid_search(small_panel, grid, self.cv(), seed=0)
        assert len(result.leaderboard) == 2
        by_n = {e.params.n_estimators: e for e in result.leaderboard}
        assert set(by_n) == {0, 20}

    def test_tie_break_earliest_grid_order(self, small_panel):
        # identical models differing only in the ignored scale_pos_weight
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            grid = GridSpec({"scale_pos_weight": [2.0, 1.0], "n_estimators": [5]})
            result = grid_search(small_panel, grid, self.cv(), seed=0)
        assert result.best_params.scale_pos_weight == 2.0  # earlier combo wins the tie

    def test_fold_scores_match_independent_refit(self, small_panel):
        grid = GridSpec({"n_estimators": [8], "max_depth": [2]})
        result = grid_search(small_panel, grid, self.cv(k=3), seed=7)
        entry = result.leaderboard[0]
        splits = kfold_splits(len(small_panel.years), 3)
        train_idx, val_idx = splits[1]
        model = fit(
            small_panel.features[train_idx, :],
            small_panel.target[train_idx],
            small_panel.feature_codes,
            entry.params,
            seed=7,
        )
        expected = mape(
            small_panel.target[val_idx],
            predict_matrix(model, small_panel.features[val_idx, :]),
        )
        assert entry.fold_mapes[1] == pytest.approx(expected, abs=1e-12)

    def test_permuted_grid_same_best_score(self, small_panel):
        g1 = GridSpec({"n_estimators": [2, 5, 9], "max_depth": [1, 3]})
        g2 = GridSpec({"max_depth": [3, 1], "n_estimators": [9, 2, 5]})
        r1 = grid_search(small_panel, g1, self.cv(), seed=3)
        r2 = grid_search(small_panel, g2, self.cv(), seed=3)
        assert r1.best_score == pytest.approx(r2.best_score, abs=0)

    def test_determinism(self, small_panel):
        grid = GridSpec({"n_estimators": [3, 6], "subsample": [0.8]})
        r1 = grid_search(small_panel, grid, self.cv(), seed=5)
        r2 = grid_search(small_panel, grid, self.cv(), seed=5)
        assert r1 == r2

    def test_zero_actual_fold_disqualifies(self):
        target = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0])
        panel = CountryPanel(
            country="Z",
            years=list(range(2008, 2016)),
            target=target,
            features=np.arange(8.0).reshape(8, 1),
            feature_codes=["f"],
        )
        grid = GridSpec({"n_estimators": [1]})
        with pytest.raises(DataError, match="disqualified"):
            grid_search(panel, grid, CVConfig(k=2), seed=0)

    def test_disqualification_names_the_fold(self):
        # the all-zero condition depends only on the fold targets, so every
        # combo is disqualified together and the error names the fold
        target = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0])
        panel = CountryPanel(
            country="Z",
            years=list(range(2008, 2016)),
            target=target,
            features=np.arange(8.0).reshape(8, 1),
            feature_codes=["f"],
        )
        grid = GridSpec({"n_estimators": [1, 2]})
        with pytest.raises(DataError, match="zero"):
            grid_search(panel, grid, CVConfig(k=2), seed=0)

    def test_leaderboard_csv_rows_shape(self, small_panel):
        grid = GridSpec({"n_estimators": [3, 6]})
        result = grid_search(small_panel, grid, self.cv(), seed=1)
        rows = leaderboard_csv_rows(result)
        assert len(rows) == 2
        assert rows[0][0] == "1"
