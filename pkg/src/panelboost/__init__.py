"""panelboost: panel-data forecasting with similarity-ranked predictors
and gradient-boosted regression trees."""

__version__ = "0.1.0"

from .data import CountryPanel, IndicatorSeries, NormStats  # noqa: F401
from .edr import EdrParams, FeatureRanking, edr_distance, rank_features  # noqa: F401
from .errors import ConfigError, DataError, ModelFormatError, PanelboostError  # noqa: F401
from .evaluation import BacktestReport, ForecastResult, backtest, forecast, mape  # noqa: F401
from .gbtree import (  # noqa: F401
    BoostedModel,
    HyperParams,
    RegressionTree,
    deserialize_model,
    fit,
    fit_panel,
    predict,
    serialize_model,
)
from .tuning import CVConfig, GridSpec, TuneResult, grid_search, kfold_splits  # noqa: F401
