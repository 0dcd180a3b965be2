"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class DistanceRequest(BaseModel):
    a: list[float]
    b: list[float]
    epsilon: float = Field(gt=0)


class DistanceResponse(BaseModel):
    distance: int


class RankRequest(BaseModel):
    target: list[float]
    candidates: dict[str, list[float]]
    epsilon: float = Field(default=0.25, gt=0)
    k: int | None = Field(default=None, ge=1)


class RankEntryOut(BaseModel):
    indicator_code: str
    distance: int
    rank: int


class RankResponse(BaseModel):
    entries: list[RankEntryOut]


class HyperParamsIn(BaseModel):
    n_estimators: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_child_weight: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    colsample_bylevel: float = 1.0
    reg_lambda: float = Field(default=1.0, alias="lambda")
    reg_alpha: float = Field(default=0.0, alias="alpha")
    scale_pos_weight: float = 1.0

    model_config = {"populate_by_name": True}


class TrainRequest(BaseModel):
    target: list[float]
    features: list[list[float | None]]
    feature_codes: list[str]
    hyperparams: HyperParamsIn = HyperParamsIn()
    seed: int = Field(default=0, ge=0, lt=2**64)


class TrainResponse(BaseModel):
    model: dict  # versioned model document, as written to model files


class PredictRequest(BaseModel):
    model: dict
    rows: list[list[float | None]]


class PredictResponse(BaseModel):
    predictions: list[float]


class MapeRequest(BaseModel):
    actual: list[float]
    forecast: list[float]


class MapeResponse(BaseModel):
    mape: float


class PanelIn(BaseModel):
    country: str
    years: list[int]
    target: list[float]
    feature_codes: list[str]
    features: list[list[float | None]]


class ForecastRequest(BaseModel):
    model: dict
    panel: PanelIn
    horizon: int = Field(default=5, ge=0)
    trend_window: int = Field(default=8, ge=2)


class ForecastResponse(BaseModel):
    country: str
    years: list[int]
    predictions: list[float]
    method: str
