"""FastAPI service exposing the core operations over HTTP.

Stateless compute endpoints: sequence distance and ranking, model
training and prediction (models travel as their JSON documents), MAPE,
and horizon forecasting. Run with:

    uvicorn panelboost.service:app
"""

from __future__ import annotations

import json
import math

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__, schemas
from .data import CountryPanel
from .edr import EdrParams, edr_distance, rank_features
from .errors import DataError, ModelFormatError
from .evaluation import forecast, mape
from .gbtree import HyperParams, deserialize_model, fit, predict, serialize_model

app = FastAPI(title="panelboost", version=__version__)


def _nan_matrix(rows: list[list[float | None]]) -> np.ndarray:
    return np.array(
        [[math.nan if v is None else float(v) for v in row] for row in rows],
        dtype=float,
    )


def _model_from_doc(doc: dict):
    try:
        return deserialize_model(json.dumps(doc))
    except ModelFormatError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/edr/distance", response_model=schemas.DistanceResponse)
def distance(req: schemas.DistanceRequest):
    return schemas.DistanceResponse(distance=edr_distance(req.a, req.b, req.epsilon))


@app.post("/edr/rank", response_model=schemas.RankResponse)
def rank(req: schemas.RankRequest):
    try:
        ranking = rank_features(
            req.target, req.candidates, EdrParams(req.epsilon), k=req.k
        )
    except (DataError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return schemas.RankResponse(
        entries=[
            schemas.RankEntryOut(
                indicator_code=e.indicator_code, distance=e.distance, rank=e.rank
            )
            for e in ranking.entries
        ]
    )


@app.post("/models/train", response_model=schemas.TrainResponse)
def train(req: schemas.TrainRequest):
    try:
        params = HyperParams(**req.hyperparams.model_dump())
        model = fit(
            _nan_matrix(req.features),
            np.array(req.target, dtype=float),
            req.feature_codes,
            params,
            req.seed,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return schemas.TrainResponse(model=json.loads(serialize_model(model)))


@app.post("/models/predict", response_model=schemas.PredictResponse)
def predict_rows(req: schemas.PredictRequest):
    model = _model_from_doc(req.model)
    X = _nan_matrix(req.rows)
    try:
        preds = [predict(model, X[i]) for i in range(X.shape[0])]
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return schemas.PredictResponse(predictions=preds)


@app.post("/metrics/mape", response_model=schemas.MapeResponse)
def mape_endpoint(req: schemas.MapeRequest):
    try:
        return schemas.MapeResponse(mape=mape(req.actual, req.forecast))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/forecast", response_model=schemas.ForecastResponse)
def forecast_endpoint(req: schemas.ForecastRequest):
    model = _model_from_doc(req.model)
    try:
        panel = CountryPanel(
            country=req.panel.country,
            years=req.panel.years,
            target=np.array(req.panel.target, dtype=float),
            features=_nan_matrix(req.panel.features).reshape(
                len(req.panel.years), len(req.panel.feature_codes)
            ),
            feature_codes=req.panel.feature_codes,
        )
        result = forecast(model, panel, req.horizon, req.trend_window)
    except (DataError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return schemas.ForecastResponse(
        country=result.country,
        years=list(result.horizon_years),
        predictions=list(result.predictions),
        method=result.method,
    )
