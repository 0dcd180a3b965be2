import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from panelboost.gbtree import HyperParams, fit, serialize_model
from panelboost.service import app

client = TestClient(app)


def trained_model_doc(seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.normal(0, 1, size=(12, 2))
    y = 2.0 + X[:, 0] + 0.1 * rng.normal(0, 1, 12)
    model = fit(X, y, ["a", "b"], HyperParams(n_estimators=5), seed)
    return json.loads(serialize_model(model)), model


class TestHealth:
    def test_ok(self):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"


class TestDistance:
    def test_basic(self):
        r = client.post(
            "/edr/distance",
            json={"a": [0.0, 1.0, 2.0], "b": [0.0, 1.4, 2.0], "epsilon": 0.25},
        )
        assert r.status_code == 200
        assert r.json() == {"distance": 1}

    def test_rejects_bad_epsilon(self):
        r = client.post("/edr/distance", json={"a": [1.0], "b": [1.0], "epsilon": 0})
        assert r.status_code == 422


class TestRank:
    def test_rank(self):
        target = [0.0, 1.0, -1.0]
        r = client.post(
            "/edr/rank",
            json={
                "target": target,
                "candidates": {"A": target, "B": [9.0, 9.0, 9.0]},
                "k": 1,
            },
        )
        assert r.status_code == 200
        assert r.json()["entries"] == [
            {"indicator_code": "A", "distance": 0, "rank": 1}
        ]

    def test_length_mismatch_400(self):
        r = client.post(
            "/edr/rank", json={"target": [1.0, 2.0], "candidates": {"A": [1.0]}}
        )
        assert r.status_code == 400


class TestTrainPredict:
    def test_roundtrip_through_endpoints(self):
        rng = np.random.Generator(np.random.PCG64(1))
        X = rng.normal(0, 1, size=(10, 2)).tolist()
        y = [2.0 + row[0] for row in X]
        r = client.post(
            "/models/train",
            json={
                "target": y,
                "features": X,
                "feature_codes": ["a", "b"],
                "hyperparams": {"n_estimators": 4, "lambda": 0.5},
                "seed": 3,
            },
        )
        assert r.status_code == 200
        doc = r.json()["model"]
        assert doc["version"] == 1
        assert doc["hyperparams"]["lambda"] == 0.5

        r2 = client.post("/models/predict", json={"model": doc, "rows": X})
        assert r2.status_code == 200
        assert len(r2.json()["predictions"]) == 10

    def test_missing_cells_accepted(self):
        doc, model = trained_model_doc()
        r = client.post("/models/predict", json={"model": doc, "rows": [[None, None]]})
        assert r.status_code == 200
        assert np.isfinite(r.json()["predictions"][0])

    def test_corrupt_model_400(self):
        r = client.post("/models/predict", json={"model": {"version": 1}, "rows": [[1.0]]})
        assert r.status_code == 400


class TestMape:
    def test_value(self):
        r = client.post("/metrics/mape", json={"actual": [100, 200], "forecast": [110, 190]})
        assert r.status_code == 200
        assert r.json()["mape"] == pytest.approx(7.5)

    def test_zero_actual_400(self):
        r = client.post("/metrics/mape", json={"actual": [0.0], "forecast": [1.0]})
        assert r.status_code == 400


class TestForecast:
    def test_five_year_horizon(self):
        doc, model = trained_model_doc()
        rng = np.random.Generator(np.random.PCG64(2))
        years = list(range(2008, 2024))
        features = rng.normal(0, 1, size=(16, 2)).tolist()
        r = client.post(
            "/forecast",
            json={
                "model": doc,
                "panel": {
                    "country": "AAA",
                    "years": years,
                    "target": [2.5] * 16,
                    "feature_codes": ["a", "b"],
                    "features": features,
                },
                "horizon": 5,
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["years"] == [2024, 2025, 2026, 2027, 2028]
        assert len(body["predictions"]) == 5
        assert body["method"] == "ols_trend_m8"

    def test_feature_mismatch_400(self):
        doc, _ = trained_model_doc()
        r = client.post(
            "/forecast",
            json={
                "model": doc,
                "panel": {
                    "country": "AAA",
                    "years": [2008, 2009],
                    "target": [1.0, 2.0],
                    "feature_codes": ["x"],
                    "features": [[1.0], [2.0]],
                },
            },
        )
        assert r.status_code == 400
