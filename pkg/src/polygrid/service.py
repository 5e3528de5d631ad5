"""Prediction and explanation HTTP service for the interactive viewer.

The service loads one fitted instance at startup and keeps it immutable;
every request is stateless. Scores arrive either pre-scaled (unit
hypercube) or in the instrument's native units, in which case the
dataset manifest's scaling maxima are applied, including the epsilon
shift for zero scores.

Endpoints: GET /model (instance metadata), POST /predict (prediction plus
diagram document), GET /healthz.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .core import PolygridInstance, predict
from .diagram import build_diagram


def _error(status: int, message: str, fields: dict | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": message, "fields": fields or {}},
    )


def scale_scores(instance: PolygridInstance, raw: list[float]) -> tuple[np.ndarray, dict]:
    """Native-unit scores to the unit hypercube, using the fit manifest."""
    manifest = instance.dataset_manifest or {}
    maxima = manifest.get("scaling_maxima")
    if maxima is None:
        raise ValueError("instance carries no scaling maxima; send scaled scores")
    epsilon = manifest.get("epsilon", 1e-6)
    errors = {}
    scaled = []
    for k, (value, mx) in enumerate(zip(raw, maxima)):
        if value < 0:
            errors[f"scores[{k}]"] = f"negative score {value}"
            scaled.append(0.0)
            continue
        s = value / mx
        if s == 0.0:
            s = epsilon
        if s > 1.0:
            errors[f"scores[{k}]"] = (
                f"score {value} above the recorded maximum {mx}"
            )
        scaled.append(s)
    return np.array(scaled), errors


def create_app(instance: PolygridInstance) -> FastAPI:
    app = FastAPI(title="polygrid service")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/model")
    def model():
        manifest = instance.dataset_manifest or {}
        return {
            "task": instance.task,
            "config": instance.config.to_dict(),
            "config_tag": instance.config.short_label(),
            "domain_names": instance.domain_names,
            "label_names": instance.label_names,
            "thresholds": [
                None if not np.isfinite(t) else float(t) for t in instance.thresholds
            ],
            "size": instance.size(),
            "scaling_maxima": manifest.get("scaling_maxima"),
            "ranges": manifest.get("ranges"),
            "epsilon": manifest.get("epsilon", 1e-6),
        }

    @app.post("/predict")
    async def predict_endpoint(body: dict):
        scores = body.get("scores")
        scaled_flag = bool(body.get("scaled", False))
        if scores is None or not isinstance(scores, list):
            return _error(400, "body must carry a 'scores' list", {"scores": "missing"})
        if len(scores) != instance.d:
            return _error(
                422,
                f"expected {instance.d} scores, got {len(scores)}",
                {"scores": f"length {len(scores)}"},
            )
        try:
            values = [float(v) for v in scores]
        except (TypeError, ValueError):
            return _error(400, "scores must be numeric", {"scores": "non-numeric"})
        if any(not np.isfinite(v) for v in values):
            return _error(400, "scores must be finite", {"scores": "non-finite"})

        if scaled_flag:
            x = np.array(values)
        else:
            try:
                x, field_errors = scale_scores(instance, values)
            except ValueError as exc:
                return _error(400, str(exc))
            if field_errors:
                return _error(400, "scores out of the instrument's range", field_errors)

        bad = {
            f"scores[{k}]": f"scaled score {v} outside (0, 1]"
            for k, v in enumerate(x)
            if v <= 0.0 or v > 1.0
        }
        if bad:
            return _error(
                400,
                "scaled scores must be strictly positive and at most 1",
                bad,
            )

        pred = predict(instance, x)
        dm = build_diagram(instance, x[np.newaxis, :], [pred])
        return {
            "prediction": {
                "scores": [float(v) for v in pred.scores],
                "labels": [int(v) for v in pred.labels],
                "label_names": [
                    instance.label_names[j]
                    for j in range(instance.n_labels)
                    if pred.labels[j] == 1
                ],
                "ranking": None if pred.ranking is None else [int(v) for v in pred.ranking],
                "area": pred.area,
            },
            "diagram": dm.to_dict(),
        }

    return app


def serve(instance: PolygridInstance, host: str = "127.0.0.1", port: int = 8008):
    import uvicorn

    uvicorn.run(create_app(instance), host=host, port=port)
