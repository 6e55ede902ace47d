"""HTTP API over fitted engines: upload/fit, inspect, recommend.

Error contract: 400 malformed body (with field-level messages), 404 unknown
engine, 422 dimension or weight-validity errors, 500 for anything internal
(without leaking details). Successful bodies are canonical JSON and are
byte-identical across identical requests with the same seed.
"""

from __future__ import annotations

import json
import secrets
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from ..data import load_dataset
from ..engine import EngineConfig, fit_engine, recommend, recommend_batch
from ..errors import PTSelectError, SchemaMismatch, BadValue
from ..jsonio import canonical_bytes, canonical_json, digest
from .schemas import RecommendBatchRequest, RecommendRequest
from .store import EngineStore

__all__ = ["create_app"]


def _json_response(payload: dict, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload) + "\n",
        status_code=status_code,
        media_type="application/json",
    )


def _error(status: int, message: str, details=None) -> Response:
    body = {"error": message}
    if details is not None:
        body["details"] = details
    return _json_response(body, status_code=status)


def _metadata(engine_id: str, engine) -> dict:
    return {
        "schema": "ptselect.engine_meta/1",
        "engine_id": engine_id,
        "J": engine.J,
        "K": engine.K,
        "r": engine.r,
        "responses": [
            {"name": s.name, "kind": s.kind, "transform": s.transform} for s in engine.specs
        ],
        "covariate_names": list(engine.covariate_names),
        "arm_names": list(engine.arm_names),
        "n_per_arm": list(engine.n_per_arm),
        "diagnostics": engine.diagnostics(),
    }


def create_app(store: EngineStore | None = None) -> FastAPI:
    store = store if store is not None else EngineStore()
    app = FastAPI(title="ptselect", version="0.1.0")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_req: Request, exc: RequestValidationError):
        details = [
            {"loc": [str(p) for p in err.get("loc", [])], "msg": err.get("msg", "")}
            for err in exc.errors()
        ]
        return _error(400, "malformed request body", details)

    @app.exception_handler(Exception)
    async def internal(_req: Request, _exc: Exception):
        return _error(500, "internal error")

    @app.get("/engines")
    def list_engines():
        return _json_response({"schema": "ptselect.engine_list/1", "engines": store.ids()})

    @app.post("/engines")
    def upload_engine(
        data: UploadFile = File(...),
        manifest: UploadFile = File(...),
        config: str | None = Form(None),
    ):
        data_bytes = data.file.read()
        manifest_bytes = manifest.file.read()
        try:
            cfg_dict = json.loads(config) if config else {}
            engine_config = EngineConfig.from_dict(cfg_dict) if cfg_dict else EngineConfig()
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            return _error(400, f"bad config: {exc}")
        engine_id = digest(
            data_bytes, manifest_bytes, canonical_bytes(engine_config.to_dict())
        )
        if store.get(engine_id) is None:
            with tempfile.TemporaryDirectory() as tmp:
                dpath = Path(tmp) / "data.csv"
                mpath = Path(tmp) / "data.manifest.json"
                dpath.write_bytes(data_bytes)
                mpath.write_bytes(manifest_bytes)
                try:
                    dataset = load_dataset(dpath, mpath)
                    engine = fit_engine(dataset, config=engine_config)
                except (SchemaMismatch, BadValue) as exc:
                    return _error(400, str(exc))
                except PTSelectError as exc:
                    return _error(422, str(exc))
            store.put(engine_id, engine)
        return _json_response(
            {"schema": "ptselect.engine_created/1", "engine_id": engine_id}, status_code=201
        )

    @app.get("/engines/{engine_id}")
    def engine_meta(engine_id: str):
        engine = store.get(engine_id)
        if engine is None:
            return _error(404, f"unknown engine {engine_id!r}")
        return _json_response(_metadata(engine_id, engine))

    @app.post("/engines/{engine_id}/recommend")
    def engine_recommend(engine_id: str, req: RecommendRequest):
        engine = store.get(engine_id)
        if engine is None:
            return _error(404, f"unknown engine {engine_id!r}")
        seed = req.seed if req.seed is not None else secrets.randbits(31)
        try:
            rec = recommend(engine, req.covariates, req.weights, rho=req.rho, seed=seed)
        except ValueError as exc:
            return _error(422, str(exc))
        doc = rec.to_dict()
        doc["engine_id"] = engine_id
        return _json_response(doc)

    @app.post("/engines/{engine_id}/recommend-batch")
    def engine_recommend_batch(engine_id: str, req: RecommendBatchRequest):
        engine = store.get(engine_id)
        if engine is None:
            return _error(404, f"unknown engine {engine_id!r}")
        seed = req.seed if req.seed is not None else secrets.randbits(31)
        try:
            rows = np.asarray(req.rows, dtype=float)
        except ValueError:
            return _error(422, f"rows must be a rectangular m x {engine.r} array")
        if rows.ndim != 2 or (rows.size and rows.shape[1] != engine.r):
            return _error(422, f"rows must be m x {engine.r}")
        try:
            results = recommend_batch(engine, rows, req.weights, rho=req.rho, seed=seed)
        except ValueError as exc:
            return _error(422, str(exc))
        items = [
            res.to_dict() | {"engine_id": engine_id} if hasattr(res, "to_dict") else res
            for res in results
        ]
        return _json_response(
            {"schema": "ptselect.recommendation_batch/1", "engine_id": engine_id, "seed": seed, "results": items}
        )

    return app
