"""Versioned, self-describing engine archive.

The archive is canonical JSON holding every fitted component (index models,
mean surfaces, censoring models, weight tables) plus the originating config
and its hash. Loading refuses any schema version it does not understand, and
a save/load round trip is bit-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .condmeans import MeanSurface
from .data import ResponseSpec
from .engine import EngineConfig, FittedEngine
from .errors import SchemaMismatch
from .jsonio import canonical_bytes, canonical_json, digest
from .singleindex import SimFit
from .survival import CensoringModel, WeightTable

__all__ = ["save_engine", "load_engine", "engine_to_dict", "engine_from_dict", "ENGINE_SCHEMA"]

ENGINE_SCHEMA = "ptselect.engine/1"


def _arr(a) -> list:
    return np.asarray(a).tolist()


def _fit_to_dict(f: SimFit) -> dict:
    return {
        "beta": _arr(f.beta),
        "bandwidth": f.bandwidth,
        "train_index": _arr(f.train_index),
        "train_y": _arr(f.train_y),
        "train_weights": _arr(f.train_weights),
        "train_events": _arr(f.train_events.astype(int)),
        "objective_value": f.objective_value,
        # a restart that never found a finite value is stored as null
        "restart_objectives": [v if np.isfinite(v) else None for v in f.restart_objectives],
        "censored_mode": f.censored_mode,
    }


def _fit_from_dict(d: dict) -> SimFit:
    return SimFit(
        beta=np.array(d["beta"], dtype=float),
        bandwidth=float(d["bandwidth"]),
        train_index=np.array(d["train_index"], dtype=float),
        train_y=np.array(d["train_y"], dtype=float),
        train_weights=np.array(d["train_weights"], dtype=float),
        train_events=np.array(d["train_events"], dtype=bool),
        objective_value=float(d["objective_value"]),
        restart_objectives=tuple(
            float(v) if v is not None else float("inf") for v in d["restart_objectives"]
        ),
        censored_mode=bool(d["censored_mode"]),
    )


def _surface_to_dict(s: MeanSurface) -> dict:
    return {
        "response": s.response,
        "arm": s.arm,
        "scores": _arr(s.scores),
        "labels": _arr(s.labels),
        "values": _arr(s.values),
        "weights": _arr(s.weights),
        "events": _arr(s.events.astype(int)),
        "bandwidth": s.bandwidth,
        "censored_mode": s.censored_mode,
    }


def _surface_from_dict(d: dict) -> MeanSurface:
    return MeanSurface(
        response=int(d["response"]),
        arm=int(d["arm"]),
        scores=np.array(d["scores"], dtype=float),
        labels=np.array(d["labels"], dtype=int),
        values=np.array(d["values"], dtype=float),
        weights=np.array(d["weights"], dtype=float),
        events=np.array(d["events"], dtype=bool),
        bandwidth=float(d["bandwidth"]),
        censored_mode=bool(d["censored_mode"]),
    )


def _censoring_to_dict(cm: CensoringModel, wt: WeightTable) -> dict:
    return {
        "jump_times": _arr(cm.jump_times),
        "increments": _arr(cm.increments),
        "design_at_fit": _arr(cm.design_at_fit),
        "rank_deficient": list(cm.rank_deficient),
        "weights": _arr(wt.weights),
        "floor_applied": _arr(wt.floor_applied.astype(int)),
        "floor": wt.floor,
    }


def _censoring_from_dict(d: dict) -> tuple[CensoringModel, WeightTable]:
    design = np.array(d["design_at_fit"], dtype=float)
    increments = np.array(d["increments"], dtype=float)
    if increments.size == 0:
        increments = np.zeros((0, design.shape[1] if design.ndim == 2 else 0))
    cm = CensoringModel(
        jump_times=np.array(d["jump_times"], dtype=float),
        increments=increments,
        design_at_fit=design,
        rank_deficient=tuple(d["rank_deficient"]),
    )
    wt = WeightTable(
        weights=np.array(d["weights"], dtype=float),
        floor_applied=np.array(d["floor_applied"], dtype=bool),
        floor=float(d["floor"]),
    )
    return cm, wt


def engine_to_dict(engine: FittedEngine) -> dict:
    config = engine.config.to_dict()
    return {
        "schema": ENGINE_SCHEMA,
        "config": config,
        "config_hash": digest(canonical_bytes(config)),
        "responses": [
            {"name": s.name, "kind": s.kind, "transform": s.transform} for s in engine.specs
        ],
        "covariate_names": list(engine.covariate_names),
        "arm_names": list(engine.arm_names),
        "n_per_arm": list(engine.n_per_arm),
        "fits": [[_fit_to_dict(f) for f in row] for row in engine.fits],
        "surfaces": [[_surface_to_dict(s) for s in row] for row in engine.surfaces],
        "censoring": {
            str(j): [_censoring_to_dict(cm, wt) for cm, wt in pairs]
            for j, pairs in engine.censoring.items()
        },
    }


def engine_from_dict(doc: dict) -> FittedEngine:
    if doc.get("schema") != ENGINE_SCHEMA:
        raise SchemaMismatch(
            f"engine archive schema {doc.get('schema')!r} is not {ENGINE_SCHEMA!r}"
        )
    specs = tuple(
        ResponseSpec(name=e["name"], kind=e["kind"], transform=e["transform"])
        for e in doc["responses"]
    )
    return FittedEngine(
        specs=specs,
        config=EngineConfig.from_dict(doc["config"]),
        fits=tuple(tuple(_fit_from_dict(f) for f in row) for row in doc["fits"]),
        surfaces=tuple(tuple(_surface_from_dict(s) for s in row) for row in doc["surfaces"]),
        censoring={
            int(j): tuple(_censoring_from_dict(e) for e in pairs)
            for j, pairs in doc["censoring"].items()
        },
        covariate_names=tuple(doc["covariate_names"]),
        arm_names=tuple(doc["arm_names"]),
        n_per_arm=tuple(doc["n_per_arm"]),
    )


def save_engine(engine: FittedEngine, path) -> None:
    Path(path).write_text(canonical_json(engine_to_dict(engine)) + "\n")


def load_engine(path) -> FittedEngine:
    import json

    doc = json.loads(Path(path).read_text())
    return engine_from_dict(doc)
