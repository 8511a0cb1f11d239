"""Versioned JSON serialization for trained models.

Every payload echoes the model's config and seed so an evaluation can be
replayed from the artifact alone. Trees serialize as nested nodes, MLP
layers as row-major weight arrays, the SVC as weight vector + intercept.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .forest import RandomForestConfig, RandomForestModel
from .mlp import MlpConfig, MlpModel
from .svc import LinearSvcConfig, LinearSvcModel
from .tree import DecisionTree
from .voting import VotingConfig, VotingModel

__all__ = ["SCHEMA", "model_to_dict", "model_from_dict", "save_model", "load_model"]

SCHEMA = "ccq-model/1"


def _config_to_dict(config) -> dict:
    return dataclasses.asdict(config)


def _voting_config_from_dict(payload: dict) -> VotingConfig:
    return VotingConfig(
        rf=RandomForestConfig(**payload["rf"]),
        mlp=_mlp_config_from_dict(payload["mlp"]),
        svc=LinearSvcConfig(**payload["svc"]),
        strategy=payload.get("strategy", "hard"),
    )


def _mlp_config_from_dict(payload: dict) -> MlpConfig:
    payload = dict(payload)
    payload["hidden_sizes"] = tuple(payload["hidden_sizes"])
    return MlpConfig(**payload)


def model_to_dict(model) -> dict:
    base = {
        "schema": SCHEMA,
        "kind": model.kind,
        "config": _config_to_dict(model.config),
        "metadata": model.metadata,
    }
    if isinstance(model, RandomForestModel):
        base["params"] = {"trees": [tree.to_dict() for tree in model.trees]}
    elif isinstance(model, MlpModel):
        base["params"] = {
            "weights": [W.tolist() for W in model.weights],
            "biases": [b.tolist() for b in model.biases],
        }
    elif isinstance(model, LinearSvcModel):
        base["params"] = {
            "weights": model.weights.tolist(),
            "intercept": model.intercept,
        }
    elif isinstance(model, VotingModel):
        base["params"] = {"members": [model_to_dict(m) for m in model.models]}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return base


def model_from_dict(payload: dict):
    if payload.get("schema") != SCHEMA:
        raise ValueError(f"unsupported model schema {payload.get('schema')!r}")
    kind = payload["kind"]
    config = payload["config"]
    params = payload["params"]
    if kind == "rf":
        model = RandomForestModel(RandomForestConfig(**config))
        model.trees = tuple(DecisionTree.from_dict(t) for t in params["trees"])
    elif kind == "nn":
        model = MlpModel(_mlp_config_from_dict(config))
        model.weights = [np.asarray(W, dtype=np.float64) for W in params["weights"]]
        model.biases = [np.asarray(b, dtype=np.float64) for b in params["biases"]]
    elif kind == "svc":
        model = LinearSvcModel(LinearSvcConfig(**config))
        model.weights = np.asarray(params["weights"], dtype=np.float64)
        model.intercept = float(params["intercept"])
    elif kind == "vc":
        model = VotingModel(_voting_config_from_dict(config))
        model.models = tuple(model_from_dict(m) for m in params["members"])
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    model.metadata = payload.get("metadata", {})
    return model


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
