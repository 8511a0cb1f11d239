"""From-scratch classifiers sharing a fit/predict interface.

All models are deterministic given (X, y, config): identical seeds give
identical parameters and predictions. Class encoding is 0 = Not Useful,
1 = Useful throughout.
"""

from __future__ import annotations

import dataclasses

from .forest import RandomForestConfig, RandomForestModel
from .mlp import MlpConfig, MlpModel, NonFiniteLoss, loss_and_gradients
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .svc import LinearSvcConfig, LinearSvcModel
from .tree import DecisionTree, EmptyNode, gini_impurity, train_tree
from .voting import VotingConfig, VotingModel, vote_predict

__all__ = [
    "RandomForestConfig",
    "RandomForestModel",
    "MlpConfig",
    "MlpModel",
    "NonFiniteLoss",
    "loss_and_gradients",
    "LinearSvcConfig",
    "LinearSvcModel",
    "VotingConfig",
    "VotingModel",
    "vote_predict",
    "DecisionTree",
    "EmptyNode",
    "gini_impurity",
    "train_tree",
    "MODEL_KINDS",
    "build_model",
    "default_config",
    "config_with_seed",
    "load_model",
    "save_model",
    "model_to_dict",
    "model_from_dict",
]

MODEL_KINDS = {
    "rf": (RandomForestModel, RandomForestConfig),
    "nn": (MlpModel, MlpConfig),
    "svc": (LinearSvcModel, LinearSvcConfig),
    "vc": (VotingModel, VotingConfig),
}


def default_config(kind: str):
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    return MODEL_KINDS[kind][1]()


def build_model(config):
    """Instantiate the model class matching a config dataclass."""
    for model_cls, config_cls in MODEL_KINDS.values():
        if isinstance(config, config_cls):
            return model_cls(config)
    raise TypeError(f"no model registered for config {type(config).__name__}")


def config_with_seed(config, seed: int):
    """Copy of a config with all rng seeds set (recursing into voting members)."""
    if isinstance(config, VotingConfig):
        return dataclasses.replace(
            config,
            rf=dataclasses.replace(config.rf, rng_seed=seed),
            mlp=dataclasses.replace(config.mlp, rng_seed=seed),
            svc=dataclasses.replace(config.svc, rng_seed=seed),
        )
    return dataclasses.replace(config, rng_seed=seed)
