"""Hard-voting ensemble over the forest, MLP and linear SVC models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forest import RandomForestConfig, RandomForestModel
from .mlp import MlpConfig, MlpModel
from .svc import LinearSvcConfig, LinearSvcModel

__all__ = ["VotingConfig", "VotingModel", "vote_predict"]


@dataclass(frozen=True)
class VotingConfig:
    rf: RandomForestConfig = field(default_factory=RandomForestConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    svc: LinearSvcConfig = field(default_factory=LinearSvcConfig)
    strategy: str = "hard"

    def __post_init__(self) -> None:
        if self.strategy != "hard":
            raise ValueError("only hard voting is supported")


def vote_predict(models, X: np.ndarray) -> np.ndarray:
    """Majority label over exactly three binary voters (a tie is impossible)."""
    if len(models) != 3:
        raise ValueError(f"hard voting requires exactly 3 models, got {len(models)}")
    votes = sum(model.predict(X) for model in models)
    return (votes >= 2).astype(np.int64)


class VotingModel:
    kind = "vc"
    display_name = "VC"

    def __init__(self, config: VotingConfig | None = None):
        self.config = config or VotingConfig()
        self.models: tuple = ()
        self.metadata: dict = {}

    def fit(self, X: np.ndarray, y: np.ndarray) -> "VotingModel":
        rf = RandomForestModel(self.config.rf).fit(X, y)
        mlp = MlpModel(self.config.mlp).fit(X, y)
        svc = LinearSvcModel(self.config.svc).fit(X, y)
        self.models = (rf, mlp, svc)
        self.metadata = {"members": [m.kind for m in self.models]}
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.models:
            raise RuntimeError("model is not fitted")
        return vote_predict(self.models, X)
