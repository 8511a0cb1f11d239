"""Two-hidden-layer perceptron trained with minibatch Adam.

Architecture is d -> hidden sizes -> 1 with ReLU hidden activations and
a sigmoid output; the loss is binary cross-entropy plus an L2 penalty
``alpha/2 * sum(||W||^2)`` on weights (never biases). Weights start from
He-uniform initialization; training shuffles each epoch and stops early
once the epoch loss has improved by less than ``tol`` for
``n_iter_no_change`` consecutive epochs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

__all__ = ["MlpConfig", "MlpModel", "NonFiniteLoss", "loss_and_gradients"]

log = logging.getLogger(__name__)

_warned_momentum = False


class NonFiniteLoss(RuntimeError):
    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"training loss became non-finite at epoch {epoch}")


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple[int, ...] = (20, 10)
    activation: str = "relu"
    solver: str = "adam"
    alpha: float = 1e-4
    learning_rate: float = 1e-3
    learning_rate_schedule: str = "constant"
    max_iter: int = 200
    shuffle: bool = True
    tol: float = 1e-4
    # Momentum settings only apply to an SGD solver; they are accepted for
    # config compatibility and ignored (with a warning) under adam.
    momentum: float = 0.9
    nesterovs_momentum: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int | None = None  # None -> min(200, n)
    n_iter_no_change: int = 10
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("all hidden sizes must be >= 1")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must be in (0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be > 0")
        if self.activation != "relu":
            raise ValueError("only relu activation is supported")
        if self.solver != "adam":
            raise ValueError("only the adam solver is supported")
        if self.learning_rate_schedule != "constant":
            raise ValueError("only a constant learning rate is supported")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be >= 0")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


def loss_and_gradients(weights, biases, X, y, alpha):
    """Batch BCE-with-logits loss plus L2 penalty, and its gradients.

    Returns (loss, weight_grads, bias_grads). The loss is averaged over
    the batch; the penalty term ``alpha/2 * sum(||W||^2)`` is not.
    """
    B = X.shape[0]
    activations = [X]
    zs = []
    a = X
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        zs.append(z)
        a = np.maximum(z, 0.0) if i < len(weights) - 1 else z
        activations.append(a)
    logits = zs[-1][:, 0]
    # Numerically stable BCE with logits.
    bce = np.maximum(logits, 0.0) - logits * y + np.log1p(np.exp(-np.abs(logits)))
    penalty = 0.5 * alpha * sum(float(np.sum(W * W)) for W in weights)
    loss = float(np.mean(bce)) + penalty

    weight_grads = [None] * len(weights)
    bias_grads = [None] * len(biases)
    delta = (_sigmoid(logits) - y)[:, None] / B
    for i in range(len(weights) - 1, -1, -1):
        weight_grads[i] = activations[i].T @ delta + alpha * weights[i]
        bias_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (zs[i - 1] > 0)
    return loss, weight_grads, bias_grads


class MlpModel:
    kind = "nn"
    display_name = "NN"

    def __init__(self, config: MlpConfig | None = None):
        self.config = config or MlpConfig()
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        self.metadata: dict = {}

    def _init_params(self, n_features: int, rng: np.random.Generator) -> None:
        sizes = (n_features, *self.config.hidden_sizes, 1)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def fit(self, X: np.ndarray, y: np.ndarray) -> "MlpModel":
        global _warned_momentum
        cfg = self.config
        if not _warned_momentum and cfg.momentum is not None:
            log.warning("momentum/nesterov settings are ignored by the adam solver")
            _warned_momentum = True

        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = X.shape[0]
        rng = np.random.default_rng(cfg.rng_seed)
        self._init_params(X.shape[1], rng)

        batch_size = cfg.batch_size if cfg.batch_size is not None else min(200, n)
        batch_size = max(1, min(batch_size, n))

        params = self.weights + self.biases
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        t = 0

        best_loss = np.inf
        no_improve = 0
        epochs_run = 0
        loss_curve: list[float] = []
        for epoch in range(cfg.max_iter):
            order = rng.permutation(n) if cfg.shuffle else np.arange(n)
            epoch_loss = 0.0
            for start in range(0, n, batch_size):
                batch = order[start : start + batch_size]
                loss, w_grads, b_grads = loss_and_gradients(
                    self.weights, self.biases, X[batch], y[batch], cfg.alpha
                )
                epoch_loss += loss * len(batch)
                grads = w_grads + b_grads
                t += 1
                bc1 = 1.0 - cfg.beta1**t
                bc2 = 1.0 - cfg.beta2**t
                for p, g, m_p, v_p in zip(params, grads, m, v):
                    m_p *= cfg.beta1
                    m_p += (1.0 - cfg.beta1) * g
                    v_p *= cfg.beta2
                    v_p += (1.0 - cfg.beta2) * g * g
                    p -= cfg.learning_rate * (m_p / bc1) / (np.sqrt(v_p / bc2) + cfg.epsilon)
            epoch_loss /= n
            epochs_run = epoch + 1
            loss_curve.append(epoch_loss)
            if not np.isfinite(epoch_loss):
                raise NonFiniteLoss(epoch)
            if epoch_loss > best_loss - cfg.tol:
                no_improve += 1
            else:
                no_improve = 0
            best_loss = min(best_loss, epoch_loss)
            if no_improve >= cfg.n_iter_no_change:
                break

        self.metadata = {
            "seed": cfg.rng_seed,
            "epochs_run": epochs_run,
            "final_loss": loss_curve[-1],
            "loss_curve": loss_curve,
        }
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        a = np.asarray(X, dtype=np.float64)
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            a = np.maximum(z, 0.0) if i < len(self.weights) - 1 else z
        return a[:, 0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.weights:
            raise RuntimeError("model is not fitted")
        # sigmoid(z) >= 0.5 exactly when z >= 0
        return (self.decision_function(X) >= 0.0).astype(np.int64)
