"""Linear support vector classifier with squared hinge loss.

Minimizes ``0.5 * ||w||^2 + C * sum(max(0, 1 - y_i (w.x_i + b))^2)`` over
the primal by full-batch gradient descent with a backtracking (Armijo)
line search, starting at step 1.0 and halving. The intercept is not
penalized. Labels map to -1 (class 0) / +1 (class 1) internally; a raw
score of exactly zero predicts class 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LinearSvcConfig", "LinearSvcModel"]

_ARMIJO_C = 1e-4
_MAX_HALVINGS = 60


@dataclass(frozen=True)
class LinearSvcConfig:
    penalty: str = "l2"
    loss: str = "squared_hinge"
    C: float = 1.0
    fit_intercept: bool = True
    tol: float = 1e-4
    max_iter: int = 1000
    rng_seed: int = 0  # training is deterministic; kept for config echo

    def __post_init__(self) -> None:
        if self.C <= 0.0:
            raise ValueError("C must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.penalty != "l2" or self.loss != "squared_hinge":
            raise ValueError("only l2 penalty with squared hinge loss is supported")


class LinearSvcModel:
    kind = "svc"
    display_name = "SVC"

    def __init__(self, config: LinearSvcConfig | None = None):
        self.config = config or LinearSvcConfig()
        self.weights: np.ndarray | None = None
        self.intercept: float = 0.0
        self.metadata: dict = {}

    def _objective(self, w, b, X, s) -> float:
        violation = np.maximum(0.0, 1.0 - s * (X @ w + b))
        return 0.5 * float(w @ w) + self.config.C * float(violation @ violation)

    def _gradient(self, w, b, X, s):
        violation = np.maximum(0.0, 1.0 - s * (X @ w + b))
        coeff = self.config.C * 2.0 * violation * s
        grad_w = w - X.T @ coeff
        grad_b = -float(coeff.sum()) if self.config.fit_intercept else 0.0
        return grad_w, grad_b

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LinearSvcModel":
        X = np.asarray(X, dtype=np.float64)
        s = np.where(np.asarray(y) == 1, 1.0, -1.0)
        w = np.zeros(X.shape[1])
        b = 0.0

        objective = self._objective(w, b, X, s)
        grad_w, grad_b = self._gradient(w, b, X, s)
        objective_curve = [objective]
        converged = False
        iterations = 0
        while iterations < self.config.max_iter:
            iterations += 1
            grad_inf = max(float(np.max(np.abs(grad_w))), abs(grad_b))
            if grad_inf < self.config.tol:
                converged = True
                break
            grad_sq = float(grad_w @ grad_w) + grad_b * grad_b
            step = 1.0
            accepted = False
            for _ in range(_MAX_HALVINGS):
                w_new = w - step * grad_w
                b_new = b - step * grad_b
                obj_new = self._objective(w_new, b_new, X, s)
                if obj_new <= objective - _ARMIJO_C * step * grad_sq:
                    w, b, objective = w_new, b_new, obj_new
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break  # step underflowed; gradient is numerically negligible
            objective_curve.append(objective)
            grad_w, grad_b = self._gradient(w, b, X, s)

        grad_inf = max(float(np.max(np.abs(grad_w))), abs(grad_b))
        converged = converged or grad_inf < self.config.tol
        self.weights = w
        self.intercept = b
        self.metadata = {
            "seed": self.config.rng_seed,
            "iterations": iterations,
            "converged": converged,
            "final_objective": objective,
            "final_grad_inf_norm": grad_inf,
            "objective_curve": objective_curve,
        }
        if not converged:
            self.metadata["warning"] = "did not converge within max_iter"
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise RuntimeError("model is not fitted")
        return (self.decision_function(X) >= 0.0).astype(np.int64)
