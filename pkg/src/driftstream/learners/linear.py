"""One-vs-rest linear classifiers on one-hot-expanded features."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..core import Instance, one_hot
from .base import BatchLearner, Learner, argmax_lowest


class _OvRLinear(Learner):
    """Shared machinery: per-class weight vector and bias over encoded inputs."""

    def __init__(self, schema, seed: int = 0, default_class=None, lr: float = 0.01):
        super().__init__(schema, seed, default_class)
        self.lr = lr
        self.dim = sum(1 if f.is_numeric else f.arity for f in schema.features)
        self.weights = np.zeros((self.n_classes, self.dim))
        self.bias = np.zeros(self.n_classes)

    def _encode(self, x: Sequence[float]) -> np.ndarray:
        return np.asarray(one_hot(x, self.schema))

    def margins(self, x: Sequence[float]) -> np.ndarray:
        return self.weights @ self._encode(x) + self.bias

    def _predict(self, x: Sequence[float]) -> int:
        return argmax_lowest(self.margins(x).tolist())


class LinearSGD(_OvRLinear):
    """Hinge-loss stochastic gradient descent, constant learning rate."""

    algorithm = "linear_sgd"

    def _learn(self, inst: Instance) -> None:
        v = self._encode(inst.x)
        margins = self.weights @ v + self.bias
        for c in range(self.n_classes):
            t = 1.0 if c == inst.y else -1.0
            if t * margins[c] < 1.0:
                self.weights[c] += self.lr * t * v
                self.bias[c] += self.lr * t


class Perceptron(_OvRLinear):
    """Classic perceptron updates: correct only on a sign mistake."""

    algorithm = "perceptron"

    def _learn(self, inst: Instance) -> None:
        v = self._encode(inst.x)
        margins = self.weights @ v + self.bias
        for c in range(self.n_classes):
            t = 1.0 if c == inst.y else -1.0
            if t * margins[c] <= 0.0:
                self.weights[c] += self.lr * t * v
                self.bias[c] += self.lr * t


class LogisticSGD(_OvRLinear):
    """Log-loss stochastic gradient descent (per-class sigmoid outputs)."""

    algorithm = "logistic_sgd"

    def _learn(self, inst: Instance) -> None:
        v = self._encode(inst.x)
        margins = self.weights @ v + self.bias
        for c in range(self.n_classes):
            t = 1.0 if c == inst.y else 0.0
            m = margins[c]
            p = 1.0 / (1.0 + math.exp(-m)) if -500 < m < 500 else (0.0 if m < 0 else 1.0)
            g = p - t
            self.weights[c] -= self.lr * g * v
            self.bias[c] -= self.lr * g


class LinearSvmBatch(BatchLearner):
    """Hinge-loss gradient descent over a frozen buffer for a fixed epoch count."""

    algorithm = "linear_svm_batch"

    def __init__(self, schema, seed: int = 0, default_class=None, lr: float = 0.01):
        super().__init__(schema, seed, default_class)
        self.lr = lr
        dim = sum(1 if f.is_numeric else f.arity for f in schema.features)
        self.weights = np.zeros((self.n_classes, dim))
        self.bias = np.zeros(self.n_classes)

    def _fit(self, buffer: list[Instance], epochs: int) -> None:
        if epochs < 1:
            raise ValueError("epochs must be >= 1")
        encoded = [(np.asarray(one_hot(inst.x, self.schema)), inst.y) for inst in buffer]
        for _ in range(epochs):
            for v, y in encoded:
                margins = self.weights @ v + self.bias
                for c in range(self.n_classes):
                    t = 1.0 if c == y else -1.0
                    if t * margins[c] < 1.0:
                        self.weights[c] += self.lr * t * v
                        self.bias[c] += self.lr * t

    def _predict(self, x: Sequence[float]) -> int:
        v = np.asarray(one_hot(x, self.schema))
        return argmax_lowest((self.weights @ v + self.bias).tolist())
