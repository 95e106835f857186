"""Learner contract shared by incremental and frozen-batch classifiers."""

from __future__ import annotations

import math
import random
from typing import Optional, Sequence

from ..core import FeatureSchema, Instance


class FrozenLearnerError(RuntimeError):
    """partial_fit called on a frozen (batch-trained) model."""


class UntrainedLearnerError(RuntimeError):
    """predict called before any training sample and without a default class."""


class UnlabeledInstanceError(ValueError):
    """Training requires a labeled instance."""


class Learner:
    """Incremental classifier: partial_fit one labeled instance, predict a class.

    Batch algorithms subclass BatchLearner instead and are trained once via
    train_batch, after which they are frozen (predict-only).
    """

    algorithm = "base"

    def __init__(self, schema: FeatureSchema, seed: int = 0,
                 default_class: Optional[int] = None):
        self.schema = schema
        self.n_classes = schema.n_classes
        self.default_class = default_class
        self.fitted = False
        self.frozen = False
        self._rng = random.Random(seed)
        self._events: list[tuple[str, str]] = []

    def partial_fit(self, inst: Instance) -> "Learner":
        if self.frozen:
            raise FrozenLearnerError(f"{self.algorithm} is frozen; it cannot be updated")
        if inst.y is None:
            raise UnlabeledInstanceError("cannot train on an unlabeled instance")
        self._learn(inst)
        self.fitted = True
        return self

    def predict(self, x: Sequence[float]) -> int:
        if not self.fitted:
            if self.default_class is not None:
                return self.default_class
            raise UntrainedLearnerError(f"{self.algorithm} has no training samples yet")
        return self._predict(x)

    def freeze(self) -> "Learner":
        self.frozen = True
        return self

    def drain_events(self) -> list[tuple[str, str]]:
        events, self._events = self._events, []
        return events

    def _learn(self, inst: Instance) -> None:
        raise NotImplementedError

    def _predict(self, x: Sequence[float]) -> int:
        raise NotImplementedError


class BatchLearner(Learner):
    """Classifier trained once on a buffer; incremental updates are rejected."""

    def partial_fit(self, inst: Instance) -> "Learner":
        raise FrozenLearnerError(
            f"{self.algorithm} is a batch algorithm; train it with train_batch"
        )

    def fit(self, buffer: Sequence[Instance], epochs: int = 1) -> "Learner":
        if not buffer:
            raise ValueError("empty training buffer")
        for inst in buffer:
            if inst.y is None:
                raise UnlabeledInstanceError("batch training buffer must be fully labeled")
        self._fit(list(buffer), epochs)
        self.fitted = True
        self.frozen = True
        return self

    def _fit(self, buffer: list[Instance], epochs: int) -> None:
        raise NotImplementedError


def train_batch(learner: BatchLearner, buffer: Sequence[Instance], epochs: int = 1) -> BatchLearner:
    """Train a batch learner on a buffer and freeze it."""
    if not isinstance(learner, BatchLearner):
        raise TypeError(f"{learner.algorithm} is not a batch algorithm")
    learner.fit(buffer, epochs)
    return learner


def argmax_lowest(values: Sequence[float]) -> int:
    """Index of the maximum; ties resolve to the lowest index."""
    best, best_i = None, 0
    for i, v in enumerate(values):
        if best is None or v > best:
            best, best_i = v, i
    return best_i


def ensemble_vote(preds: Sequence[tuple[int, float]]) -> int:
    """Weighted vote over (class index, weight >= 0) pairs; ties pick the lowest class."""
    if not preds:
        raise ValueError("empty ensemble")
    totals: dict[int, float] = {}
    for cls, weight in preds:
        if weight < 0:
            raise ValueError("vote weights must be >= 0")
        totals[cls] = totals.get(cls, 0.0) + weight
    best = max(totals.values())
    return min(c for c, w in totals.items() if w == best)


def poisson(lam: float, rng: random.Random) -> int:
    """Poisson draw via Knuth's product method (fine for small lambda)."""
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    limit = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


class MajorityClass(Learner):
    """Predicts the most frequent class seen so far (ties to the lowest index)."""

    algorithm = "majority_class"

    def __init__(self, schema, seed: int = 0, default_class: Optional[int] = None):
        super().__init__(schema, seed, default_class)
        self.counts = [0] * self.n_classes

    def _learn(self, inst: Instance) -> None:
        self.counts[inst.y] += 1

    def _predict(self, x: Sequence[float]) -> int:
        return argmax_lowest(self.counts)
