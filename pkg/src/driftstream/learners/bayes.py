"""Incremental naive Bayes over mixed numeric/categorical features."""

from __future__ import annotations

import math
from typing import Sequence

from ..core import Instance, RunningStats
from .base import Learner, argmax_lowest

_VAR_FLOOR = 1e-9
_LOG_2PI = math.log(2.0 * math.pi)


class NaiveBayes(Learner):
    """Gaussian likelihoods for numerics, Laplace-smoothed counts for categoricals.

    With a single categorical feature this is exactly the Bayes rule on the
    observed counts, which the tests exploit as an oracle.
    """

    algorithm = "naive_bayes"

    def __init__(self, schema, seed: int = 0, default_class=None):
        super().__init__(schema, seed, default_class)
        C = self.n_classes
        self.class_counts = [0] * C
        # per class, per numeric feature index -> RunningStats
        self._num = [{i: RunningStats() for i in schema.numeric_indexes()} for _ in range(C)]
        # per class, per categorical feature index -> value count list
        self._cat = [
            {i: [0] * schema.features[i].arity for i in schema.categorical_indexes()}
            for _ in range(C)
        ]

    def _learn(self, inst: Instance) -> None:
        c = inst.y
        self.class_counts[c] += 1
        for i, stats in self._num[c].items():
            stats.add(inst.x[i])
        for i, counts in self._cat[c].items():
            counts[int(inst.x[i])] += 1

    def _log_joint(self, x: Sequence[float], c: int) -> float:
        n_c = self.class_counts[c]
        if n_c == 0:
            return -math.inf
        total = sum(self.class_counts)
        score = math.log(n_c / total)
        for i, stats in self._num[c].items():
            var = max(stats.variance(), _VAR_FLOOR)
            diff = x[i] - stats.mean
            score += -0.5 * (_LOG_2PI + math.log(var) + diff * diff / var)
        for i, counts in self._cat[c].items():
            arity = len(counts)
            score += math.log((counts[int(x[i])] + 1.0) / (n_c + arity))
        return score

    def _predict(self, x: Sequence[float]) -> int:
        return argmax_lowest([self._log_joint(x, c) for c in range(self.n_classes)])
