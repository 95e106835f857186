"""k-nearest-neighbour classifiers: sliding-window incremental and batch."""

from __future__ import annotations

from collections import deque
from typing import Sequence

from ..core import Instance, RunningStats
from .base import BatchLearner, Learner, argmax_lowest

_STD_FLOOR = 1e-12


def _mixed_distance_sq(a: Sequence[float], b: Sequence[float],
                       numeric_scale: dict[int, tuple[float, float]],
                       categorical: frozenset[int]) -> float:
    """Squared distance: z-scaled numerics, 0/1 mismatch on categoricals."""
    total = 0.0
    for i, (va, vb) in enumerate(zip(a, b)):
        if i in categorical:
            if va != vb:
                total += 1.0
        else:
            mean, std = numeric_scale[i]
            d = (va - vb) / std
            total += d * d
    return total


class KnnWindow(Learner):
    """kNN over a bounded window of recent samples.

    Numeric features are z-standardized with running mean/std over everything
    seen so far; categorical features contribute 0/1 mismatch. The window
    evicts the oldest sample once full, which bounds memory.
    """

    algorithm = "knn_window"

    def __init__(self, schema, seed: int = 0, default_class=None,
                 k: int = 5, window: int = 1000):
        super().__init__(schema, seed, default_class)
        if k < 1 or window < 1:
            raise ValueError("k and window must be >= 1")
        self.k = k
        self.window: deque[tuple[list[float], int]] = deque(maxlen=window)
        self._stats = {i: RunningStats() for i in schema.numeric_indexes()}
        self._categorical = frozenset(schema.categorical_indexes())

    def _scale(self) -> dict[int, tuple[float, float]]:
        return {
            i: (st.mean, st.std() if st.std() > _STD_FLOOR else 1.0)
            for i, st in self._stats.items()
        }

    def _learn(self, inst: Instance) -> None:
        for i, st in self._stats.items():
            st.add(inst.x[i])
        self.window.append((list(inst.x), inst.y))

    def _predict(self, x: Sequence[float]) -> int:
        scale = self._scale()
        dists = [
            (_mixed_distance_sq(x, wx, scale, self._categorical), wy)
            for wx, wy in self.window
        ]
        dists.sort(key=lambda t: t[0])
        votes = [0] * self.n_classes
        for _, y in dists[: self.k]:
            votes[y] += 1
        return argmax_lowest(votes)


class KnnBatch(BatchLearner):
    """kNN over a frozen training buffer; standardization from buffer statistics."""

    algorithm = "knn_batch"

    def __init__(self, schema, seed: int = 0, default_class=None, k: int = 5):
        super().__init__(schema, seed, default_class)
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self._buffer: list[tuple[list[float], int]] = []
        self._scale: dict[int, tuple[float, float]] = {}
        self._categorical = frozenset(schema.categorical_indexes())

    def _fit(self, buffer: list[Instance], epochs: int) -> None:
        self._buffer = [(list(inst.x), inst.y) for inst in buffer]
        for i in self.schema.numeric_indexes():
            st = RunningStats()
            for x, _ in self._buffer:
                st.add(x[i])
            std = st.std()
            self._scale[i] = (st.mean, std if std > _STD_FLOOR else 1.0)

    def _predict(self, x: Sequence[float]) -> int:
        dists = [
            (_mixed_distance_sq(x, bx, self._scale, self._categorical), by)
            for bx, by in self._buffer
        ]
        dists.sort(key=lambda t: t[0])
        votes = [0] * self.n_classes
        for _, y in dists[: self.k]:
            votes[y] += 1
        return argmax_lowest(votes)
