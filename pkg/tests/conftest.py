"""Shared scripted learners and stream helpers for the test suite."""

from __future__ import annotations

import random

import pytest

from driftstream.core import Feature, FeatureSchema, Instance
from driftstream.generators import InstanceStream
from driftstream.learners.base import Learner

ONE_NUMERIC = FeatureSchema(features=(Feature("x0"),), classes=("0", "1"))


class RuleLearner(Learner):
    """Fixed decision rule; ignores training. fitted from birth."""

    algorithm = "rule"

    def __init__(self, schema, rule):
        super().__init__(schema)
        self.rule = rule
        self.fitted = True

    def _learn(self, inst):
        pass

    def _predict(self, x):
        return self.rule(x)


class OracleLearner(Learner):
    """Predicts the upcoming label (cheats via a shared label feed)."""

    algorithm = "oracle"

    def __init__(self, schema):
        super().__init__(schema)
        self.fitted = True
        self.next_label = 0

    def _learn(self, inst):
        pass

    def _predict(self, x):
        return self.next_label


class ProbeLearner(Learner):
    """Records every call for ordering/leakage audits; predicts a constant."""

    algorithm = "probe"

    def __init__(self, schema, constant=0):
        super().__init__(schema)
        self.fitted = True
        self.constant = constant
        self.calls: list[tuple[str, tuple[float, ...]]] = []

    def _learn(self, inst):
        self.calls.append(("fit", tuple(inst.x)))

    def _predict(self, x):
        self.calls.append(("predict", tuple(x)))
        return self.constant


class ListStream(InstanceStream):
    """Finite stream over pre-built (x, y) pairs; assigns seq itself."""

    def __init__(self, pairs, schema):
        super().__init__()
        self.schema = schema
        self._pairs = list(pairs)
        self._pos = 0

    def __next__(self) -> Instance:
        if self._pos >= len(self._pairs):
            raise StopIteration
        x, y = self._pairs[self._pos]
        self._pos += 1
        return self._emit(list(x), y)


def labeled_stream(labels, schema=ONE_NUMERIC, seed=0):
    """Stream with the given label sequence and a seq-valued feature."""
    return ListStream([([float(i)], y) for i, y in enumerate(labels)], schema)


class ThresholdConceptStream(InstanceStream):
    """x0 ~ U[0,1); label = x0 > threshold(block), blocks of fixed duration.

    Used for the model-selection experiments: each block's threshold makes a
    different fixed-rule learner exactly right.
    """

    def __init__(self, n, duration, thresholds=(0.8, 0.4), seed=0):
        super().__init__()
        self.schema = ONE_NUMERIC
        self.n = n
        self.duration = duration
        self.thresholds = thresholds
        self._rng = random.Random(seed)

    def __next__(self):
        if self._seq >= self.n:
            raise StopIteration
        x0 = self._rng.random()
        thr = self.thresholds[(self._seq // self.duration) % len(self.thresholds)]
        return self._emit([x0], int(x0 > thr))


@pytest.fixture
def tmp_csv(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
