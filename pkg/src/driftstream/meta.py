"""Online model selection: window meta-features, a trained selector, and the
best-of-last-window baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import FeatureSchema, Instance, RunningStats
from .learners import Learner
from .learners.base import argmax_lowest, ensemble_vote

_N_BINS = 10  # equal-width bins when discretizing numerics for entropy/MI

# Fixed measure list; the vector dimension is pinned by tests.
META_FEATURE_NAMES = (
    # general
    "n_classes_observed",
    "n_features",
    "frac_categorical",
    "majority_class_share",
    # statistical: per-numeric-feature measures aggregated across features
    "attr_mean_mean", "attr_mean_std",
    "attr_std_mean", "attr_std_std",
    "attr_skew_mean", "attr_skew_std",
    "attr_kurtosis_mean", "attr_kurtosis_std",
    "attr_correlation_mean", "attr_correlation_std",
    # information-theoretic
    "class_entropy",
    "attr_entropy_mean",
    "mutual_information_mean",
    "noise_signal_ratio",
)


def _entropy_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _discretize(column: np.ndarray) -> np.ndarray:
    lo, hi = column.min(), column.max()
    if hi <= lo:
        return np.zeros(len(column), dtype=int)
    bins = np.minimum(((column - lo) / (hi - lo) * _N_BINS).astype(int), _N_BINS - 1)
    return bins


def _column_symbols(window: Sequence[Instance], schema: FeatureSchema, i: int) -> np.ndarray:
    col = np.array([inst.x[i] for inst in window])
    if schema.features[i].is_numeric:
        return _discretize(col)
    return col.astype(int)


def extract_meta_features(window: Sequence[Instance], schema: FeatureSchema) -> list[float]:
    """Characterize a full window as a fixed-length real vector.

    Degenerate measures (zero variance, missing numerics, zero mutual
    information) are imputed with 0 so the dimension never changes.
    """
    if not window:
        raise ValueError("empty window")
    n = len(window)
    ys = np.array([inst.y for inst in window])
    d = schema.n_features
    numeric = schema.numeric_indexes()
    n_categorical = d - len(numeric)

    class_counts = np.bincount(ys, minlength=schema.n_classes)
    observed_classes = int((class_counts > 0).sum())
    majority_share = float(class_counts.max()) / n
    general = [float(observed_classes), float(d), n_categorical / d, majority_share]

    # statistical block over numeric columns
    means, stds, skews, kurts = [], [], [], []
    columns = {}
    for i in numeric:
        col = np.array([inst.x[i] for inst in window])
        columns[i] = col
        mu = float(col.mean())
        sigma = float(col.std())
        means.append(mu)
        stds.append(sigma)
        if sigma > 1e-12:
            z = (col - mu) / sigma
            skews.append(float((z ** 3).mean()))
            kurts.append(float((z ** 4).mean() - 3.0))
        else:
            skews.append(0.0)
            kurts.append(0.0)
    correlations = []
    for a in range(len(numeric)):
        for b in range(a + 1, len(numeric)):
            ca, cb = columns[numeric[a]], columns[numeric[b]]
            if ca.std() > 1e-12 and cb.std() > 1e-12:
                correlations.append(abs(float(np.corrcoef(ca, cb)[0, 1])))
            else:
                correlations.append(0.0)

    def agg(values: list[float]) -> tuple[float, float]:
        if not values:
            return 0.0, 0.0
        arr = np.array(values)
        return float(arr.mean()), float(arr.std())

    statistical = [*agg(means), *agg(stds), *agg(skews), *agg(kurts), *agg(correlations)]

    # information-theoretic block
    class_entropy = _entropy_from_counts(class_counts)
    attr_entropies = []
    mutual_infos = []
    for i in range(d):
        symbols = _column_symbols(window, schema, i)
        h_attr = _entropy_from_counts(np.bincount(symbols))
        attr_entropies.append(h_attr)
        joint: dict[tuple[int, int], int] = {}
        for s, y in zip(symbols, ys):
            joint[(int(s), int(y))] = joint.get((int(s), int(y)), 0) + 1
        h_joint = _entropy_from_counts(np.array(list(joint.values())))
        mutual_infos.append(max(h_attr + class_entropy - h_joint, 0.0))
    attr_entropy_mean = float(np.mean(attr_entropies)) if attr_entropies else 0.0
    mi_mean = float(np.mean(mutual_infos)) if mutual_infos else 0.0
    noise_signal = (attr_entropy_mean - mi_mean) / mi_mean if mi_mean > 1e-12 else 0.0
    info = [class_entropy, attr_entropy_mean, mi_mean, noise_signal]

    out = general + statistical + info
    assert len(out) == len(META_FEATURE_NAMES)
    return [v if math.isfinite(v) else 0.0 for v in out]


def meta_step(ensemble: "MetaEnsemble", inst: Instance) -> tuple[int, "MetaEnsemble"]:
    """One prequential step: predict with the active member, then train all
    members (window bookkeeping and boundary selection happen inside)."""
    prediction = ensemble.predict(inst.x)
    ensemble.partial_fit(inst)
    return prediction, ensemble


def window_best_learner(hits: Sequence[int], active: Optional[int] = None) -> int:
    """Argmax of per-learner hit counts; a tied current leader is retained."""
    if not hits:
        raise ValueError("empty learner roster")
    best = max(hits)
    if active is not None and 0 <= active < len(hits) and hits[active] == best:
        return active
    return min(i for i, h in enumerate(hits) if h == best)


class PerformanceWeights:
    """Fading per-member quality estimates for weighted voting."""

    def __init__(self, n_members: int, alpha: float = 0.99):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if n_members < 1:
            raise ValueError("need at least one member")
        self.alpha = alpha
        self.weights = [1.0] * n_members

    def update(self, correct: Sequence[int]) -> list[float]:
        a = self.alpha
        self.weights = [a * w + (1.0 - a) * c for w, c in zip(self.weights, correct)]
        return self.weights


class OnlineSelector:
    """Incremental one-vs-rest logistic model from meta-features to a roster index.

    Inputs are standardized with running statistics; classes appear as they
    are first seen, so early predictions fall back to the labels observed so
    far (mirroring the best-of-last-window behaviour until meta-knowledge
    accumulates).
    """

    def __init__(self, n_targets: int, lr: float = 0.05):
        self.n_targets = n_targets
        self.lr = lr
        self.weights: dict[int, np.ndarray] = {}
        self.bias: dict[int, float] = {}
        self._stats: list[RunningStats] = []
        self.fitted = False

    def _standardize(self, values: Sequence[float], update: bool) -> np.ndarray:
        if not self._stats:
            self._stats = [RunningStats() for _ in values]
        if update:
            for st, v in zip(self._stats, values):
                st.add(v)
        out = np.empty(len(values))
        for j, (st, v) in enumerate(zip(self._stats, values)):
            std = st.std()
            out[j] = (v - st.mean) / std if std > 1e-12 else 0.0
        return out

    def partial_fit(self, features: Sequence[float], target: int) -> "OnlineSelector":
        x = self._standardize(features, update=True)
        if target not in self.weights:
            self.weights[target] = np.zeros(len(x))
            self.bias[target] = 0.0
        for cls in self.weights:
            t = 1.0 if cls == target else 0.0
            margin = float(self.weights[cls] @ x) + self.bias[cls]
            p = 1.0 / (1.0 + math.exp(-margin)) if -500 < margin < 500 else float(margin > 0)
            g = p - t
            self.weights[cls] -= self.lr * g * x
            self.bias[cls] -= self.lr * g
        self.fitted = True
        return self

    def predict(self, features: Sequence[float]) -> int:
        if not self.fitted:
            return 0
        x = self._standardize(features, update=False)
        scores = [
            (float(self.weights[cls] @ x) + self.bias[cls], -cls) for cls in self.weights
        ]
        best = max(scores)
        return -best[1]


@dataclass
class WindowState:
    """One tumbling window in flight: its samples and per-learner hit counts."""

    samples: list[Instance] = field(default_factory=list)
    hits: list[int] = field(default_factory=list)


class MetaEnsemble(Learner):
    """Heterogeneous roster with an online-selected active member.

    Modes: ``meta`` trains a selector on (completed-window meta-features ->
    window-best member) and asks it to pick the next window's leader;
    ``last_best`` promotes the best member of the completed window directly;
    ``weighted_vote`` keeps fading per-member weights and votes every sample.
    Every member trains on every sample; selection only changes who answers.
    """

    algorithm = "meta_ensemble"

    def __init__(self, schema: FeatureSchema, members: Sequence[Learner],
                 mode: str = "meta", window: int = 300,
                 selector: Optional[OnlineSelector] = None,
                 alpha: float = 0.99, seed: int = 0, default_class=None):
        super().__init__(schema, seed, default_class)
        if not members:
            raise ValueError("empty learner roster")
        if mode not in ("meta", "last_best", "weighted_vote"):
            raise ValueError(f"unknown mode {mode!r}")
        if window < 1:
            raise ValueError("window must be >= 1")
        self.members = list(members)
        self.mode = mode
        self.window_size = window
        self.active_index = 0
        self.selector = selector if selector is not None else OnlineSelector(len(members))
        self.perf = PerformanceWeights(len(members), alpha)
        self._window = WindowState(hits=[0] * len(members))
        self.fitted = any(m.fitted for m in self.members)

    def _predict(self, x: Sequence[float]) -> int:
        if self.mode == "weighted_vote":
            votes = [
                (m.predict(x), w)
                for m, w in zip(self.members, self.perf.weights)
                if m.fitted
            ]
            if votes:
                return ensemble_vote(votes)
        member = self.members[self.active_index]
        if not member.fitted:
            for candidate in self.members:
                if candidate.fitted:
                    return candidate.predict(x)
        return member.predict(x)

    def _learn(self, inst: Instance) -> None:
        correct = [
            int(m.fitted and m.predict(inst.x) == inst.y) for m in self.members
        ]
        for j, c in enumerate(correct):
            self._window.hits[j] += c
        self.perf.update(correct)
        for m in self.members:
            m.partial_fit(inst)
        self._window.samples.append(inst)
        if len(self._window.samples) == self.window_size:
            self._window_boundary()

    def _window_boundary(self) -> None:
        best = window_best_learner(self._window.hits, self.active_index)
        new_active = self.active_index
        if self.mode == "meta":
            features = extract_meta_features(self._window.samples, self.schema)
            self.selector.partial_fit(features, best)
            new_active = self.selector.predict(features)
        elif self.mode == "last_best":
            new_active = best
        if new_active != self.active_index:
            self.active_index = new_active
            self._events.append(("selector", f"switch:{new_active}"))
        self._window = WindowState(hits=[0] * len(self.members))
