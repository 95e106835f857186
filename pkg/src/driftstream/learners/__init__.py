"""Incremental, ensemble and frozen-batch classifiers plus the name registry."""

from __future__ import annotations

from ..core import FeatureSchema
from .base import (
    BatchLearner,
    FrozenLearnerError,
    Learner,
    MajorityClass,
    UnlabeledInstanceError,
    UntrainedLearnerError,
    argmax_lowest,
    ensemble_vote,
    poisson,
    train_batch,
)
from .batch import CartBatch, RandomForestBatch
from .bayes import NaiveBayes
from .ensembles import LeveragingBagging, OzaBagging, OzaBaggingAdwin
from .knn import KnnBatch, KnnWindow
from .linear import LinearSGD, LinearSvmBatch, LogisticSGD, Perceptron
from .tree import HoeffdingAdaptiveTree, HoeffdingTree, hoeffding_bound

LEARNER_REGISTRY: dict[str, type[Learner]] = {
    cls.algorithm: cls
    for cls in (
        MajorityClass,
        NaiveBayes,
        HoeffdingTree,
        HoeffdingAdaptiveTree,
        KnnWindow,
        LinearSGD,
        Perceptron,
        LogisticSGD,
        OzaBagging,
        OzaBaggingAdwin,
        LeveragingBagging,
        CartBatch,
        RandomForestBatch,
        KnnBatch,
        LinearSvmBatch,
    )
}

# Tunable parameters and their defaults, keyed by algorithm (for `cli list`
# and config validation).
LEARNER_PARAMS: dict[str, dict] = {
    "majority_class": {},
    "naive_bayes": {},
    "hoeffding_tree": {"grace_period": 200, "delta": 1e-7, "tau": 0.05, "max_depth": None},
    "hoeffding_adaptive_tree": {"grace_period": 200, "delta": 1e-7, "tau": 0.05,
                                "max_depth": None, "adwin_delta": 0.002},
    "knn_window": {"k": 5, "window": 1000},
    "linear_sgd": {"lr": 0.01},
    "perceptron": {"lr": 0.01},
    "logistic_sgd": {"lr": 0.01},
    "oza_bagging": {"n_members": 10},
    "oza_bagging_adwin": {"n_members": 10},
    "leveraging_bagging": {"n_members": 10},
    "cart_batch": {"max_depth": 10, "min_leaf": 1},
    "random_forest_batch": {"n_trees": 10, "max_depth": 10, "min_leaf": 1,
                            "max_features": None, "bootstrap": True},
    "knn_batch": {"k": 5},
    "linear_svm_batch": {"lr": 0.01},
}

BATCH_ALGORITHMS = frozenset(
    name for name, cls in LEARNER_REGISTRY.items() if issubclass(cls, BatchLearner)
)


def make_learner(algorithm: str, schema: FeatureSchema, seed: int = 0, **params) -> Learner:
    try:
        cls = LEARNER_REGISTRY[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}") from None
    return cls(schema, seed=seed, **params)


__all__ = [
    "BATCH_ALGORITHMS",
    "BatchLearner",
    "CartBatch",
    "FrozenLearnerError",
    "HoeffdingAdaptiveTree",
    "HoeffdingTree",
    "KnnBatch",
    "KnnWindow",
    "LEARNER_PARAMS",
    "LEARNER_REGISTRY",
    "Learner",
    "LeveragingBagging",
    "LinearSGD",
    "LinearSvmBatch",
    "LogisticSGD",
    "MajorityClass",
    "NaiveBayes",
    "OzaBagging",
    "OzaBaggingAdwin",
    "Perceptron",
    "RandomForestBatch",
    "UnlabeledInstanceError",
    "UntrainedLearnerError",
    "argmax_lowest",
    "ensemble_vote",
    "hoeffding_bound",
    "make_learner",
    "poisson",
    "train_batch",
]
