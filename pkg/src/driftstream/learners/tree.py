"""Incremental decision trees: Hoeffding tree and its drift-adapting variant."""

from __future__ import annotations

import math
from typing import Optional, Sequence

from ..core import Instance, RunningStats
from ..drift import DRIFT, Adwin
from .base import Learner, argmax_lowest

_N_THRESHOLDS = 10  # candidate cut points per numeric feature
_SQRT2PI = math.sqrt(2.0 * math.pi)


def hoeffding_bound(value_range: float, delta: float, n: int) -> float:
    """Confidence radius justifying a split decision from n observations."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if value_range <= 0:
        raise ValueError("value range must be > 0")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must be in (0, 1]")
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


def _entropy(counts: Sequence[float]) -> float:
    total = sum(counts)
    if total <= 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def _gaussian_cdf(x: float, mean: float, std: float) -> float:
    if std <= 0:
        return 1.0 if x >= mean else 0.0
    return 0.5 * (1.0 + math.erf((x - mean) / (std * math.sqrt(2.0))))


class _Split:
    """Chosen cut: numeric threshold (two children) or categorical fan-out."""

    __slots__ = ("feature", "threshold", "arity")

    def __init__(self, feature: int, threshold: Optional[float], arity: int):
        self.feature = feature
        self.threshold = threshold
        self.arity = arity

    def branch(self, x: Sequence[float]) -> int:
        if self.threshold is not None:
            return 0 if x[self.feature] <= self.threshold else 1
        return int(x[self.feature])


class _Node:
    __slots__ = ("class_counts", "split", "children", "num_stats", "num_range",
                 "cat_stats", "n_since_check", "mc_correct", "nb_correct",
                 "depth", "adwin", "alternate")

    def __init__(self, n_classes: int, depth: int = 0):
        self.class_counts = [0] * n_classes
        self.split: Optional[_Split] = None
        self.children: Optional[list["_Node"]] = None
        # numeric feature -> per-class RunningStats; plus observed value range
        self.num_stats: dict[int, list[RunningStats]] = {}
        self.num_range: dict[int, tuple[float, float]] = {}
        # categorical feature -> per-value per-class counts
        self.cat_stats: dict[int, list[list[int]]] = {}
        self.n_since_check = 0
        self.mc_correct = 0
        self.nb_correct = 0
        self.depth = depth
        self.adwin: Optional[Adwin] = None    # used by the adaptive variant
        self.alternate: Optional["_Node"] = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def total(self) -> int:
        return sum(self.class_counts)


class HoeffdingTree(Learner):
    """Very fast decision tree: splits a leaf once the information-gain lead of
    the best feature over the runner-up clears the Hoeffding bound (or the
    bound has shrunk below the tie threshold tau).

    Numeric features use per-class gaussian summaries with evenly spaced
    candidate thresholds; categorical features split multiway. Leaves predict
    by majority or naive Bayes, whichever has the better record at that leaf.
    """

    algorithm = "hoeffding_tree"

    def __init__(self, schema, seed: int = 0, default_class=None,
                 grace_period: int = 200, delta: float = 1e-7, tau: float = 0.05,
                 max_depth: Optional[int] = None):
        super().__init__(schema, seed, default_class)
        self.grace_period = grace_period
        self.delta = delta
        self.tau = tau
        self.max_depth = max_depth
        self.root = _Node(self.n_classes)
        self.n_nodes = 1

    # -- learning ----------------------------------------------------------

    def _learn(self, inst: Instance) -> None:
        node = self.root
        while not node.is_leaf:
            node = node.children[node.split.branch(inst.x)]
        self._leaf_learn(node, inst)

    def _leaf_learn(self, node: _Node, inst: Instance) -> None:
        if node.total > 0:
            if argmax_lowest(node.class_counts) == inst.y:
                node.mc_correct += 1
            if self._leaf_nb(node, inst.x) == inst.y:
                node.nb_correct += 1
        self._update_stats(node, inst)
        node.n_since_check += 1
        if node.n_since_check >= self.grace_period:
            node.n_since_check = 0
            if self.max_depth is None or node.depth < self.max_depth:
                self._attempt_split(node)

    def _update_stats(self, node: _Node, inst: Instance) -> None:
        node.class_counts[inst.y] += 1
        for i, feat in enumerate(self.schema.features):
            v = inst.x[i]
            if feat.is_numeric:
                per_class = node.num_stats.get(i)
                if per_class is None:
                    per_class = [RunningStats() for _ in range(self.n_classes)]
                    node.num_stats[i] = per_class
                    node.num_range[i] = (v, v)
                per_class[inst.y].add(v)
                lo, hi = node.num_range[i]
                node.num_range[i] = (min(lo, v), max(hi, v))
            else:
                table = node.cat_stats.get(i)
                if table is None:
                    table = [[0] * self.n_classes for _ in range(feat.arity)]
                    node.cat_stats[i] = table
                table[int(v)][inst.y] += 1

    # -- split search ------------------------------------------------------

    def _numeric_best_cut(self, node: _Node, i: int) -> Optional[tuple[float, float]]:
        """Best (gain, threshold) for a numeric feature via gaussian summaries."""
        per_class = node.num_stats.get(i)
        if per_class is None:
            return None
        lo, hi = node.num_range[i]
        if hi <= lo:
            return None
        n = node.total
        h_parent = _entropy(node.class_counts)
        best = None
        for step in range(1, _N_THRESHOLDS + 1):
            t = lo + (hi - lo) * step / (_N_THRESHOLDS + 1)
            left = []
            for c in range(self.n_classes):
                st = per_class[c]
                if st.count == 0:
                    left.append(0.0)
                else:
                    left.append(st.count * _gaussian_cdf(t, st.mean, st.std()))
            n_left = sum(left)
            n_right = n - n_left
            if n_left < 1e-9 or n_right < 1e-9:
                continue
            right = [node.class_counts[c] - left[c] for c in range(self.n_classes)]
            right = [max(r, 0.0) for r in right]
            gain = h_parent - (n_left / n) * _entropy(left) - (n_right / n) * _entropy(right)
            if best is None or gain > best[0]:
                best = (gain, t)
        return best

    def _categorical_gain(self, node: _Node, i: int) -> Optional[float]:
        table = node.cat_stats.get(i)
        if table is None:
            return None
        n = node.total
        h_children = 0.0
        observed = 0
        for value_counts in table:
            n_v = sum(value_counts)
            if n_v > 0:
                observed += 1
                h_children += (n_v / n) * _entropy(value_counts)
        if observed < 2:
            return None
        return _entropy(node.class_counts) - h_children

    def _attempt_split(self, node: _Node) -> None:
        if len([c for c in node.class_counts if c > 0]) < 2:
            return  # pure leaf: every gain is zero
        candidates: list[tuple[float, _Split]] = []
        for i, feat in enumerate(self.schema.features):
            if feat.is_numeric:
                cut = self._numeric_best_cut(node, i)
                if cut is not None:
                    candidates.append((cut[0], _Split(i, cut[1], 2)))
            else:
                gain = self._categorical_gain(node, i)
                if gain is not None:
                    candidates.append((gain, _Split(i, None, feat.arity)))
        if not candidates:
            return
        best_gain, best_split = candidates[0]
        second_gain = 0.0
        for gain, split in candidates[1:]:
            if gain > best_gain:
                second_gain = best_gain
                best_gain, best_split = gain, split
            elif gain > second_gain:
                second_gain = gain
        if best_gain <= 0.0:
            return
        eps = hoeffding_bound(math.log2(self.n_classes), self.delta, node.total)
        if best_gain - second_gain > eps or eps < self.tau:
            self._split_node(node, best_split)

    def _split_node(self, node: _Node, split: _Split) -> None:
        node.split = split
        node.children = [_Node(self.n_classes, node.depth + 1) for _ in range(split.arity)]
        self.n_nodes += split.arity
        node.num_stats.clear()
        node.num_range.clear()
        node.cat_stats.clear()

    # -- prediction --------------------------------------------------------

    def _leaf_nb(self, node: _Node, x: Sequence[float]) -> int:
        scores = []
        n = node.total
        for c in range(self.n_classes):
            n_c = node.class_counts[c]
            if n_c == 0:
                scores.append(-math.inf)
                continue
            score = math.log(n_c / n)
            for i, per_class in node.num_stats.items():
                st = per_class[c]
                if st.count < 2:
                    continue
                var = max(st.variance(), 1e-9)
                diff = x[i] - st.mean
                score += -0.5 * (math.log(2.0 * math.pi * var) + diff * diff / var)
            for i, table in node.cat_stats.items():
                arity = len(table)
                score += math.log((table[int(x[i])][c] + 1.0) / (n_c + arity))
            scores.append(score)
        return argmax_lowest(scores)

    def _predict_from(self, node: _Node, x: Sequence[float]) -> Optional[int]:
        fallback = None
        while not node.is_leaf:
            if node.total > 0:
                fallback = node
            node = node.children[node.split.branch(x)]
        if node.total == 0:
            return argmax_lowest(fallback.class_counts) if fallback else None
        if node.nb_correct > node.mc_correct:
            return self._leaf_nb(node, x)
        return argmax_lowest(node.class_counts)

    def _predict(self, x: Sequence[float]) -> int:
        pred = self._predict_from(self.root, x)
        if pred is None:
            if self.default_class is not None:
                return self.default_class
            return 0
        return pred


class HoeffdingAdaptiveTree(HoeffdingTree):
    """Hoeffding tree whose nodes monitor their own error with adaptive windows.

    Every node on an instance's path feeds an Adwin with the subtree's error
    bit. A drift signal starts a fresh alternate subtree at that node; when a
    later signal (from the node or its alternate) finds the alternate's
    windowed error lower, the alternate replaces the original subtree.
    """

    algorithm = "hoeffding_adaptive_tree"

    def __init__(self, schema, seed: int = 0, default_class=None,
                 grace_period: int = 200, delta: float = 1e-7, tau: float = 0.05,
                 max_depth: Optional[int] = None, adwin_delta: float = 0.002):
        super().__init__(schema, seed, default_class, grace_period, delta, tau, max_depth)
        self.adwin_delta = adwin_delta

    def _learn(self, inst: Instance) -> None:
        self._adaptive_learn(self.root, inst, parent=None, branch=None)

    def _adaptive_learn(self, node: _Node, inst: Instance,
                        parent: Optional[_Node], branch: Optional[int]) -> None:
        if node.adwin is None:
            node.adwin = Adwin(delta=self.adwin_delta)
        pred = self._predict_from(node, inst.x)
        error = 1.0 if pred is None or pred != inst.y else 0.0
        main_signal = node.adwin.update(error) == DRIFT

        alt_signal = False
        if node.alternate is not None:
            alt = node.alternate
            alt_pred = self._predict_from(alt, inst.x)
            alt_error = 1.0 if alt_pred is None or alt_pred != inst.y else 0.0
            alt_signal = alt.adwin.update(alt_error) == DRIFT
            self._subtree_learn(alt, inst)

        if node.alternate is not None and (main_signal or alt_signal):
            alt = node.alternate
            if alt.adwin.width >= alt.adwin.min_window and alt.adwin.mean < node.adwin.mean:
                self._swap_in_alternate(node, parent, branch)
                self._events.append(("hat", "swap"))
                return
        elif main_signal and node.alternate is None:
            alt = _Node(self.n_classes, node.depth)
            alt.adwin = Adwin(delta=self.adwin_delta)
            node.alternate = alt
            self.n_nodes += 1
            self._events.append(("hat", "drift"))

        if node.is_leaf:
            self._leaf_learn(node, inst)
        else:
            child = node.children[node.split.branch(inst.x)]
            self._adaptive_learn(child, inst, parent=node, branch=node.split.branch(inst.x))

    def _subtree_learn(self, node: _Node, inst: Instance) -> None:
        while not node.is_leaf:
            node = node.children[node.split.branch(inst.x)]
        self._leaf_learn(node, inst)

    def _swap_in_alternate(self, node: _Node, parent: Optional[_Node],
                           branch: Optional[int]) -> None:
        alt = node.alternate
        node.alternate = None
        if parent is None:
            self.root = alt
        else:
            parent.children[branch] = alt
