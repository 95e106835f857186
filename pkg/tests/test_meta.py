import math
import random

import pytest

from driftstream.core import CATEGORICAL, ConfusionMatrix, Feature, FeatureSchema, Instance
from driftstream.evaluation import run_prequential
from driftstream.generators import LimitedStream, SeaGenerator
from driftstream.learners import HoeffdingTree, make_learner
from driftstream.meta import (
    META_FEATURE_NAMES,
    MetaEnsemble,
    OnlineSelector,
    PerformanceWeights,
    extract_meta_features,
    meta_step,
    window_best_learner,
)
from conftest import ONE_NUMERIC, RuleLearner, ThresholdConceptStream

MIXED = FeatureSchema(
    features=(Feature("a"), Feature("b", CATEGORICAL, 2)),
    classes=("0", "1"),
)


def window_from(pairs, schema=MIXED):
    return [Instance(list(x), y=y, seq=i) for i, (x, y) in enumerate(pairs)]


# -- meta-features ----------------------------------------------------------------

def test_feature_vector_dimension_is_pinned():
    rng = random.Random(0)
    window = window_from([([rng.random(), float(rng.randrange(2))], rng.randrange(2))
                          for _ in range(50)])
    values = extract_meta_features(window, MIXED)
    assert len(values) == len(META_FEATURE_NAMES) == 18
    assert all(math.isfinite(v) for v in values)


def test_single_class_window_has_zero_class_entropy():
    window = window_from([([0.5, 0.0], 0) for _ in range(30)])
    values = dict(zip(META_FEATURE_NAMES, extract_meta_features(window, MIXED)))
    assert values["class_entropy"] == 0.0
    assert values["n_classes_observed"] == 1.0
    assert values["majority_class_share"] == 1.0


def test_balanced_binary_labels_give_one_bit():
    window = window_from([([float(i), 0.0], i % 2) for i in range(40)])
    values = dict(zip(META_FEATURE_NAMES, extract_meta_features(window, MIXED)))
    assert values["class_entropy"] == pytest.approx(1.0)


def test_feature_identical_to_label_has_mi_equal_class_entropy():
    schema = FeatureSchema(features=(Feature("f", CATEGORICAL, 2),), classes=("0", "1"))
    rng = random.Random(1)
    pairs = [([float(y)], y) for y in (rng.randrange(2) for _ in range(60))]
    window = window_from(pairs, schema)
    values = dict(zip(META_FEATURE_NAMES, extract_meta_features(window, schema)))
    assert values["mutual_information_mean"] == pytest.approx(values["class_entropy"], abs=1e-12)


def test_degenerate_numeric_column_imputes_zero():
    window = window_from([([3.25, float(i % 2)], i % 2) for i in range(30)])
    values = dict(zip(META_FEATURE_NAMES, extract_meta_features(window, MIXED)))
    assert values["attr_std_mean"] == 0.0
    assert values["attr_skew_mean"] == 0.0
    assert values["attr_kurtosis_mean"] == 0.0


def test_class_entropy_invariant_under_relabeling():
    rng = random.Random(2)
    pairs = [([rng.random(), float(rng.randrange(2))], int(rng.random() < 0.3))
             for _ in range(100)]
    flipped = [(x, 1 - y) for x, y in pairs]
    a = dict(zip(META_FEATURE_NAMES, extract_meta_features(window_from(pairs), MIXED)))
    b = dict(zip(META_FEATURE_NAMES, extract_meta_features(window_from(flipped), MIXED)))
    assert a["class_entropy"] == pytest.approx(b["class_entropy"], abs=1e-12)


def test_empty_window_rejected():
    with pytest.raises(ValueError):
        extract_meta_features([], MIXED)


# -- window best ------------------------------------------------------------------

def test_window_best_argmax():
    assert window_best_learner([250, 280, 240, 100]) == 1


def test_window_best_tie_retains_active():
    assert window_best_learner([5, 5, 5], active=2) == 2


def test_window_best_tie_without_active_takes_lowest():
    assert window_best_learner([5, 5, 3]) == 0


def test_window_best_single_learner():
    assert window_best_learner([42]) == 0


def test_window_best_empty_roster():
    with pytest.raises(ValueError):
        window_best_learner([])


# -- performance weights --------------------------------------------------------------

def test_weights_stay_equal_when_all_correct():
    pw = PerformanceWeights(3, alpha=0.9)
    for _ in range(100):
        pw.update([1, 1, 1])
    assert pw.weights[0] == pytest.approx(pw.weights[1])
    assert pw.weights[1] == pytest.approx(pw.weights[2])


def test_weight_ratio_separates_good_from_bad():
    pw = PerformanceWeights(2, alpha=0.999)
    for _ in range(10_000):
        pw.update([1, 0])
    assert pw.weights[0] / pw.weights[1] > 100


def test_alpha_near_one_freezes_weights():
    pw = PerformanceWeights(2, alpha=1 - 1e-12)
    for _ in range(1000):
        pw.update([1, 0])
    assert pw.weights[0] == pytest.approx(1.0, abs=1e-8)
    assert pw.weights[1] == pytest.approx(1.0, abs=1e-8)


def test_alpha_domain():
    with pytest.raises(ValueError):
        PerformanceWeights(2, alpha=1.0)
    with pytest.raises(ValueError):
        PerformanceWeights(2, alpha=0.0)


# -- ensemble behaviour ------------------------------------------------------------------

def _experts():
    return [RuleLearner(ONE_NUMERIC, lambda x: int(x[0] > 0.8)),
            RuleLearner(ONE_NUMERIC, lambda x: int(x[0] > 0.4))]


def test_cold_start_keeps_first_member_through_window_one():
    stream = ThresholdConceptStream(600, duration=600, thresholds=(0.4,), seed=3)
    ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode="last_best", window=300)
    actives = []
    for inst in stream:
        actives.append(ens.active_index)
        ens.predict(inst.x)
        ens.partial_fit(inst)
    assert set(actives[:300]) == {0}
    assert actives[350] == 1  # expert 1 won window one


def test_last_best_lags_one_window_on_aligned_alternation():
    # concept flips every 300 = one window: the leader always trails by one
    stream = ThresholdConceptStream(3000, duration=300, seed=4)
    ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode="last_best", window=300)
    actives_per_window = []
    for i, inst in enumerate(stream):
        if i % 300 == 0:
            actives_per_window.append(ens.active_index)
        ens.predict(inst.x)
        ens.partial_fit(inst)
    # window k is concept k%2 whose expert is k%2; the pick matches the
    # PREVIOUS window's expert from window 2 onward
    for k in range(2, 10):
        assert actives_per_window[k] == (k - 1) % 2


def test_switch_events_only_at_window_boundaries():
    stream = ThresholdConceptStream(3000, duration=900, seed=5)
    ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode="last_best", window=300)
    trace = run_prequential(stream, ens, report_every=50)
    switches = [seq for r in trace.records for seq, det, status in r.drift_events
                if det == "selector"]
    assert switches
    assert all((seq + 1) % 300 == 0 for seq in switches)


def test_active_switch_recorded_in_trace():
    stream = ThresholdConceptStream(1200, duration=600, seed=6)
    ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode="last_best", window=300)
    trace = run_prequential(stream, ens, report_every=100)
    assert any("switch:" in status
               for r in trace.records for _, det, status in r.drift_events)
    assert trace.records[-1].active_learner is not None


class LookupPreviousBest:
    """Selector test double: replays the previous window's best index."""

    def __init__(self):
        self.fitted = False
        self._last = 0

    def partial_fit(self, features, target):
        self._last = target
        self.fitted = True

    def predict(self, features):
        return self._last


def test_meta_with_lookup_selector_degenerates_to_last_best():
    def run(mode, selector=None):
        stream = ThresholdConceptStream(6000, duration=900, seed=7)
        ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode=mode, window=300,
                           selector=selector)
        return run_prequential(stream, ens, report_every=100)

    t_last = run("last_best")
    t_meta = run("meta", selector=LookupPreviousBest())
    assert [(r.seq, r.cum_accuracy, r.active_learner) for r in t_last.records] == \
           [(r.seq, r.cum_accuracy, r.active_learner) for r in t_meta.records]


class NextWindowOracle:
    """Upper-bound selector: told the NEXT window's best ahead of time."""

    def __init__(self, picks):
        self.picks = picks
        self.fitted = True
        self.calls = 0

    def partial_fit(self, features, target):
        pass

    def predict(self, features):
        pick = self.picks[min(self.calls, len(self.picks) - 1)]
        self.calls += 1
        return pick


def test_oracle_selector_upper_bounds_last_best():
    n, dur, w = 6000, 300, 300

    def hits_per_window():
        experts = _experts()
        stream = ThresholdConceptStream(n, dur, seed=8)
        best = []
        hits = [0, 0]
        for i, inst in enumerate(stream, start=1):
            for j, m in enumerate(experts):
                hits[j] += int(m.predict(inst.x) == inst.y)
            if i % w == 0:
                best.append(window_best_learner(hits))
                hits = [0, 0]
        return best

    best = hits_per_window()
    # picks[k] is consumed at the END of window k+1 and selects window k+2's leader
    picks = best[1:] + best[-1:]

    def run(mode, selector=None):
        stream = ThresholdConceptStream(n, dur, seed=8)
        ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode=mode, window=w,
                           selector=selector)
        return run_prequential(stream, ens, report_every=100).final.cum_accuracy

    acc_oracle = run("meta", selector=NextWindowOracle(picks))
    acc_last = run("last_best")
    assert acc_oracle >= acc_last
    assert acc_oracle > 0.9


def test_single_member_matches_plain_run_exactly():
    def stream():
        return LimitedStream(SeaGenerator(seed=12), 2000)

    plain = run_prequential(stream(), HoeffdingTree(SeaGenerator.schema, seed=1),
                            report_every=100)
    via_meta = run_prequential(
        stream(),
        MetaEnsemble(SeaGenerator.schema,
                     [HoeffdingTree(SeaGenerator.schema, seed=1)],
                     mode="last_best", window=300),
        report_every=100)
    stripped_plain = [(r.seq, r.cum_accuracy, r.window_accuracy, r.kappa)
                      for r in plain.records]
    stripped_meta = [(r.seq, r.cum_accuracy, r.window_accuracy, r.kappa)
                     for r in via_meta.records]
    assert stripped_plain == stripped_meta


def test_weighted_vote_follows_reliable_member():
    stream = ThresholdConceptStream(2000, duration=2000, thresholds=(0.4,), seed=9)
    ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode="weighted_vote", window=300,
                       alpha=0.9)
    cm = ConfusionMatrix(2)
    for inst in stream:
        cm.update(inst.y, ens.predict(inst.x))
        ens.partial_fit(inst)
    assert cm.accuracy() > 0.95


def test_online_selector_learns_separable_mapping():
    rng = random.Random(10)
    sel = OnlineSelector(2)
    for _ in range(300):
        cls = rng.randrange(2)
        base = [1.0, 5.0] if cls == 0 else [5.0, 1.0]
        sel.partial_fit([v + rng.gauss(0, 0.2) for v in base], cls)
    assert sel.predict([1.0, 5.0]) == 0
    assert sel.predict([5.0, 1.0]) == 1


def test_meta_step_is_test_then_train():
    stream = ThresholdConceptStream(700, duration=700, thresholds=(0.4,), seed=11)
    ens = MetaEnsemble(ONE_NUMERIC, _experts(), mode="last_best", window=300)
    cm = ConfusionMatrix(2)
    for inst in stream:
        pred, ens = meta_step(ens, inst)
        cm.update(inst.y, pred)
    assert cm.total == 700
    assert ens.active_index == 1  # expert 1 owns the only concept


def test_meta_ensemble_validates_arguments():
    with pytest.raises(ValueError):
        MetaEnsemble(ONE_NUMERIC, [], mode="meta")
    with pytest.raises(ValueError):
        MetaEnsemble(ONE_NUMERIC, _experts(), mode="nope")
    with pytest.raises(ValueError):
        MetaEnsemble(ONE_NUMERIC, _experts(), window=0)
