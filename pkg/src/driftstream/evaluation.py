"""Stream evaluation protocols producing time-indexed metric traces."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .core import ConfusionMatrix, PredictorStatus
from .generators import InstanceStream
from .learners import Learner


@dataclass
class TraceRecord:
    seq: int
    cum_accuracy: float
    window_accuracy: float
    kappa: float
    drift_events: list[tuple[int, str, str]] = field(default_factory=list)
    active_learner: Optional[int] = None


@dataclass
class MetricTrace:
    records: list[TraceRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def drift_count(self) -> int:
        return sum(
            1 for r in self.records for _, _, status in r.drift_events if status == "drift"
        )


class _Scorer:
    """Confusion matrix plus a rolling correctness window and an event buffer."""

    def __init__(self, n_classes: int, window: int):
        self.matrix = ConfusionMatrix(n_classes)
        self.recent: deque[int] = deque(maxlen=window)
        self.pending_events: list[tuple[int, str, str]] = []
        self.scored = 0

    def score(self, y_true: int, y_pred: int) -> int:
        correct = int(y_true == y_pred)
        self.matrix.update(y_true, y_pred)
        self.recent.append(correct)
        self.scored += 1
        return correct

    def record(self, seq: int, active: Optional[int]) -> TraceRecord:
        events, self.pending_events = self.pending_events, []
        return TraceRecord(
            seq=seq,
            cum_accuracy=self.matrix.accuracy(),
            window_accuracy=sum(self.recent) / len(self.recent),
            kappa=self.matrix.kappa(),
            drift_events=events,
            active_learner=active,
        )


def _check_labeled(inst) -> None:
    if inst.y is None:
        raise ValueError(f"unlabeled sample at seq {inst.seq}")


def _drain_learner_events(learner, seq: int, scorer: _Scorer) -> None:
    drain = getattr(learner, "drain_events", None)
    if drain is None:
        return
    for detector_id, status in drain():
        scorer.pending_events.append((seq, detector_id, status))


def run_prequential(source: InstanceStream, learner: Learner,
                    report_every: int = 100, max_samples: Optional[int] = None,
                    pretrain: int = 0, window: int = 200,
                    detectors: Optional[dict] = None,
                    meta: Optional[dict] = None) -> MetricTrace:
    """Interleaved test-then-train: each sample is scored, then trained on.

    Samples arriving before the learner has fitted anything (or within the
    optional ``pretrain`` budget) are trained without being scored. External
    ``detectors`` (name -> detector) watch the correctness bit; their warning
    and drift statuses are stamped into the trace.
    """
    if report_every < 1:
        raise ValueError("report_every must be >= 1")
    scorer = _Scorer(source.schema.n_classes, window)
    detectors = detectors or {}
    consumed = 0
    last_seq = None
    last_record_at = 0
    records: list[TraceRecord] = []

    for inst in source:
        if max_samples is not None and consumed >= max_samples:
            break
        consumed += 1
        _check_labeled(inst)
        last_seq = inst.seq
        if consumed <= pretrain or not learner.fitted:
            learner.partial_fit(inst)
            _drain_learner_events(learner, inst.seq, scorer)
            continue
        pred = learner.predict(inst.x)
        correct = scorer.score(inst.y, pred)
        for name, detector in detectors.items():
            # detectors declare their polarity: drift monitors of the error
            # rate consume the error bit, windowed-mean monitors the
            # correctness bit
            if getattr(detector, "input_kind", "error") == "correctness":
                status = detector.update(float(correct))
            else:
                status = detector.update(1.0 - correct)
            if status != PredictorStatus.STABLE:
                scorer.pending_events.append((inst.seq, name, status.name.lower()))
        learner.partial_fit(inst)
        _drain_learner_events(learner, inst.seq, scorer)
        if scorer.scored - last_record_at >= report_every:
            records.append(scorer.record(inst.seq, getattr(learner, "active_index", None)))
            last_record_at = scorer.scored

    if scorer.scored == 0:
        raise ValueError("stream produced no scorable samples")
    if scorer.scored != last_record_at:
        records.append(scorer.record(last_seq, getattr(learner, "active_index", None)))
    return MetricTrace(records=records, meta=dict(meta or {}, protocol="prequential"))


def run_holdout(source: InstanceStream, learner: Learner,
                holdout_size: int, period: int,
                max_samples: Optional[int] = None,
                window: Optional[int] = None,
                audit: bool = False,
                meta: Optional[dict] = None) -> MetricTrace:
    """Periodic holdout: per cycle, train on period - holdout_size samples,
    then score the next holdout_size samples without training on them.

    The per-record window accuracy covers the last cycle's holdout by default.
    A stream exhausted mid-cycle yields a final partial record and the trace
    is flagged incomplete.
    """
    if holdout_size < 1:
        raise ValueError("holdout_size must be >= 1")
    if period <= holdout_size:
        raise ValueError("period must exceed holdout_size")
    train_per_cycle = period - holdout_size
    scorer = _Scorer(source.schema.n_classes, window or holdout_size)
    records: list[TraceRecord] = []
    scored_seqs: list[int] = []
    trained_seqs: list[int] = []
    incomplete = False
    consumed = 0
    exhausted = False

    def pull():
        nonlocal consumed, exhausted
        if max_samples is not None and consumed >= max_samples:
            exhausted = True
            return None
        try:
            inst = next(source)
        except StopIteration:
            exhausted = True
            return None
        consumed += 1
        _check_labeled(inst)
        return inst

    complete_cycles = 0
    while not exhausted:
        cycle_scored = 0
        last_seq = None
        for _ in range(train_per_cycle):
            inst = pull()
            if inst is None:
                break
            learner.partial_fit(inst)
            if audit:
                trained_seqs.append(inst.seq)
            last_seq = inst.seq
        if not exhausted:
            for _ in range(holdout_size):
                inst = pull()
                if inst is None:
                    break
                pred = learner.predict(inst.x)
                scorer.score(inst.y, pred)
                if audit:
                    scored_seqs.append(inst.seq)
                cycle_scored += 1
                last_seq = inst.seq
        if exhausted and cycle_scored < holdout_size:
            if complete_cycles == 0:
                raise ValueError("stream shorter than one full holdout cycle")
            incomplete = last_seq is not None
            if cycle_scored > 0:
                records.append(scorer.record(last_seq, None))
            break
        records.append(scorer.record(last_seq, None))
        complete_cycles += 1
    trace_meta = dict(meta or {}, protocol="holdout")
    if incomplete:
        trace_meta["incomplete_final_cycle"] = True
    if audit:
        trace_meta["scored_seqs"] = scored_seqs
        trace_meta["trained_seqs"] = trained_seqs
    return MetricTrace(records=records, meta=trace_meta)


def evaluate_pretrained(source: InstanceStream, model: Learner,
                        report_every: int = 100, max_samples: Optional[int] = None,
                        window: int = 200,
                        meta: Optional[dict] = None) -> MetricTrace:
    """Score a frozen model against a stream; the model state is never touched."""
    if not model.frozen:
        raise ValueError("evaluate_pretrained requires a frozen model")
    if report_every < 1:
        raise ValueError("report_every must be >= 1")
    scorer = _Scorer(source.schema.n_classes, window)
    records: list[TraceRecord] = []
    consumed = 0
    last_seq = None
    last_record_at = 0
    for inst in source:
        if max_samples is not None and consumed >= max_samples:
            break
        consumed += 1
        _check_labeled(inst)
        last_seq = inst.seq
        pred = model.predict(inst.x)
        scorer.score(inst.y, pred)
        if scorer.scored - last_record_at >= report_every:
            records.append(scorer.record(inst.seq, None))
            last_record_at = scorer.scored
    if scorer.scored == 0:
        raise ValueError("stream produced no scorable samples")
    if scorer.scored != last_record_at:
        records.append(scorer.record(last_seq, None))
    return MetricTrace(records=records, meta=dict(meta or {}, protocol="pretrained"))
