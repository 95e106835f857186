"""Change detectors over prediction-quality streams.

All detectors share the same contract: ``update(value)`` consumes one
observation and returns the current PredictorStatus; ``reset()`` restores the
initial configuration. Detectors that alarm on drift reset themselves so the
next update starts a fresh monitoring period (ADWIN instead shrinks its
window to the retained suffix).
"""

from __future__ import annotations

import math

from .core import PredictorStatus

STABLE = PredictorStatus.STABLE
WARNING = PredictorStatus.WARNING
DRIFT = PredictorStatus.DRIFT


class PageHinkley:
    """Page-Hinkley test on a real-valued stream.

    Accumulates m_t = sum(x_i - mean_i - delta) and alarms when m_t exceeds
    its running minimum by more than ``threshold``.
    """

    input_kind = "error"

    def __init__(self, delta: float = 0.005, threshold: float = 50.0,
                 min_instances: int = 30):
        self.delta = delta
        self.threshold = threshold
        self.min_instances = min_instances
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.mean = 0.0
        self.cum = 0.0
        self.cum_min = 0.0

    def update(self, x: float) -> PredictorStatus:
        self.n += 1
        self.mean += (x - self.mean) / self.n
        self.cum += x - self.mean - self.delta
        if self.cum < self.cum_min:
            self.cum_min = self.cum
        if self.n < self.min_instances:
            return STABLE
        if self.cum - self.cum_min > self.threshold:
            self.reset()
            return DRIFT
        return STABLE


class DDM:
    """Drift detection from the running error rate of a classifier.

    Tracks p_i (error rate) and s_i = sqrt(p_i (1 - p_i) / i); keeps the
    minimum of p + s and alarms by how far the current p + s sits above it:
    warning at 2 minimum deviations, drift at 3 (then resets).
    """

    input_kind = "error"

    def __init__(self, warning_level: float = 2.0, drift_level: float = 3.0,
                 min_instances: int = 30):
        self.warning_level = warning_level
        self.drift_level = drift_level
        self.min_instances = min_instances
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.p = 0.0
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf

    def update(self, error: int) -> PredictorStatus:
        self.n += 1
        self.p += (error - self.p) / self.n
        self.s = math.sqrt(self.p * (1.0 - self.p) / self.n)
        if self.n < self.min_instances:
            return STABLE
        if self.p + self.s <= self.p_min + self.s_min:
            self.p_min = self.p
            self.s_min = self.s
        level = self.p + self.s
        # strict inequalities: a zero-error stream (p = s = 0) must stay stable
        if level > self.p_min + self.drift_level * self.s_min:
            self.reset()
            return DRIFT
        if level > self.p_min + self.warning_level * self.s_min:
            return WARNING
        return STABLE


class EDDM:
    """Distance-between-errors variant of DDM for gradual drift.

    Monitors the mean and std of the gap (in samples) between consecutive
    errors. The quality score p' + 2 s' is compared against its historical
    maximum; shrinking gaps push the ratio below the warning/drift levels.
    """

    input_kind = "error"

    def __init__(self, alpha: float = 0.95, beta: float = 0.90,
                 min_errors: int = 30):
        self.alpha = alpha
        self.beta = beta
        self.min_errors = min_errors
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.n_errors = 0
        self.last_error_at = -1
        self.dist_mean = 0.0
        self.dist_m2 = 0.0
        self.score_max = 0.0

    def update(self, error: int) -> PredictorStatus:
        self.n += 1
        if not error:
            return STABLE
        if self.last_error_at >= 0:
            distance = self.n - self.last_error_at
            self.n_errors += 1
            delta = distance - self.dist_mean
            self.dist_mean += delta / self.n_errors
            self.dist_m2 += delta * (distance - self.dist_mean)
            std = math.sqrt(self.dist_m2 / self.n_errors)
            score = self.dist_mean + 2.0 * std
            if score > self.score_max:
                self.score_max = score
            elif self.n_errors >= self.min_errors and self.score_max > 0:
                ratio = score / self.score_max
                if ratio < self.beta:
                    self.reset()
                    return DRIFT
                if ratio < self.alpha:
                    self.last_error_at = self.n
                    return WARNING
        self.last_error_at = self.n
        return STABLE


def adwin_epsilon_cut(n0: int, n1: int, delta: float, n: int) -> float:
    """Cut threshold for comparing two sub-window means.

    m is the reciprocal-sum mean of the sub-window lengths and the delta is
    corrected by the current window length n.
    """
    m = (n0 * n1) / (n0 + n1)
    delta_prime = delta / n
    return math.sqrt(math.log(4.0 / delta_prime) / (2.0 * m))


class Adwin:
    """Adaptive windowing over a [0, 1] stream with an exponential histogram.

    The window is held as buckets of exponentially growing size (at most
    ``max_buckets`` per size level). After each insert every bucket boundary
    is tested as a cut point; if the two sides' means differ by at least the
    epsilon-cut bound the oldest bucket is dropped and the scan repeats, so
    the window shrinks to the suffix consistent with the current mean.
    """

    input_kind = "correctness"

    def __init__(self, delta: float = 0.002, max_buckets: int = 5,
                 min_window: int = 10, min_side: int = 5):
        self.delta = delta
        self.max_buckets = max_buckets
        self.min_window = min_window
        self.min_side = min_side
        self.reset()

    def reset(self) -> None:
        # _levels[l] holds sums of buckets of 2^l items, oldest first.
        self._levels: list[list[float]] = [[]]
        self.width = 0
        self.total = 0.0
        self.n_seen = 0
        self.n_detections = 0

    @property
    def mean(self) -> float:
        return self.total / self.width if self.width else 0.0

    def update(self, x: float) -> PredictorStatus:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"adwin input must be in [0, 1], got {x!r}")
        self.n_seen += 1
        self._insert(x)
        if self.width < self.min_window:
            return STABLE
        return DRIFT if self._shrink() else STABLE

    def _insert(self, x: float) -> None:
        self._levels[0].append(x)
        self.width += 1
        self.total += x
        level = 0
        while len(self._levels[level]) > self.max_buckets:
            if level + 1 == len(self._levels):
                self._levels.append([])
            merged = self._levels[level].pop(0) + self._levels[level].pop(0)
            self._levels[level + 1].append(merged)
            level += 1

    def _iter_buckets_oldest_first(self):
        for level in range(len(self._levels) - 1, -1, -1):
            size = 1 << level
            for bucket_sum in self._levels[level]:
                yield size, bucket_sum

    def _drop_oldest(self) -> None:
        for level in range(len(self._levels) - 1, -1, -1):
            if self._levels[level]:
                bucket_sum = self._levels[level].pop(0)
                self.width -= 1 << level
                self.total -= bucket_sum
                return

    def _shrink(self) -> bool:
        dropped = False
        while True:
            if self.width < self.min_window:
                return dropped
            log_term = math.log(4.0 * self.width / self.delta)
            w, s = self.width, self.total
            n0 = 0
            s0 = 0.0
            cut_here = False
            for size, bucket_sum in self._iter_buckets_oldest_first():
                n0 += size
                s0 += bucket_sum
                n1 = w - n0
                if n0 < self.min_side or n1 < self.min_side:
                    continue
                diff = s0 / n0 - (s - s0) / n1
                # compare squared means against eps_cut^2 = log_term/(2m)
                if diff * diff >= log_term * (n0 + n1) / (2.0 * n0 * n1):
                    cut_here = True
                    break
            if not cut_here:
                return dropped
            self._drop_oldest()
            if not dropped:
                self.n_detections += 1
            dropped = True


DETECTOR_KINDS = {
    "page_hinkley": PageHinkley,
    "ddm": DDM,
    "eddm": EDDM,
    "adwin": Adwin,
}

DETECTOR_PARAMS = {
    "page_hinkley": {"delta": 0.005, "threshold": 50.0, "min_instances": 30},
    "ddm": {"warning_level": 2.0, "drift_level": 3.0, "min_instances": 30},
    "eddm": {"alpha": 0.95, "beta": 0.90, "min_errors": 30},
    "adwin": {"delta": 0.002},
}


def make_detector(kind: str, **params):
    try:
        cls = DETECTOR_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown detector kind {kind!r}") from None
    return cls(**params)
