"""Online bagging ensembles with Poisson instance weighting."""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from ..core import Instance
from ..drift import DRIFT, Adwin
from .base import Learner, ensemble_vote, poisson


class OzaBagging(Learner):
    """Online bagging: each member trains k ~ Poisson(lambda) times per instance."""

    algorithm = "oza_bagging"
    poisson_lambda = 1.0
    member_adwin = False

    def __init__(self, schema, seed: int = 0, default_class=None,
                 n_members: int = 10,
                 member_factory: Optional[Callable[[int], Learner]] = None):
        super().__init__(schema, seed, default_class)
        if n_members < 1:
            raise ValueError("n_members must be >= 1")
        if member_factory is None:
            from .tree import HoeffdingTree

            def member_factory(member_seed: int) -> Learner:
                return HoeffdingTree(schema, seed=member_seed)

        self._factory = member_factory
        self.members = [member_factory(self._rng.getrandbits(32))
                        for _ in range(n_members)]
        self.detectors = [Adwin() for _ in self.members] if self.member_adwin else None

    def _learn(self, inst: Instance) -> None:
        if self.detectors is not None:
            drifted = False
            for member, detector in zip(self.members, self.detectors):
                if member.fitted:
                    error = float(member.predict(inst.x) != inst.y)
                else:
                    error = 1.0
                if detector.update(error) == DRIFT:
                    drifted = True
            if drifted:
                self._reset_worst()
        for member in self.members:
            for _ in range(poisson(self.poisson_lambda, self._rng)):
                member.partial_fit(inst)

    def _reset_worst(self) -> None:
        worst = max(range(len(self.members)), key=lambda i: self.detectors[i].mean)
        self.members[worst] = self._factory(self._rng.getrandbits(32))
        self.detectors[worst] = Adwin()
        self._events.append((f"{self.algorithm}.member{worst}", "drift"))

    def _predict(self, x: Sequence[float]) -> int:
        votes = [(m.predict(x), 1.0) for m in self.members if m.fitted]
        if not votes:
            return self.default_class if self.default_class is not None else 0
        return ensemble_vote(votes)


class OzaBaggingAdwin(OzaBagging):
    """Oza bagging plus a per-member adaptive-window error monitor; a drift
    signal resets the worst member."""

    algorithm = "oza_bagging_adwin"
    member_adwin = True


class LeveragingBagging(OzaBaggingAdwin):
    """Higher-variance bagging (lambda = 6) with the same member monitoring."""

    algorithm = "leveraging_bagging"
    poisson_lambda = 6.0
