"""Adaptive selection, weight adaptation and annealing acceptance."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from ..exceptions import ParameterError

# keeps weights strictly positive when eta == 1 and an operator scored nothing
MIN_WEIGHT = 1e-12


@dataclass
class SearchParams:
    iterations: int = 25000
    segment_length: int = 100
    sigma1: float = 33.0
    sigma2: float = 13.0
    sigma3: float = 9.0
    eta: float = 0.1
    cooling_theta: float = 0.99975
    tstart_worse_fraction: float = 0.2
    tstart_accept_prob: float = 0.3
    destroy_fraction_range: tuple = (0.1, 0.4)
    # absolute floor on removed sub-nodes; small instances otherwise only
    # ever see one- or two-node neighbourhoods
    min_removed: int = 4
    seed: int = 0

    def __post_init__(self):
        self.destroy_fraction_range = tuple(float(x) for x in self.destroy_fraction_range)
        if self.iterations < 0:
            raise ParameterError("iterations must be nonnegative")
        if self.segment_length < 1:
            raise ParameterError("segment_length must be positive")
        if not self.sigma1 > self.sigma2 > self.sigma3 > 0:
            raise ParameterError("scores must satisfy sigma1 > sigma2 > sigma3 > 0")
        if not 0 <= self.eta <= 1:
            raise ParameterError("eta must lie in [0, 1]")
        if not 0 < self.cooling_theta < 1:
            raise ParameterError("cooling_theta must lie in (0, 1)")
        if not 0 < self.tstart_worse_fraction:
            raise ParameterError("tstart_worse_fraction must be positive")
        if not 0 < self.tstart_accept_prob < 1:
            raise ParameterError("tstart_accept_prob must lie in (0, 1)")
        if self.min_removed < 1:
            raise ParameterError("min_removed must be positive")
        lo, hi = self.destroy_fraction_range
        if not 0 < lo <= hi <= 1:
            raise ParameterError("destroy_fraction_range must satisfy 0 < low <= high <= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["destroy_fraction_range"] = list(self.destroy_fraction_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchParams":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown search parameters: {sorted(extra)}")
        return cls(**d)


def select_weighted(weights, rng) -> int:
    """Roulette-wheel index with probability ``w[o] / sum(w)``."""
    if len(weights) == 0:
        raise ParameterError("empty weight list")
    total = 0.0
    for w in weights:
        if not w > 0:
            raise ParameterError(f"nonpositive weight {w}")
        total += w
    r = rng.random() * total
    acc = 0.0
    for k, w in enumerate(weights):
        acc += w
        if r < acc:
            return k
    return len(weights) - 1


def initial_temperature(f0: float, worse_fraction: float = 0.2, accept_prob: float = 0.3) -> float:
    """Temperature at which a solution ``worse_fraction`` worse than ``f0`` is
    accepted with probability ``accept_prob``."""
    if not 0 < accept_prob < 1:
        raise ParameterError("accept_prob must lie in (0, 1)")
    if not worse_fraction > 0:
        raise ParameterError("worse_fraction must be positive")
    if not f0 > 0:
        raise ParameterError("f0 must be positive")
    return worse_fraction * f0 / -math.log(accept_prob)


def accept(candidate_cost: float, current_cost: float, T: float, rng) -> bool:
    if candidate_cost <= current_cost:
        return True
    return rng.random() < math.exp(-(candidate_cost - current_cost) / T)


@dataclass
class Pool:
    names: list
    weights: list
    scores: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    usage: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.names)
        self.scores = self.scores or [0.0] * n
        self.counts = self.counts or [0] * n
        self.usage = self.usage or [0] * n

    def index(self, name) -> int:
        return self.names.index(name)

    def probabilities(self, among=None) -> list:
        idx = range(len(self.names)) if among is None else [self.index(n) for n in among]
        tot = sum(self.weights[k] for k in idx)
        return [self.weights[k] / tot for k in idx]


@dataclass
class OperatorBank:
    """Weighted pools for subproblems, destroy and repair operators."""

    pools: dict

    @classmethod
    def create(cls, subproblems, destroys, repairs, initial_weight=1.0):
        mk = lambda names: Pool(list(names), [float(initial_weight)] * len(names))
        return cls({"subproblem": mk(subproblems), "destroy": mk(destroys), "repair": mk(repairs)})

    def select(self, pool, rng, among=None) -> str:
        p = self.pools[pool]
        if among is None:
            return p.names[select_weighted(p.weights, rng)]
        idx = [p.index(n) for n in among]
        return p.names[idx[select_weighted([p.weights[k] for k in idx], rng)]]

    def credit(self, pool, name, score):
        p = self.pools[pool]
        k = p.index(name)
        p.scores[k] += score
        p.counts[k] += 1
        p.usage[k] += 1

    def stats(self) -> dict:
        return {pool: {n: {"weight": p.weights[k], "usage": p.usage[k]} for k, n in enumerate(p.names)}
                for pool, p in self.pools.items()}


def update_weights(bank: OperatorBank, eta: float) -> OperatorBank:
    """Blend weights with mean segment score; operators unused in the segment
    keep their weight. Resets segment scores and counts."""
    for p in bank.pools.values():
        for k in range(len(p.names)):
            if p.counts[k] > 0:
                w = (1 - eta) * p.weights[k] + eta * p.scores[k] / p.counts[k]
                p.weights[k] = max(w, MIN_WEIGHT)
            p.scores[k] = 0.0
            p.counts[k] = 0
    return bank
