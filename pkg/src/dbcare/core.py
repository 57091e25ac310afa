"""Bandit instances, arm distributions and derived problem quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .rng import RngStream

# Hoeffding constant of any distribution supported on an interval of length 1.
BOUNDED_SIGMA = 0.5


class InvalidParameter(ValueError):
    """A parameter violates a documented precondition."""


@dataclass(frozen=True)
class Gaussian:
    mean: float
    sd: float

    def __post_init__(self):
        if not (self.sd > 0 and math.isfinite(self.sd)):
            raise InvalidParameter(f"Gaussian sd must be positive, got {self.sd}")
        if not math.isfinite(self.mean):
            raise InvalidParameter(f"Gaussian mean must be finite, got {self.mean}")

    @property
    def subgaussian(self) -> float:
        return self.sd

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        # numpy's ziggurat sampler: exact and consumed strictly in sequence.
        return self.mean + self.sd * gen.standard_normal(n)


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameter(f"Bernoulli p must lie in [0, 1], got {self.p}")

    @property
    def mean(self) -> float:
        return self.p

    @property
    def subgaussian(self) -> float:
        return BOUNDED_SIGMA

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return (gen.random(n) < self.p).astype(float)


@dataclass(frozen=True)
class Categorical:
    """Finitely supported reward in [0, 1], e.g. graded efficacy levels."""
    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise InvalidParameter("support and probs must be nonempty and of equal length")
        if min(self.probs) < 0 or abs(sum(self.probs) - 1.0) > 1e-12:
            raise InvalidParameter(f"probs must be a probability vector, got {self.probs}")
        if min(self.support) < 0 or max(self.support) > 1:
            raise InvalidParameter("support must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return float(math.fsum(v * p for v, p in zip(self.support, self.probs)))

    @property
    def subgaussian(self) -> float:
        return BOUNDED_SIGMA

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        u = gen.random(n)
        # Index = number of inner cdf edges <= u; cheaper than searchsorted
        # for the handful of levels used here.
        idx = np.zeros(n, dtype=np.intp)
        for edge in np.cumsum(self.probs)[:-1]:
            idx += u >= edge
        return np.asarray(self.support, dtype=float)[idx]


ArmDistribution = Union[Gaussian, Bernoulli, Categorical]


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple
    sigma: float
    reward_range_B: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise InvalidParameter(f"need at least 2 arms, got {len(self.arms)}")
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if not self.reward_range_B > 0:
            raise InvalidParameter(f"reward_range_B must be positive, got {self.reward_range_B}")
        worst = max(a.subgaussian for a in self.arms)
        if self.sigma < worst:
            raise InvalidParameter(f"sigma={self.sigma} is below an arm's sub-Gaussian constant {worst}")

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> np.ndarray:
        return np.array([a.mean for a in self.arms], dtype=float)

    def permuted(self, order: Sequence[int]) -> "BanditInstance":
        """Instance whose arm ``i`` is this instance's arm ``order[i]``."""
        if sorted(order) != list(range(self.K)):
            raise InvalidParameter(f"{order} is not a permutation of range({self.K})")
        return BanditInstance(tuple(self.arms[i] for i in order), self.sigma, self.reward_range_B)


@dataclass(frozen=True)
class GapProfile:
    best_mean: float
    gaps: tuple[float, ...]
    best_arm_indices: frozenset


def _maybe_shuffle(arms, order_seed):
    if order_seed is None:
        return tuple(arms)
    order = np.random.default_rng(order_seed).permutation(len(arms))
    return tuple(arms[i] for i in order)


def make_gaussian_two_arm(delta: float, sigma: float = 1.0, order_seed: int | None = None) -> BanditInstance:
    """Two Gaussian arms with means +delta/2 and -delta/2.

    Arm 0 is the better arm unless ``order_seed`` is given, in which case the
    order is shuffled deterministically from that seed.
    """
    if not delta >= 0:
        raise InvalidParameter(f"delta must be nonnegative, got {delta}")
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be positive, got {sigma}")
    arms = (Gaussian(delta / 2, sigma), Gaussian(-delta / 2, sigma))
    return BanditInstance(_maybe_shuffle(arms, order_seed), sigma, max(1.0, delta))


def make_bernoulli_two_arm(delta: float, order_seed: int | None = None) -> BanditInstance:
    if not 0.0 <= delta <= 1.0:
        raise InvalidParameter(f"delta must lie in [0, 1], got {delta}")
    arms = (Bernoulli(0.5 + delta / 2), Bernoulli(0.5 - delta / 2))
    return BanditInstance(_maybe_shuffle(arms, order_seed), BOUNDED_SIGMA, 1.0)


def make_one_sparse(K: int, delta: float, sigma: float = 1.0) -> BanditInstance:
    """One arm at mean ``delta``, the other K-1 at 0."""
    if K < 2:
        raise InvalidParameter(f"K must be at least 2, got {K}")
    if not delta > 0:
        raise InvalidParameter(f"delta must be positive, got {delta}")
    arms = (Gaussian(delta, sigma),) + tuple(Gaussian(0.0, sigma) for _ in range(K - 1))
    return BanditInstance(arms, sigma, max(1.0, delta))


def make_linear_decay(K: int, delta2: float, sigma: float = 1.0) -> BanditInstance:
    """Best arm at ``delta2``; arm k (1-based, k >= 2) at -delta2 (k-2)/(K-2)."""
    if K < 3:
        raise InvalidParameter(f"linear decay needs K >= 3, got {K}")
    if not delta2 > 0:
        raise InvalidParameter(f"delta2 must be positive, got {delta2}")
    means = [delta2] + [-delta2 * (k - 2) / (K - 2) for k in range(2, K + 1)]
    return BanditInstance(tuple(Gaussian(m, sigma) for m in means), sigma, max(1.0, 2 * delta2))


def gap_profile(instance: BanditInstance) -> GapProfile:
    means = instance.means
    best = float(means.max())
    best_set = frozenset(int(i) for i in np.flatnonzero(means == best))
    # Exclude exactly one best arm; further tied-best arms contribute zero gaps.
    others = np.delete(means, min(best_set))
    gaps = tuple(float(g) for g in np.sort(best - others))
    return GapProfile(best, gaps, best_set)


def complexity_H(instance: BanditInstance) -> float:
    gaps = np.asarray(gap_profile(instance).gaps)
    if np.any(gaps == 0):
        return math.inf
    return float(np.sum(1.0 / gaps**2))


def sample(instance: BanditInstance, arm_index: int, stream: RngStream) -> float:
    """One reward from arm ``arm_index``; advances the stream."""
    if not 0 <= arm_index < instance.K:
        raise IndexError(f"arm index {arm_index} out of range for K={instance.K}")
    return float(stream.draw(instance.arms[arm_index], arm_index, 1)[0])
