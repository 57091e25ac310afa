"""Sampling policies for cost-aware best-arm identification.

Each ``run_*`` function is a pure function of ``(instance, spec, stream)`` and
returns a :class:`Trace`.  All logarithms are natural.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import BanditInstance, InvalidParameter
from .rng import RngStream

MI = "mi"
SR = "sr"
RISK_KINDS = (MI, SR)

_FIRST_CHUNK = 16
_MAX_CHUNK = 1 << 14


def _check_kind(kind):
    if kind not in RISK_KINDS:
        raise InvalidParameter(f"risk kind must be one of {RISK_KINDS}, got {kind!r}")


@dataclass(frozen=True)
class Trace:
    recommended_arm: int
    stopping_time_tau: int
    pulls_per_arm: tuple[int, ...]
    epochs_completed: int = 0


# -- policy specifications ---------------------------------------------------

@dataclass(frozen=True)
class Dbcare:
    """Elimination with a dynamic per-arm budget.

    ``nstar`` may be a callable ``k -> N*(k)`` or a sequence indexed by ``k``
    (entries 0 and 1 unused); ``delta`` overrides the confidence level.
    ``two_arm`` selects the tighter two-arm parameterization when ``K == 2``.
    """
    risk_kind: str
    cost: float
    sigma: float
    B: Optional[float] = None
    nstar: Union[None, Callable[[int], float], Sequence[float]] = None
    delta: Optional[float] = None
    two_arm: bool = True

    def __post_init__(self):
        _check_kind(self.risk_kind)
        if not self.cost > 0:
            raise InvalidParameter(f"cost must be positive, got {self.cost}")
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if self.B is not None and not self.B > 0:
            raise InvalidParameter(f"B must be positive, got {self.B}")
        if self.risk_kind == SR and self.B is None and self.delta is None:
            raise InvalidParameter("simple-regret DBCARE needs the reward range B (or an explicit delta)")
        if self.delta is not None and not 0 <= self.delta < 1:
            raise InvalidParameter(f"delta must lie in [0, 1), got {self.delta}")

    def schedule(self, k: int) -> float:
        if self.nstar is None:
            return nstar_mi(k, self.cost) if self.risk_kind == MI else nstar_sr(k, self.cost, self.sigma)
        if callable(self.nstar):
            return float(self.nstar(k))
        return float(self.nstar[k])

    def confidence(self, K: int) -> float:
        if self.delta is not None:
            return self.delta
        two = self.two_arm and K == 2
        if self.risk_kind == MI:
            return delta_mi(K, self.cost, two_arm=two)
        return delta_sr(K, self.cost, self.sigma, self.B, two_arm=two)


@dataclass(frozen=True)
class OracleTwoArm:
    risk_kind: str
    known_delta: float
    cost: float
    sigma: float

    def __post_init__(self):
        _check_kind(self.risk_kind)
        if not self.known_delta >= 0:
            raise InvalidParameter(f"known_delta must be nonnegative, got {self.known_delta}")
        if not (self.cost > 0 and self.sigma > 0):
            raise InvalidParameter("cost and sigma must be positive")


@dataclass(frozen=True)
class SequentialHalving:
    budget: int

    def __post_init__(self):
        if int(self.budget) != self.budget or self.budget < 1:
            raise InvalidParameter(f"budget must be a positive integer, got {self.budget}")


@dataclass(frozen=True)
class RacingFixedConfidence:
    delta: float
    sigma: float
    safeguard_cap: int

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InvalidParameter(f"delta must lie in (0, 1), got {self.delta}")
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if int(self.safeguard_cap) != self.safeguard_cap or self.safeguard_cap < 1:
            raise InvalidParameter(f"safeguard_cap must be a positive integer, got {self.safeguard_cap}")


@dataclass(frozen=True)
class Guess:
    pass


PolicySpec = Union[Dbcare, OracleTwoArm, SequentialHalving, RacingFixedConfidence, Guess]


def safeguard_cap_for(cost: float) -> int:
    """Total-sample safeguard of the fixed-confidence baseline: ceil(10 / c)."""
    return math.ceil(10.0 / cost)


# -- schedules and confidence -----------------------------------------------

def confidence_radius(n, K: int, delta: float, sigma: float):
    """sqrt(4 sigma^2 log(K n / delta) / n); vectorized over ``n``.

    ``delta == 0`` gives an infinite radius (nothing is ever eliminated).
    """
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise InvalidParameter("epoch count n must be >= 1")
    if delta == 0:
        out = np.full_like(n_arr, np.inf)
    else:
        ratio = K * n_arr / delta
        if np.any(ratio <= 1):
            raise InvalidParameter(f"K n / delta must exceed 1 (K={K}, delta={delta})")
        out = np.sqrt(4.0 * sigma**2 * np.log(ratio) / n_arr)
    return float(out) if out.ndim == 0 else out


def nstar_mi(k: int, c: float) -> float:
    """Per-arm epoch budget 1/(k e c) while k arms survive."""
    if k < 2 or not c > 0:
        raise InvalidParameter(f"need k >= 2 and c > 0, got k={k}, c={c}")
    return 1.0 / (k * math.e * c)


def nstar_sr(k: int, c: float, sigma: float) -> float:
    if k < 2 or not c > 0 or not sigma > 0:
        raise InvalidParameter(f"need k >= 2, c > 0, sigma > 0, got k={k}, c={c}, sigma={sigma}")
    return 1.5 / math.e * sigma ** (2 / 3) * ((k - 1) * c) ** (-2 / 3)


def _in_unit(delta, name):
    if not 0 < delta < 1:
        raise InvalidParameter(f"{name} gives delta={delta} outside (0, 1)")
    return delta


def delta_mi(K: int, c: float, two_arm: bool = False) -> float:
    """Confidence level of the misidentification parameterization."""
    if K < 2 or not c > 0:
        raise InvalidParameter(f"need K >= 2 and c > 0, got K={K}, c={c}")
    if two_arm:
        return _in_unit(c / (1 + 2 * c * nstar_mi(2, c)), "delta_mi")
    return _in_unit(c / (1 + 2 * c * math.log(K) * nstar_mi(2, c)), "delta_mi")


def delta_sr(K: int, c: float, sigma: float, B: float, two_arm: bool = False) -> float:
    if K < 2 or not c > 0 or not B > 0:
        raise InvalidParameter(f"need K >= 2, c > 0, B > 0, got K={K}, c={c}, B={B}")
    n2 = nstar_sr(2, c, sigma)
    if two_arm:
        return _in_unit(c / (B + 2 * c * n2), "delta_sr")
    return _in_unit(c / (B + math.e * K ** (1 / 3) * math.log(K) * n2), "delta_sr")


# -- shared machinery --------------------------------------------------------

def _argmax_random(values: np.ndarray, candidates: np.ndarray, stream: RngStream) -> int:
    best = values.max()
    return stream.choice(candidates[values == best])


def _eliminate(instance: BanditInstance, stream: RngStream, delta: float, sigma: float,
               last_epoch: Callable[[int, int, int], float]):
    """Equal-sampling elimination loop shared by DBCARE and racing.

    ``last_epoch(size, n, t)`` is the largest epoch index that may still be
    played while ``size`` arms survive, given ``n`` completed epochs and ``t``
    total pulls.  Rewards are drawn in chunks; draws past the epoch at which an
    elimination happens are handed back to the stream, so the outcome does not
    depend on the chunk size.
    """
    K = instance.K
    alive = np.arange(K)
    sums = np.zeros(K)
    pulls = np.zeros(K, dtype=np.int64)
    n = 0
    chunk = _FIRST_CHUNK
    while len(alive) > 1:
        limit = last_epoch(len(alive), n, int(pulls.sum()))
        if n >= limit:
            break
        m = int(min(chunk, limit - n))
        chunk = min(2 * chunk, _MAX_CHUNK)
        draws = np.stack([stream.draw(instance.arms[a], int(a), m) for a in alive])
        cum = sums[alive, None] + np.cumsum(draws, axis=1)
        epochs = np.arange(n + 1, n + m + 1)
        means = cum / epochs
        radius = confidence_radius(epochs, K, delta, sigma)
        out = (means.max(axis=0) - means) > radius
        hit = np.flatnonzero(out.any(axis=0))
        j = int(hit[0]) if len(hit) else m - 1
        for row, a in enumerate(alive):
            stream.unread(int(a), draws[row, j + 1:])
        sums[alive] = cum[:, j]
        pulls[alive] += j + 1
        n += j + 1
        if len(hit):
            alive = alive[~out[:, j]]
    means = sums[alive] / max(n, 1)
    rec = _argmax_random(means, alive, stream)
    return Trace(rec, int(pulls.sum()), tuple(int(p) for p in pulls), n)


# -- policies ----------------------------------------------------------------

def run_dbcare(instance: BanditInstance, spec: Dbcare, stream: RngStream) -> Trace:
    K = instance.K
    delta = spec.confidence(K)
    budgets = {k: spec.schedule(k) for k in range(2, K + 1)}
    if budgets[K] < 1:
        warnings.warn(f"N*({K}) = {budgets[K]:.3g} < 1: the first epoch already exceeds the budget",
                      stacklevel=2)
    # Epoch n+1 is played iff n <= N*(|S|), i.e. up to floor(N*) + 1 epochs.
    return _eliminate(instance, stream, delta, spec.sigma,
                      lambda size, n, t: math.floor(budgets[size]) + 1)


def run_racing(instance: BanditInstance, spec: RacingFixedConfidence, stream: RngStream) -> Trace:
    """Fixed-confidence elimination; stops at the last full epoch fitting the cap."""
    cap = spec.safeguard_cap
    return _eliminate(instance, stream, spec.delta, spec.sigma,
                      lambda size, n, t: n + (cap - t) // size)


def oracle_pulls(risk_kind: str, delta: float, sigma: float, c: float) -> int:
    """Per-arm pull count of the gap-aware two-arm policy."""
    _check_kind(risk_kind)
    if delta <= 0:
        return 0
    power = 2 if risk_kind == MI else 3
    arg = delta**power / (8 * sigma**2 * c)
    if arg <= 1:
        return 0
    return max(0, math.ceil(4 * sigma**2 / delta**2 * math.log(arg)))


def run_oracle_two_arm(instance: BanditInstance, spec: OracleTwoArm, stream: RngStream) -> Trace:
    if instance.K != 2:
        raise InvalidParameter(f"the oracle policy is two-armed, got K={instance.K}")
    m = oracle_pulls(spec.risk_kind, spec.known_delta, spec.sigma, spec.cost)
    arms = np.arange(2)
    if m == 0:
        return Trace(stream.choice(arms), 0, (0, 0), 0)
    means = np.array([stream.draw(instance.arms[a], a, m).mean() for a in arms])
    return Trace(_argmax_random(means, arms, stream), 2 * m, (m, m), m)


def run_sequential_halving(instance: BanditInstance, spec: SequentialHalving, stream: RngStream) -> Trace:
    K, T = instance.K, int(spec.budget)
    if T < K:
        raise InvalidParameter(f"budget T={T} is smaller than K={K}")
    rounds = math.ceil(math.log2(K))
    alive = np.arange(K)
    sums = np.zeros(K)
    pulls = np.zeros(K, dtype=np.int64)
    used = 0
    for r in range(rounds):
        per_arm = max(1, T // (len(alive) * rounds))
        per_arm = min(per_arm, (T - used) // len(alive))
        if per_arm > 0:
            for a in alive:
                sums[a] += stream.draw(instance.arms[a], int(a), per_arm).sum()
            pulls[alive] += per_arm
            used += per_arm * len(alive)
        with np.errstate(invalid="ignore"):
            means = np.where(pulls[alive] > 0, sums[alive] / np.maximum(pulls[alive], 1), 0.0)
        keep = math.ceil(len(alive) / 2)
        # Random tie-break: sort by (-mean, random key).
        keys = stream.control.random(len(alive))
        order = np.lexsort((keys, -means))
        alive = np.sort(alive[order[:keep]])
    return Trace(int(alive[0]), used, tuple(int(p) for p in pulls), rounds)


def run_guess(instance: BanditInstance, stream: RngStream) -> Trace:
    return Trace(stream.choice(np.arange(instance.K)), 0, (0,) * instance.K, 0)


def run_policy(instance: BanditInstance, spec: PolicySpec, stream: RngStream) -> Trace:
    if isinstance(spec, Dbcare):
        return run_dbcare(instance, spec, stream)
    if isinstance(spec, OracleTwoArm):
        return run_oracle_two_arm(instance, spec, stream)
    if isinstance(spec, SequentialHalving):
        return run_sequential_halving(instance, spec, stream)
    if isinstance(spec, RacingFixedConfidence):
        return run_racing(instance, spec, stream)
    if isinstance(spec, Guess):
        return run_guess(instance, stream)
    raise TypeError(f"unknown policy spec {spec!r}")
