"""Closed-form risk lower bounds, upper-bound envelopes and numeric oracles.

Lower bounds ("hard" functions) have two phases: a large-gap branch where
sampling pays off and a small-gap branch where guessing is optimal.  The
numeric oracles re-derive those values by directly minimizing the convex
auxiliary objective over the expected stopping time, without using the closed
forms, so the two routes check each other.  Logarithms are natural.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .core import InvalidParameter
from .optimize import golden_section_max, golden_section_min


class Regime(str, enum.Enum):
    LARGE_GAP = "large_gap"
    SMALL_GAP = "small_gap"


class BoundValue(NamedTuple):
    value: float
    regime: Regime


def _check_scale(sigma, c):
    if not (sigma > 0 and c > 0):
        raise InvalidParameter(f"sigma and c must be positive, got sigma={sigma}, c={c}")


def hardmi_two_arm(delta: float, sigma: float, c: float, branch: Optional[Regime] = None) -> BoundValue:
    """Two-arm misidentification lower bound; ``branch`` forces a phase."""
    _check_scale(sigma, c)
    if delta < 0:
        raise InvalidParameter(f"delta must be nonnegative, got {delta}")
    s2c = sigma**2 * c
    regime = branch or (Regime.LARGE_GAP if delta >= math.sqrt(s2c) else Regime.SMALL_GAP)
    if regime is Regime.SMALL_GAP:
        return BoundValue(0.25, regime)
    return BoundValue(s2c / (4 * delta**2) * math.log(math.e * delta**2 / s2c), regime)


def hardsr_two_arm(delta: float, sigma: float, c: float, branch: Optional[Regime] = None) -> BoundValue:
    _check_scale(sigma, c)
    if delta < 0:
        raise InvalidParameter(f"delta must be nonnegative, got {delta}")
    s2c = sigma**2 * c
    regime = branch or (Regime.LARGE_GAP if delta >= s2c ** (1 / 3) else Regime.SMALL_GAP)
    if regime is Regime.SMALL_GAP:
        return BoundValue(delta / 4, regime)
    return BoundValue(s2c / (4 * delta**2) * math.log(math.e * delta**3 / s2c), regime)


def hardmi_k(H: float, sigma: float, c: float, branch: Optional[Regime] = None) -> BoundValue:
    """K-arm misidentification lower bound in terms of the complexity H."""
    _check_scale(sigma, c)
    if not H > 0:
        raise InvalidParameter(f"H must be positive, got {H}")
    x = sigma**2 * c * H
    regime = branch or (Regime.LARGE_GAP if x <= 1 else Regime.SMALL_GAP)
    if regime is Regime.SMALL_GAP:
        return BoundValue(0.25, regime)
    return BoundValue(x / 4 * math.log(math.e / x), regime)


def hardsr_k(H: float, delta2: float, sigma: float, c: float, branch: Optional[Regime] = None) -> BoundValue:
    _check_scale(sigma, c)
    if not H > 0 or delta2 < 0:
        raise InvalidParameter(f"need H > 0 and delta2 >= 0, got H={H}, delta2={delta2}")
    x = sigma**2 * c * H
    # H / delta2 <= 1 / (sigma^2 c), written without dividing by delta2.
    regime = branch or (Regime.LARGE_GAP if x <= delta2 else Regime.SMALL_GAP)
    if regime is Regime.SMALL_GAP:
        return BoundValue(delta2 / 4, regime)
    return BoundValue(x / 4 * math.log(math.e * delta2 / x), regime)


def hardsr_star(K: int, sigma: float, c: float) -> float:
    """Minimax simple-regret lower bound over all K-arm instances."""
    _check_scale(sigma, c)
    if K < 2:
        raise InvalidParameter(f"K must be at least 2, got {K}")
    return 0.375 * ((K - 1) * sigma**2 * c / math.e) ** (1 / 3)


# -- upper-bound envelopes ----------------------------------------------------

TWO_ARM_CURVES = ("OracleMI", "OracleSR", "DbcareMI2", "DbcareSR2")
K_ARM_CURVES = ("DbcareMIK", "DbcareSRK")


@dataclass(frozen=True)
class BoundQuery:
    """Point at which a bound is evaluated: a two-arm gap or a K-arm profile."""
    sigma: float
    cost: float
    delta: Optional[float] = None
    H: Optional[float] = None
    delta2: Optional[float] = None
    K: Optional[int] = None
    B: Optional[float] = None

    @classmethod
    def two_arm(cls, delta, sigma, cost, B=None):
        return cls(sigma, cost, delta=delta, B=B)

    @classmethod
    def k_arm(cls, H, delta2, K, sigma, cost, B=None):
        return cls(sigma, cost, H=H, delta2=delta2, K=K, B=B)

    @property
    def is_two_arm(self) -> bool:
        return self.delta is not None


def _need_B(q: BoundQuery):
    if q.B is None or not q.B > 0:
        raise InvalidParameter("simple-regret upper bounds need a positive B")
    return q.B


def upper_curve(policy: str, q: BoundQuery) -> float:
    """Upper-bound envelope of ``policy``'s worst-case risk at query ``q``."""
    s, c = q.sigma, q.cost
    if policy in TWO_ARM_CURVES:
        if not q.is_two_arm:
            raise InvalidParameter(f"{policy} needs a two-arm query (delta)")
        d = q.delta
        if policy == "OracleMI":
            return 32 * hardmi_two_arm(d, s, c).value + 2 * c
        if policy == "OracleSR":
            return 32 * hardsr_two_arm(d, s, c).value + 2 * c
        if policy == "DbcareMI2":
            factor = 128 * math.log((math.e + 1) / (math.e * c) ** 2)
            return factor * hardmi_two_arm(d, s, c).value + 3 * c
        lb = hardsr_two_arm(d, s, c)
        if lb.regime is Regime.LARGE_GAP:
            factor = 128 * math.log(3 * _need_B(q) * s ** (4 / 3) / c ** (5 / 3))
            return factor * lb.value + 3 * c
        return 4 * lb.value + 2 * (s**2 * c) ** (1 / 3) + 3 * c
    if policy in K_ARM_CURVES:
        if q.H is None or q.K is None:
            raise InvalidParameter(f"{policy} needs a K-arm query (H, K)")
        K = q.K
        logK = math.log(K)
        if policy == "DbcareMIK":
            factor = 760 * logK * math.log(K * logK / (math.e * c**2))
            return factor * hardmi_k(q.H, s, c).value + (K + 1) * c
        if q.delta2 is None:
            raise InvalidParameter("DbcareSRK needs delta2")
        lb = hardsr_k(q.H, q.delta2, s, c)
        if lb.regime is Regime.LARGE_GAP:
            factor = 550 * logK * math.log(K * logK * _need_B(q) * s ** (4 / 3) / c ** (5 / 3))
            return factor * lb.value + (K + 1) * c
        return lb.value + 4 * logK * (K * s**2 * c) ** (1 / 3) + (K + 1) * c
    raise InvalidParameter(f"unknown upper curve {policy!r}")


def upper_minimax(policy: str, K: int, sigma: float, c: float) -> float:
    """Worst-case (over instances) simple-regret envelope."""
    star = hardsr_star(K, sigma, c)
    if policy == "OracleSR":
        return 8 * star + 2 * c
    if policy == "DbcareSR2":
        return 9 * star + 3 * c
    if policy == "DbcareSRK":
        return 20 * math.log(K) * star + (K + 1) * c
    raise InvalidParameter(f"no minimax envelope for {policy!r}")


# -- numeric oracles ----------------------------------------------------------

def _phase_objective(scale, H, sigma, c):
    rate = 2.0 / (sigma**2 * H)
    return lambda x: scale / 4 * math.exp(-rate * x) + c / 2 * x


def numeric_phase_oracle_mi(H: float, sigma: float, c: float):
    """Minimize the auxiliary objective over the expected stopping time.

    Returns ``(argmin, min value)``; the minimum is the misidentification
    lower bound for complexity ``H``.
    """
    _check_scale(sigma, c)
    f = _phase_objective(1.0, H, sigma, c)
    hi = 10 * sigma**2 * H * max(1.0, math.log(1 / (sigma**2 * c * H)))
    return golden_section_min(f, 0.0, hi)


def numeric_phase_oracle_sr(H: float, delta2: float, sigma: float, c: float):
    _check_scale(sigma, c)
    if delta2 == 0:
        return 0.0, 0.0
    f = _phase_objective(delta2, H, sigma, c)
    hi = 10 * sigma**2 * H * max(1.0, math.log(delta2 / (sigma**2 * c * H)))
    return golden_section_min(f, 0.0, hi)


def numeric_minimax_oracle_sr(K: int, sigma: float, c: float):
    """Maximize the simple-regret lower bound over one-sparse gaps.

    The instance with one arm ``delta`` above K-1 identical arms has
    ``H = (K-1)/delta^2`` and smallest gap ``delta``.  Returns
    ``(argmax delta, max value)``.
    """
    _check_scale(sigma, c)
    if K < 2:
        raise InvalidParameter(f"K must be at least 2, got {K}")

    def g(d):
        if d <= 0:
            return 0.0
        return hardsr_k((K - 1) / d**2, d, sigma, c).value

    # The phase boundary sets the natural scale of the problem.
    scale = ((K - 1) * sigma**2 * c) ** (1 / 3)
    return golden_section_max(g, 0.0, 100 * scale)
