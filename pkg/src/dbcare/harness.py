"""Monte Carlo risk evaluation and experiment sweeps."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import core
from .core import BanditInstance, Bernoulli, Categorical, InvalidParameter
from .policies import (MI, RISK_KINDS, Dbcare, Guess, OracleTwoArm, PolicySpec,
                       RacingFixedConfidence, SequentialHalving, run_policy, safeguard_cap_for)
from .rng import RngStream, derive_seed

WORKERS_ENV = "DBCARE_WORKERS"

SETTINGS = ("TwoArmGaussian", "TwoArmBernoulli", "OneSparse", "LinearDecay", "DrugBinary", "DrugLeveled")
DRUG_SETTINGS = ("DrugBinary", "DrugLeveled")

CSV_HEADER = ("setting", "policy", "grid_value", "K", "runs", "mean_risk", "se_risk",
              "mean_tau", "misid_rate", "mean_simple_regret")

BINARY_MEANS = (0.537, 0.469, 0.465, 0.360, 0.340)
LEVELED_MEANS = (0.230, 0.227, 0.200, 0.196, 0.102)
LEVELS = (0.0, 0.2, 0.5, 0.7)


@dataclass(frozen=True)
class RiskConfig:
    risk_kind: str
    cost: float

    def __post_init__(self):
        if self.risk_kind not in RISK_KINDS:
            raise InvalidParameter(f"risk_kind must be one of {RISK_KINDS}, got {self.risk_kind!r}")
        if not self.cost > 0:
            raise InvalidParameter(f"cost must be positive, got {self.cost}")


@dataclass(frozen=True)
class RiskEstimate:
    mean_risk: float
    se_risk: float
    mean_tau: float
    misid_rate: float
    mean_simple_regret: float
    runs: int
    max_tau: int = 0


@dataclass(frozen=True)
class Outcomes:
    """Per-replication results, in replication-index order."""
    recommended: np.ndarray
    tau: np.ndarray
    misid: np.ndarray
    regret: np.ndarray


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _simulate_block(instance, policy, master_seed, start, stop, shuffle_arms):
    n = stop - start
    rec = np.empty(n, dtype=np.int64)
    tau = np.empty(n, dtype=np.int64)
    misid = np.empty(n, dtype=bool)
    regret = np.empty(n)
    best = instance.means.max()
    for i, r in enumerate(range(start, stop)):
        stream = RngStream(master_seed, r)
        inst = instance
        if shuffle_arms:
            inst = instance.permuted(stream.control.permutation(instance.K))
        trace = run_policy(inst, policy, stream)
        mu = inst.arms[trace.recommended_arm].mean
        rec[i] = trace.recommended_arm
        tau[i] = trace.stopping_time_tau
        # Ties in true means count as a correct identification.
        misid[i] = mu != best
        regret[i] = best - mu
    return rec, tau, misid, regret


def simulate(instance: BanditInstance, policy: PolicySpec, runs: int, master_seed: int,
             shuffle_arms: bool = False, workers: Optional[int] = None) -> Outcomes:
    """Run ``runs`` independent replications; replication ``r`` uses
    ``RngStream(master_seed, r)`` whatever the number of workers."""
    if runs < 1:
        raise InvalidParameter(f"runs must be >= 1, got {runs}")
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or runs < 2 * workers:
        parts = [_simulate_block(instance, policy, master_seed, 0, runs, shuffle_arms)]
    else:
        edges = np.linspace(0, runs, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_block, instance, policy, master_seed, int(a), int(b), shuffle_arms)
                       for a, b in zip(edges[:-1], edges[1:])]
            parts = [f.result() for f in futures]
    return Outcomes(*(np.concatenate(cols) for cols in zip(*parts)))


def aggregate(out: Outcomes, risk: RiskConfig) -> RiskEstimate:
    penalty = out.misid.astype(float) if risk.risk_kind == MI else out.regret
    per_run = penalty + risk.cost * out.tau
    runs = len(per_run)
    se = float(np.std(per_run, ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
    return RiskEstimate(
        mean_risk=float(np.mean(per_run)),
        se_risk=se,
        mean_tau=float(np.mean(out.tau)),
        misid_rate=float(np.mean(out.misid)),
        mean_simple_regret=float(np.mean(out.regret)),
        runs=runs,
        max_tau=int(out.tau.max()),
    )


def evaluate_risk(instance: BanditInstance, policy: PolicySpec, risk: RiskConfig, runs: int,
                  master_seed: int, shuffle_arms: bool = False, workers: Optional[int] = None) -> RiskEstimate:
    """Monte Carlo estimate of the penalty-plus-cost risk of ``policy``."""
    return aggregate(simulate(instance, policy, runs, master_seed, shuffle_arms, workers), risk)


# -- drug-discovery instances --------------------------------------------------

def _leveled_probs(p20: float, mean: float) -> tuple[float, ...]:
    # P(>=ACR50) = b, P(ACR70) = b/2; then mean = 0.2 p20 + 0.4 b.
    b = (mean - 0.2 * p20) / 0.4
    d = b / 2
    return (1 - p20, p20 - b, b - d, d)


def drug_instances() -> tuple[BanditInstance, BanditInstance]:
    """Binary (responder or not) and leveled (graded response) five-arm instances.

    Arms are listed best first; the harness shuffles them per replication.
    """
    binary = BanditInstance(tuple(Bernoulli(p) for p in BINARY_MEANS), core.BOUNDED_SIGMA, 1.0)
    leveled = BanditInstance(
        tuple(Categorical(LEVELS, _leveled_probs(p, m)) for p, m in zip(BINARY_MEANS, LEVELED_MEANS)),
        core.BOUNDED_SIGMA, 1.0)
    return binary, leveled


# -- sweeps --------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    """Experiment grid.

    ``grid`` holds gaps (two-arm, one-sparse), smallest gaps (linear decay) or
    costs (drug settings).  ``policies`` are templates such as
    ``{"name": "racing", "delta": 0.1}`` resolved at each grid point.
    ``B=None`` uses the instance's own reward range.
    """
    setting: str
    grid: tuple
    policies: tuple
    risk: str = MI
    cost: float = 1e-4
    K: int = 2
    sigma: float = 1.0
    B: Optional[float] = None
    runs: int = 1000
    master_seed: int = 0
    shuffle_arms: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "policies", tuple(dict(p) for p in self.policies))
        if self.setting not in SETTINGS:
            raise InvalidParameter(f"setting must be one of {SETTINGS}, got {self.setting!r}")
        if not self.grid:
            raise InvalidParameter("grid must be nonempty")
        if not self.policies:
            raise InvalidParameter("policies must be nonempty")
        if self.risk not in RISK_KINDS:
            raise InvalidParameter(f"risk must be one of {RISK_KINDS}, got {self.risk!r}")
        if self.runs < 1:
            raise InvalidParameter(f"runs must be >= 1, got {self.runs}")
        if not self.cost > 0:
            raise InvalidParameter(f"cost must be positive, got {self.cost}")
        for p in self.policies:
            policy_label(p)

    @property
    def shuffle(self) -> bool:
        return self.setting in DRUG_SETTINGS if self.shuffle_arms is None else self.shuffle_arms


@dataclass(frozen=True)
class SweepRow:
    setting: str
    policy: str
    grid_value: float
    K: int
    runs: int
    mean_risk: float
    se_risk: float
    mean_tau: float
    misid_rate: float
    mean_simple_regret: float
    risk: str = field(default=MI, compare=False)
    max_tau: int = field(default=0, compare=False)


POLICY_NAMES = ("dbcare", "oracle", "sequential_halving", "racing", "guess")
_ALLOWED_KEYS = {
    "dbcare": {"name", "risk", "B", "delta"},
    "oracle": {"name", "risk"},
    "sequential_halving": {"name", "budget", "budget_per_arm"},
    "racing": {"name", "delta", "cap"},
    "guess": {"name"},
}


def policy_label(t: dict) -> str:
    """Stable display label of a policy template; validates its keys."""
    name = t.get("name")
    if name not in POLICY_NAMES:
        raise InvalidParameter(f"policy name must be one of {POLICY_NAMES}, got {name!r}")
    extra = set(t) - _ALLOWED_KEYS[name]
    if extra:
        raise InvalidParameter(f"unknown key(s) {sorted(extra)} for policy {name!r}")
    if name == "sequential_halving":
        if ("budget" in t) == ("budget_per_arm" in t):
            raise InvalidParameter("sequential_halving needs exactly one of budget, budget_per_arm")
        return f"sequential_halving[T={t['budget']}]" if "budget" in t else \
            f"sequential_halving[T={t['budget_per_arm']}K]"
    if name == "racing":
        if "delta" not in t:
            raise InvalidParameter("racing needs delta")
        if not 0 < t["delta"] < 1:
            raise InvalidParameter(f"racing delta must lie in (0, 1), got {t['delta']}")
        return f"racing[delta={t['delta']}]"
    if name == "dbcare" and "delta" in t:
        return f"dbcare[delta={t['delta']}]"
    return name


def resolve_policy(t: dict, instance: BanditInstance, risk: str, cost: float, B: Optional[float]) -> PolicySpec:
    name = t["name"]
    sigma = instance.sigma
    if name == "dbcare":
        return Dbcare(t.get("risk", risk), cost, sigma, B=t.get("B", B if B is not None else instance.reward_range_B),
                      delta=t.get("delta"))
    if name == "oracle":
        if instance.K != 2:
            raise InvalidParameter("the oracle policy requires K = 2")
        gap = core.gap_profile(instance).gaps[0]
        return OracleTwoArm(t.get("risk", risk), gap, cost, sigma)
    if name == "sequential_halving":
        T = t["budget"] if "budget" in t else t["budget_per_arm"] * instance.K
        return SequentialHalving(int(T))
    if name == "racing":
        return RacingFixedConfidence(t["delta"], sigma, int(t.get("cap", safeguard_cap_for(cost))))
    return Guess()


def make_instance(config: SweepConfig, value: float) -> BanditInstance:
    s = config.setting
    if s == "TwoArmGaussian":
        return core.make_gaussian_two_arm(value, config.sigma)
    if s == "TwoArmBernoulli":
        return core.make_bernoulli_two_arm(value)
    if s == "OneSparse":
        return core.make_one_sparse(config.K, value, config.sigma)
    if s == "LinearDecay":
        return core.make_linear_decay(config.K, value, config.sigma)
    binary, leveled = drug_instances()
    return binary if s == "DrugBinary" else leveled


def run_sweep(config: SweepConfig, workers: Optional[int] = None, cache: Optional[dict] = None) -> list[SweepRow]:
    """Evaluate every policy at every grid point.

    All policies at grid point ``g`` share the replication streams seeded by
    ``derive_seed(master_seed, g)``, so the sweep is a pure function of the
    config.  Pass the same ``cache`` dict to sweeps that differ only in the
    risk kind: policies that ignore the risk kind (racing, halving, guessing)
    are then simulated once and aggregated twice.
    """
    rows = []
    drug = config.setting in DRUG_SETTINGS
    for g, value in enumerate(config.grid):
        instance = make_instance(config, value)
        cost = value if drug else config.cost
        seed = derive_seed(config.master_seed, g)
        for t in config.policies:
            spec = resolve_policy(t, instance, config.risk, cost, config.B)
            key = (instance, spec, config.runs, seed, config.shuffle)
            out = cache.get(key) if cache is not None else None
            if out is None:
                out = simulate(instance, spec, config.runs, seed, config.shuffle, workers)
                if cache is not None:
                    cache[key] = out
            est = aggregate(out, RiskConfig(config.risk, cost))
            rows.append(SweepRow(config.setting, policy_label(t), value, instance.K, est.runs,
                                 est.mean_risk, est.se_risk, est.mean_tau, est.misid_rate,
                                 est.mean_simple_regret, risk=config.risk, max_tau=est.max_tau))
    return rows


# -- output --------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows, path) -> None:
    """Write rows with the fixed schema; floats use shortest round-trip repr."""
    if not rows:
        raise InvalidParameter("no rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_fmt(getattr(r, col)) for col in CSV_HEADER])


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def emit_plot(rows, path) -> None:
    """Risk against grid value, one panel per (setting, risk), bands at +-2 SE."""
    if not rows:
        raise InvalidParameter("no rows to plot")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups: dict = {}
    for r in rows:
        groups.setdefault((r.setting, r.risk), []).append(r)
    with matplotlib.rc_context({"svg.hashsalt": "dbcare", "svg.fonttype": "path"}):
        fig, axes = plt.subplots(1, len(groups), figsize=(5 * len(groups), 4), squeeze=False)
        for ax, ((setting, risk), grp) in zip(axes[0], groups.items()):
            for label in dict.fromkeys(r.policy for r in grp):
                pts = sorted((r for r in grp if r.policy == label), key=lambda r: r.grid_value)
                x = np.array([p.grid_value for p in pts])
                y = np.array([p.mean_risk for p in pts])
                se = np.array([p.se_risk for p in pts])
                ax.plot(x, y, marker="o", ms=3, label=label)
                ax.fill_between(x, y - 2 * se, y + 2 * se, alpha=0.2)
            if setting in DRUG_SETTINGS:
                ax.set_xscale("log")
                ax.set_xlabel("cost c")
            else:
                ax.set_xlabel("gap")
            if all(r.mean_risk > 0 for r in grp):
                ax.set_yscale("log")
            ax.set_ylabel("risk (misidentification)" if risk == MI else "risk (simple regret)")
            ax.set_title(f"{setting}, {risk.upper()}")
            ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
