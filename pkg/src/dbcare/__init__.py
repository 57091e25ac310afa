"""Cost-aware best-arm identification: the DBCARE elimination policy,
baselines, risk bounds and a reproducible Monte Carlo harness."""
from .core import (BanditInstance, Bernoulli, Categorical, Gaussian, GapProfile, InvalidParameter,
                   complexity_H, gap_profile, make_bernoulli_two_arm, make_gaussian_two_arm,
                   make_linear_decay, make_one_sparse, sample)
from .harness import (RiskConfig, RiskEstimate, SweepConfig, SweepRow, drug_instances, emit_plot,
                      evaluate_risk, run_sweep, simulate, write_csv)
from .policies import (Dbcare, Guess, OracleTwoArm, RacingFixedConfidence, SequentialHalving, Trace,
                       confidence_radius, delta_mi, delta_sr, nstar_mi, nstar_sr, run_dbcare, run_guess,
                       run_oracle_two_arm, run_policy, run_racing, run_sequential_halving)
from .rng import RngStream

__version__ = "0.1.0"
