"""
Drug discovery instances
========================

Five treatments with published mean efficacies, as Bernoulli outcomes and as
four-level outcomes.  The cost per patient is the knob: as it falls, DBCARE
samples more and finds the best treatment more often.  Arm order is shuffled
in every replication.
"""
import numpy as np

from dbcare import Dbcare, RiskConfig, drug_instances, evaluate_risk, gap_profile

binary, leveled = drug_instances()
for name, inst in (("binary", binary), ("leveled", leveled)):
    prof = gap_profile(inst)
    print(f"{name}: means {inst.means}, gaps {np.round(prof.gaps, 3)}")
    for c in (1e-3, 1e-4, 1e-5):
        est = evaluate_risk(inst, Dbcare("mi", c, inst.sigma), RiskConfig("mi", c), runs=200,
                            master_seed=3, shuffle_arms=True)
        print(f"  c={c:g}: risk {est.mean_risk:.3f} +- {2 * est.se_risk:.3f}, "
              f"misid {est.misid_rate:.3f}, mean pulls {est.mean_tau:.0f}")
