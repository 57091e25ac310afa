"""
Single runs, step by step
=========================

Every replication draws from its own counter-based stream, so a run is fully
determined by (master seed, replication index).  Below: a few DBCARE runs on
a one-sparse instance, then the same replication again to show it repeats.
"""
from dbcare import Dbcare, RngStream, make_one_sparse, run_dbcare
from dbcare.policies import nstar_mi

inst = make_one_sparse(K=6, delta=1.5)
spec = Dbcare("mi", cost=1e-3, sigma=1.0)
print("means:", inst.means)
print("budgets N*(k):", {k: round(nstar_mi(k, 1e-3), 1) for k in range(2, 7)})

for r in range(5):
    tr = run_dbcare(inst, spec, RngStream(master_seed=42, replication_index=r))
    print(r, "->", tr.recommended_arm, "tau", tr.stopping_time_tau, "pulls", tr.pulls_per_arm)

again = run_dbcare(inst, spec, RngStream(42, 3))
print("replication 3 again:", again.stopping_time_tau, again.pulls_per_arm)
