"""
===========================
Where sampling stops paying
===========================

The misidentification lower bound for two arms is flat at 1/4 for small gaps
(just guess) and decays once the gap clears sqrt(sigma^2 c).  Here we draw it
next to the two upper envelopes, and check the closed form against a direct
numerical minimization of the underlying convex objective.
"""
import numpy as np
from matplotlib import pyplot as plt

from dbcare import bounds

sigma, c = 1.0, 1e-4
gaps = np.geomspace(1e-3, 2, 200)

lower = np.array([bounds.hardmi_two_arm(d, sigma, c).value for d in gaps])
oracle = np.array([bounds.upper_curve("OracleMI", bounds.BoundQuery.two_arm(d, sigma, c)) for d in gaps])
dbcare = np.array([bounds.upper_curve("DbcareMI2", bounds.BoundQuery.two_arm(d, sigma, c)) for d in gaps])

# The same lower bound, from the numeric oracle (H = 1 / gap^2 for two arms).
numeric = np.array([bounds.numeric_phase_oracle_mi(d**-2, sigma, c)[1] for d in gaps])
print("max |closed form - numeric| =", np.max(np.abs(lower - numeric)))

fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(gaps, lower, label="lower bound")
ax.loglog(gaps, oracle, "--", label="oracle envelope")
ax.loglog(gaps, dbcare, ":", label="DBCARE envelope")
ax.axvline(np.sqrt(sigma**2 * c), color="grey", lw=0.5)
ax.set_xlabel("gap")
ax.set_ylabel("risk")
ax.legend()
fig.tight_layout()
plt.show()
