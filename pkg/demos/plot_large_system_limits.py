"""
Large-system rates against simulation
=====================================

With ``L`` antennas and ``K = L / theta`` users, the private rate of an
MF-precoded RSMA user tends to a constant and the common rate to a
transformed noncentral chi-squared variable. Here the limits are compared
with Monte Carlo at growing system sizes, with training-based CSIT.
"""

import math

from rsma_sim import (
    SystemConfig,
    ergodic_common_rate,
    ergodic_private_rate,
    ergodic_rates_mc,
    symmetric_system,
)

theta, Pt, rho, N = 5.0, 10.0, 0.5, 10

###############################################################################
# The limit values only depend on the load, the gains and the CSIT quality.
_, p = symmetric_system(100, 20, Pt=Pt, rho=rho, N=N)
common, private = ergodic_common_rate(p), ergodic_private_rate(p)
print(f"limit common rate {common:.4f}, limit private rate {private:.4f} bits/s/Hz")
print(f"(perfect CSIT private limit: {math.log2(1 + 25 / 6):.4f})")

###############################################################################
# Simulated per-user averages approach them as the array grows.
for L in (20, 50, 100, 200):
    K = int(L / theta)
    stats, _ = symmetric_system(L, K, Pt=Pt, rho=rho, N=N)
    rep = ergodic_rates_mc(SystemConfig(L, K, Pt, rho=rho, N=N, n_trials=300), stats)
    print(f"L={L:>3}, K={K:>2}: common {rep.rate_common.mean():.4f}, "
          f"private {rep.rate_private.mean():.4f}, ESR {rep.sum:.2f}")
