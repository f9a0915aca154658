"""
The noncentral chi-squared toolkit
==================================

The fluctuation of the common-stream SINR in a large MF-precoded system is
governed by a noncentral chi-squared variable with two degrees of freedom.
This script walks through the pieces the library provides for it.
"""

import numpy as np

from rsma_sim import specfun

###############################################################################
# The density needs the modified Bessel function I0 at arguments that can
# reach the thousands. ``bessel_i0_scaled`` returns ``exp(-x) I0(x)`` so it
# never overflows.
for x in [0.0, 1.0, 30.0, 1e4]:
    print(f"exp(-x) I0(x) at x = {x:>7g}: {specfun.bessel_i0_scaled(x):.12g}")

###############################################################################
# A distribution object bundles the density, CDF, sampler and MGF.
d = specfun.NoncentralChi2(10.0)
print(f"mean {d.mean:g}, variance {d.var:g}")
print(f"pdf(12) = {d.pdf(12.0):.6f}, cdf(12) = {d.cdf(12.0):.6f}")

###############################################################################
# The sampler agrees with the analytic moments.
x = d.sample(np.random.default_rng(0), 200_000)
print(f"sample mean {x.mean():.3f} (exact {d.mean:g}), "
      f"sample variance {x.var():.3f} (exact {d.var:g})")

###############################################################################
# The MGF is finite only for t < 1/2.
for t in [0.1, 0.25, 0.4]:
    print(f"M({t}) = {d.mgf(t):.4f}")

###############################################################################
# Adaptive Simpson quadrature on a truncated half line integrates the density
# to one and recovers the mean.
mass = specfun.integrate_semi_infinite(lambda v: d.pdf(v), 1e-10, noncentrality=10.0)
mean = specfun.integrate_semi_infinite(lambda v: v * d.pdf(v), 1e-9, noncentrality=10.0)
print(f"integrated mass {mass:.12f}, integrated mean {mean:.9f}")
