"""Near-critical binary trees and their continuum limit.

p^(n) puts mass (1 - a'/n)/2 on 0 and (1 + a'/n)/2 on 2, with gamma_n = n.
The discrete exponent G_n tends to psi(l) = l^2/2 - a' l. Three consequences
are shown: the survival mass of [nx] trees, the extinction probability by
time delta, and the gap between G_n and psi, which shrinks like l^3 / (2n).
"""

import math

import numpy as np

from gwlimits import limits
from gwlimits.mechanism import extinction_cdf, largest_root

fam = limits.family_near_critical_binary(1.0)
print("target psi: alpha = %g, beta = %g, gamma = %g" % (fam.target.alpha, fam.target.beta, largest_root(fam.target)))

res = limits.survival_mass_limit(fam, 1.0)
print("\nP(all n trees die out) = f^n")
for n, v, d in zip(res.n_list, res.values, res.deviations):
    print(f"  n={n:>6}: {v:.10f}   |. - e^-2| = {d:.2e}")

print("\nP(extinct by delta) = g_[delta n](0)^n")
for delta in limits.DEFAULT_DELTAS:
    m = limits.check_main1(fam, delta)
    print(f"  delta={delta:<5} " + "  ".join(f"{v:.5f}" for v in m.values) + f"   limit {m.limit:.5f}")

for drift in (0.0, 1.0):
    a1 = limits.check_A1(limits.family_near_critical_binary(drift))
    print(f"\nsup_[0,10] |G_n - psi| for a'={drift:g}: " + ", ".join(f"{v:.4f}" for v in a1.values))

crit = limits.family_near_critical_binary(0.0)
n, lam = 1000, 10.0
print(f"\ncritical family at n={n}, l={lam:g}: G_n - psi = {limits.G_n(crit, n, lam) - crit.target.psi(lam):+.4f}, "
      f"-l^3/(2n) = {-lam**3 / (2 * n):+.4f}")

t = np.array([0.25, 0.5, 1.0, 2.0, 5.0])
print("\nextinction CDF of the limit, exp(-2/(1-e^-t)):", np.round(extinction_cdf(fam.target, 1.0, t), 6))
print("closed form                                 :", np.round(np.exp(-2 / (1 - np.exp(-t))), 6))
print("as t grows it approaches e^-2 =", round(math.exp(-2), 6))
