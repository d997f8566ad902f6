"""Community-structured growth: simulate, fit, and check the limits.

The interaction matrix gamma scales how attractive each community's
degree mass is to arriving nodes.  The script fits (pi, gamma) by maximum
likelihood on one labeled history, then compares the observed
per-community degree mass and edge-type fractions with their almost-sure
limits p0 and theta0.
"""

import numpy as np

from pafit import (
    HpamParams,
    community_stats,
    fixed_point_p,
    gamma_mle,
    hpam_limits,
    pi_mle,
    simulate_hpam,
    theta_from_p,
)

params = HpamParams(pi=np.array([0.3, 0.7]), gamma=np.array([[1.0, 0.5], [0.5, 1.5]]))
N = 20_000

history = simulate_hpam(N, params, seed=3)
stats = community_stats(history)

pi_hat = pi_mle(stats)
fit = gamma_mle(stats)
print(f"n = {N}, true pi = {params.pi.tolist()}")
print(f"pi_hat    = {np.round(pi_hat, 4).tolist()}")
print(f"gamma     = {params.gamma.tolist()}")
print(f"gamma_hat = {np.round(fit.gamma_hat, 4).tolist()}")
print(f"converged = {fit.converged} after {fit.iterations} ascent steps")

limits = hpam_limits(params)
print("\nper-community degree mass N_j / n vs the fixed point p0:")
print(f"  observed: {np.round(stats.N_final / N, 4).tolist()}")
print(f"  limit:    {np.round(limits.p0, 4).tolist()}")

print("\nedge-type fractions M_ij / n vs theta0:")
print(f"  observed: {np.round(stats.M / N, 4).tolist()}")
print(f"  limit:    {np.round(limits.theta0, 4).tolist()}")

uniform = HpamParams(pi=np.array([0.3, 0.7]), gamma=np.ones((2, 2)))
print("\nuniform gamma sanity check: p0 =", fixed_point_p(uniform).tolist(), "= 2 pi")
print("theta0 =", np.round(theta_from_p(uniform, fixed_point_p(uniform)), 4).tolist())
