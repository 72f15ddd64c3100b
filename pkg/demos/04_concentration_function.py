"""The concentration function phi_w(eps) and the rate equation.

phi_w(eps) pairs an approximation cost (how expensive it is, in the weighted
lp norm, to approximate w within eps in l2) with a small-ball cost
(-log mu(eps B)).  The smallest eps with phi_w(eps) <= n eps^2 upper-bounds
the posterior contraction rate at w.
"""

import numpy as np

from pexp.concentration import (
    concentration_fn,
    inf_term_exact,
    inf_term_truncation_ub,
    rate_solve_numeric,
    smallball_mc,
)
from pexp.measure import pexp_measure
from pexp.sequences import BesovParams, ScalingSpec, make_truth

rng = np.random.default_rng(3)

w = make_truth(BesovParams(1.0, 2.0, 1), n=256)
spec = ScalingSpec(1.0, 1.0, 1, 1.0, "linear", n=256)
m = pexp_measure(spec)

print("approximation term: exact solver vs proof-style truncation bound")
for eps in (0.4, 0.2, 0.1, 0.05):
    exact, _ = inf_term_exact(w.values, eps, spec)
    ub, L = inf_term_truncation_ub(w.values, eps, spec)
    print(f"  eps={eps:<5} exact {exact:8.3f}   truncation bound {ub:8.3f} (L={L})")

print("\ncentered small balls, -log mu(eps B):")
ests = smallball_mc(m, np.array([0.4, 0.7, 1.0, 1.4]), "l2", 10**5, rng)
for e in ests:
    print(f"  eps={e.eps:<4} -log p = {e.neglog:.3f}  CI ({e.ci[0]:.3f}, {e.ci[1]:.3f})")

print("\nassembled phi and the rate equation crossing:")
for eps in (0.3, 0.6):
    est = concentration_fn(w.values, eps, m, "l2", 10**5, rng)
    print(f"  phi({eps}) = {est.phi:.3f}  (inf/p {est.inf_term:.3f}, -log {est.neglog_smallball:.3f})")
for n in (32, 128, 512):
    eps_n = rate_solve_numeric(w.values, m, n, mc_samples=5 * 10**4, rng=rng)
    print(f"  n={n:<4} smallest eps with phi <= n eps^2: {eps_n:.4f}")
