"""Boundary geometry of the smooth worm and the exhaustion-exponent threshold.

Run:  python3 demos/05_levi_and_exhaustion.py
"""
import math

import numpy as np

from wormkit.domains import EtaProfile, sample_annulus, sample_boundary, tangential_levi_form
from wormkit.potential import ExhaustionQuery, df_exponent_bound, exhaustion_feasibility

rng = np.random.default_rng(0)
eta = EtaProfile.default(1.5 * math.pi)
ann = tangential_levi_form(eta, sample_annulus(eta.mu, 200, rng))
bd = tangential_levi_form(eta, sample_boundary(eta, 200, rng, exclude_annulus=True))
print(f"annulus: max |Levi| = {np.max(np.abs(ann)):.1e}")
print(f"rest of the boundary: Levi in [{bd.min():.3e}, {bd.max():.3e}]")

mu = eta.mu
print(f"\nexponent bound for mu = {mu:.4f}: {df_exponent_bound(mu):.4f}")
for delta in (0.3, 0.49, 0.5, 0.51, 0.8):
    v = exhaustion_feasibility(ExhaustionQuery(mu, delta))
    wit = f", witness cos({v.witness.k:.4f} s)" if v.witness else ""
    print(f"  delta = {delta:.2f}: {'feasible' if v.feasible else 'infeasible'} (margin {v.margin:+.4f}){wit}")
