"""Trend scan of int |K(., zeta)|^p near both ends of the singular axis.

Increments over whole 4 pi periods of log|omega1| shrink geometrically when
the integral converges; the regression slope of their logs is printed next
to the power-law prediction.

Run:  python3 demos/04_lp_scan.py   (about a minute)
"""
import math

import numpy as np

from wormkit.analysis import lp_blowup_scan, lp_bounded_range
from wormkit.domains import DomainParams, PointC2, Variant

D = DomainParams(1.5 * math.pi, Variant.DBeta)
r = lp_bounded_range(D)
print(f"bounded range for beta = 3pi/2: ({r.p_min:.4f}, {r.p_max:.4f})")
zeta = PointC2(np.exp(-2j), np.exp(-1.25))
nu = D.nu
for p, regime in ((r.p_min - 0.2, "outer"), (r.p_min + 0.2, "outer"), (2.0, "inner"), (3.0, "inner"), (4.5, "inner")):
    v = lp_blowup_scan(D, p, zeta, regime=regime)
    predicted = 2 - (1 - nu) * p if regime == "inner" else (1 + nu) * p - 2
    print(f"p = {p:.4f} ({regime}): slope {v.increment_exponent:+.4f} (power law {predicted:+.4f}) -> {v.verdict.value}")
