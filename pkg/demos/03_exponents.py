"""Decay along the strip and blowup at the singular circle share one exponent.

Run:  python3 demos/03_exponents.py
"""
import math

from wormkit.analysis import blowup_exponent_fit, decay_exponent_fit, stroboscopic_sequence
from wormkit.domains import DomainParams, PointC2, Variant

print(" beta     nu      decay slope   blowup slope (nu - 1)")
for name, beta in (("5pi/4", 1.25 * math.pi), ("3pi/2", 1.5 * math.pi), ("2pi", 2 * math.pi)):
    P = DomainParams(beta)
    d = decay_exponent_fit(P, -1, (10.0, 30.0))
    b = blowup_exponent_fit(P.with_variant(Variant.DBeta), PointC2(1.0, 1.0), stroboscopic_sequence())
    print(f"{name:>6} {P.nu:7.4f} {d.slope:10.4f}    {b.slope:10.4f} ({P.nu - 1:+.4f})")
