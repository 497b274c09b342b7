"""Measure the kernel normalization from the per-mode reproducing identity.

The mode-j kernel integrated against h(w1) over the strip, weighted by the
fiber measure, must return h(z1).  Solving that for the overall constant at
one (beta, j, h, z) gives c_norm; it comes out as 1/pi, and the same constant
then reproduces every other mode.

Run:  python3 demos/02_calibrate_c_norm.py
"""
import math

from wormkit.analysis import TestFunctionSpec, calibrate_c_norm, reproducing_residual_mode
from wormkit.domains import DomainParams
from wormkit.kernel import C_NORM

cal = calibrate_c_norm()
print(f"calibrated c_norm = {cal.c_norm:.15f}")
print(f"1 / pi            = {1 / math.pi:.15f}")
print(f"library C_NORM    = {C_NORM:.15f}")

P = DomainParams(1.5 * math.pi)
print("\nresiduals with the calibrated constant:")
for j in (-2, -1, 0, 1, 2):
    h = TestFunctionSpec(j=j, delta=0.1)
    for z in (0.3 + 0.2j, -1.0 + 1.5j):
        r = reproducing_residual_mode(P, j, h, z, c_norm=cal.c_norm)
        print(f"  j = {j:+d}, z = {z}: {r:.2e}")
