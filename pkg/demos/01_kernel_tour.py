"""Evaluate the strip kernels and the full kernel, and watch the mode sum converge.

Run:  python3 demos/01_kernel_tour.py
"""
import math

import numpy as np

from wormkit.domains import DomainParams, PointC2, Variant
from wormkit.kernel import h_j, kernel_prime, kernel_unprime, mode_terms

P = DomainParams(1.5 * math.pi)
print(f"beta = 3pi/2: mu = {P.mu:.6f}, nu = {P.nu:.6f}")

# one-variable kernels along the real axis; every |j| decays like e^{-nu x}
for j in (-2, -1, 0, 1):
    vals = [h_j(P, j, complex(x), 0j).value.real for x in (0.0, 5.0, 10.0, 20.0)]
    print(f"H_{j:+d}(x, 0) at x = 0, 5, 10, 20:", " ".join(f"{v:.3e}" for v in vals))

z, w = PointC2(0.2 + 0.1j, 1.1), PointC2(-0.3 + 0.4j, 0.9)
logq = np.log(z.z2 * np.conj(w.z2))
print("\nmode terms |H_j(z1, w1) (z2 conj w2)^j| / pi:")
for j in range(-12, 13, 4):
    t, _ = mode_terms(P, j, np.array([z.z1 - np.conj(w.z1)]), logq)
    print(f"  j = {j:+3d}: {abs(t[0]) / math.pi:.3e}")

k = kernel_prime(P, z, w)
print(f"\nK'(z, w) = {k.value:.12e}  +- {k.err_estimate:.1e}, modes {k.modes_used}")
print(f"K'(w, z) = {kernel_prime(P, w, z).value:.12e}  (conjugate)")

# the same kernel seen on D_beta through (log zeta1, zeta2)
D = P.with_variant(Variant.DBeta)
ku = kernel_unprime(D, PointC2(1.0, 1.0), PointC2(1.0, 1.0))
kp = kernel_prime(P, PointC2(0, 1), PointC2(0, 1))
print(f"\nK_D((1,1),(1,1)) = {ku.value.real:.15f}")
print(f"K'((0,1),(0,1))  = {kp.value.real:.15f}")
