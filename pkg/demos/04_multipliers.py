"""Multipliers and de Branges-Rovnyak machinery.

S is a contractive multiplier exactly when K - S K' S* is a cp kernel; the
certificate samples that kernel.  Brangesian complements realize the
norm-minimizing split of the target space at finite dimension.
"""

import numpy as np

from ncrkhs import (
    Multiplier,
    NcSeries,
    adjoint_on_kernel_element,
    brangesian_complement,
    contractive_containment,
    contractivity_certificate,
    dbr_kernel,
    szego_kernel,
)
from ncrkhs.core import zero_tuple
from ncrkhs.kernels import MomentKernel
from ncrkhs.sampling import complex_gaussian, rng_from_seed

rng = rng_from_seed(3)
szego = szego_kernel(d=1, max_len=3)

# constant multiplier lambda between equal Szego kernels:
# K_S = (1 - |lambda|^2) K, so |lambda| <= 1 is the exact dividing line
for lam in (0.5, 2.0):
    mult = Multiplier(NcSeries.constant(1, [[lam]]), szego, szego)
    cert = contractivity_certificate(mult, seed=7)
    print(f"lambda = {lam}: contractive certificate passed = {cert.passed} "
          f"(min_eig {cert.min_eig:.3e})")

# the de Branges-Rovnyak kernel at the zero point: 1 - |lambda|^2
mult2 = Multiplier(NcSeries.constant(1, [[2.0]]), szego, szego)
z0 = zero_tuple(1, 1)
print("K_S(0,0)(1) for lambda = 2:", dbr_kernel(mult2).evaluate(z0, z0, np.eye(1)).real[0, 0])

# adjoint action on kernel elements: K_{W,v,y} -> K'_{W,v,S(W)* y}
w = zero_tuple(1, 2)
elem = adjoint_on_kernel_element(
    Multiplier(NcSeries.constant(1, [[0.5]]), szego, szego),
    w, complex_gaussian(rng, 1, 2), complex_gaussian(rng, 2, 1)[:, 0],
)
print("adjoint kernel element carries y scaled by conj(lambda):", np.round(elem.y, 3))

# Brangesian complement of a strict contraction on C^4
u, _ = np.linalg.qr(complex_gaussian(rng, 4, 4))
v, _ = np.linalg.qr(complex_gaussian(rng, 4, 4))
a = u * np.array([0.9, 0.5, 0.0, 0.0]) @ v.conj().T
dec = brangesian_complement(a)
h = complex_gaussian(rng, 4, 1)[:, 0]
k_part, h_part = dec.decompose(h)
cost = dec.split_cost(k_part, h_part)
print(f"\nsplit cost = {cost:.6f}, ||h||^2 = {dec.ambient_norm(h) ** 2:.6f}")

overlap = dec.feasible_perturbation_basis()
worst = min(
    dec.split_cost(k_part + delta, h_part - delta) - cost
    for delta in (overlap @ complex_gaussian(rng, overlap.shape[1], 1)[:, 0] * 0.2 for _ in range(20))
)
print(f"worst margin over 20 random feasible splits: {worst:.2e} (>= 0 up to rounding)")

# contractive containment: H(K') sits inside H(K) iff K - K' is cp
half = MomentKernel(1, 1, {key: 0.5 * val for key, val in szego.moments.items()}, 3)
cert, complement = contractive_containment(half, szego, seed=11)
print(f"\nH(half Szego) contained contractively in H(Szego): {cert.passed}")
print("complement kernel value at 0:", complement.evaluate(z0, z0, np.eye(1)).real[0, 0])
