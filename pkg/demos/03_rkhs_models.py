"""Finite-dimensional nc reproducing kernel Hilbert space models.

A model is a basis of nc series with a positive gramian; it induces a kernel
and carries the reproducing identity, the canonical algebra action and the
Bergman form of the kernel.
"""

import numpy as np

from ncrkhs import (
    AlgebraSpec,
    KolmogorovKernel,
    NcSeries,
    RkhsModel,
    bergman_kernel,
    kernel_element_coefficients,
    lifted_norm,
    point_evaluation,
    reproducing_check,
    sigma_matrix,
)
from ncrkhs.sampling import complex_gaussian, nilpotent_tuple, rng_from_seed
from ncrkhs.series import evaluate

rng = rng_from_seed(2)

# model: span{1, z_1, z_2 z_1} with a non-orthogonal gramian
basis = [
    NcSeries.constant(2, [[1.0]]),
    NcSeries.monomial(2, (1,), [[1.0]]),
    NcSeries.monomial(2, (2, 1), [[1.0]]),
]
gram = np.array([[2.0, 0.4, 0.0], [0.4, 1.0, 0.2], [0.0, 0.2, 1.5]])
model = RkhsModel(AlgebraSpec(), basis, gram)
print(f"model dimension: {model.dim}")

# reproducing identity <f(W)(v*), y> = <f, K_{W,v,y}>
w = nilpotent_tuple(rng, 2, 2)
coeffs = complex_gaussian(rng, model.dim, 1)[:, 0]
v = complex_gaussian(rng, 1, 2)
y = complex_gaussian(rng, 2, 1)[:, 0]
report = reproducing_check(model, coeffs, w, v, y)
print(f"reproducing identity: {report.passed} (violation {report.max_violation:.2e})")

# the kernel element expands in the basis through the inverse gramian
xi = kernel_element_coefficients(model, w, v, y)
print("kernel element coefficients:", np.round(xi, 3))

# directional point evaluation and its gramian adjoint
ev = point_evaluation(model, w, v.conj().T)
print(f"point evaluation matrix shape: {ev.shape}")

# the scalar algebra acts by multiplication
print("sigma(2.0) =")
print(sigma_matrix(model, [[2.0]]).real)

# Bergman route: orthonormalize, then sum f_i(Z) P f_i(W)*
berg = bergman_kernel(model)
z = nilpotent_tuple(rng, 2, 2)
p = complex_gaussian(rng, 2, 2)
a = model.kernel().evaluate(z, w, p)
b = berg.evaluate(z, w, p)
print(f"\nBergman vs gramian kernel difference: {np.linalg.norm(a - b):.2e}")

# lifted norm: the least state norm realizing sampled values
h = NcSeries(2, 1, 3, {(): complex_gaussian(rng, 1, 3), (2,): complex_gaussian(rng, 1, 3)})
kol = KolmogorovKernel(AlgebraSpec(), h, s=3)
h0 = complex_gaussian(rng, 3, 1)[:, 0]
targets = []
for _ in range(2):
    zp = nilpotent_tuple(rng, 2, 2)
    u = complex_gaussian(rng, 2, 1)
    value = evaluate(h, zp) @ np.kron(u, np.eye(3)) @ h0
    targets.append((zp, u, value))
norm = lifted_norm(kol, targets)
print(f"\nlifted norm {norm:.4f} <= ||h0|| = {np.linalg.norm(h0):.4f}")
