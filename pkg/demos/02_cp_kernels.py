"""Completely positive nc kernels: three forms, certificates, factorization.

A kernel value K(Z, W)(P) is a matrix; complete positivity asks that
K(Z, Z)(P) is PSD for PSD P.  Certificates sample that condition with a
fixed seed: a failure is a reproducible witness, a pass is evidence.
"""

import numpy as np

from ncrkhs import (
    AlgebraSpec,
    KolmogorovKernel,
    MatrixTuple,
    NcSeries,
    cb_norm_report,
    check_kernel_axioms,
    cp_certificate,
    cp_certificate_similarity_reduced,
    draw_kernel_axiom_samples,
    kolmogorov_at_sample,
    szego_kernel,
)
from ncrkhs.sampling import complex_gaussian, nilpotent_tuple, rng_from_seed

rng = rng_from_seed(1)

# the Szego-type kernel, truncated at word length 3
szego = szego_kernel(d=1, max_len=3)
jordan = MatrixTuple((np.array([[0.0, 1.0], [0.0, 0.0]]),))
print("Szego kernel at the 2x2 Jordan cell, K(Z,Z)(I) =")
print(szego.evaluate(jordan, jordan, np.eye(2)).real)  # diag(2, 1)

# kernel axioms on random samples
samples = draw_kernel_axiom_samples(szego, rng, n_samples=3, sizes=(2, 3))
report = check_kernel_axioms(szego, samples)
print(f"kernel axioms: {report.passed} (violation {report.max_violation:.2e})")

# a Kolmogorov-form kernel K(Z,W)(P) = H(Z)(P (x) I)H(W)*
h = NcSeries(2, 2, 3, {(): complex_gaussian(rng, 2, 3), (1,): complex_gaussian(rng, 2, 3)})
kol = KolmogorovKernel(AlgebraSpec(), h, s=3)
cert = cp_certificate(kol, n_points=3, sizes=(2, 3), n_rows=2, seed=42)
print(f"\nKolmogorov-form cp certificate: passed={cert.passed}, min_eig={cert.min_eig:.2e}")

# the similarity-reduced certificate checks only K(Z,Z)(I) on a
# similarity-invariant sampled domain
reduced = cp_certificate_similarity_reduced(szego, seed=42)
print(f"reduced certificate on Szego: passed={reduced.passed}")

# Kolmogorov factorization at a finite sample: K ~= H (P (x) I_rank) H*
points = [nilpotent_tuple(rng, 2, 2), nilpotent_tuple(rng, 2, 3)]
sample = kolmogorov_at_sample(kol, points)
p = complex_gaussian(rng, 2, 3)
want = kol.evaluate(points[0], points[1], p)
got = sample.reconstruct(0, 1, p)
print(f"\nsampled factorization: rank={sample.rank}, "
      f"reconstruction error {np.linalg.norm(want - got):.2e}")

# the cp map K(Z,Z) attains its norm at the identity argument
norms = cb_norm_report(szego, jordan, n_samples=25, seed=3)
print(f"\n||K(Z,Z)(I)|| = {norms.norm_at_identity:.3f}, "
      f"max sampled ratio = {norms.max_sampled_ratio:.3f}")
