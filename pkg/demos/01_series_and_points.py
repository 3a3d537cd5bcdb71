"""Noncommutative series on matrix tuples: evaluation, axioms, coefficients.

Words are stored in product order: the tuple (1, 2) stands for Z_1 @ Z_2.
"""

import numpy as np

from ncrkhs import (
    MatrixTuple,
    NcSeries,
    check_respects_direct_sums,
    check_respects_intertwinings,
    evaluate,
    evaluate_on_nilpotent,
    extract_taylor_coefficients,
    functional_evaluator,
    nilpotency_order,
    word_eval,
)
from ncrkhs.sampling import complex_gaussian, nilpotent_tuple, random_similarity, rng_from_seed

rng = rng_from_seed(0)

# a point: two noncommuting 2x2 matrices
z1 = np.array([[0.0, 1.0], [0.0, 0.0]])
z2 = np.array([[0.0, 0.0], [1.0, 0.0]])
point = MatrixTuple((z1, z2))

print("Z_1 @ Z_2 =")
print(word_eval((1, 2), point).real)

# f(z) = 1 + 2 z_1 + z_1 z_2, scalar coefficients
f = NcSeries(2, 1, 1, {(): [[1.0]], (1,): [[2.0]], (1, 2): [[1.0]]})
print("\nf(Z) =")
print(evaluate(f, point).real)

# the two defining axioms of nc functions, as executable checks
w = MatrixTuple(tuple(complex_gaussian(rng, 3, 3) for _ in range(2)))
report = check_respects_direct_sums(f, [(point, w)])
print(f"\ndirect sums respected: {report.passed} (violation {report.max_violation:.2e})")

s = random_similarity(rng, 3)
w_sim = MatrixTuple(tuple(s @ c @ np.linalg.inv(s) for c in w.coords))
report = check_respects_intertwinings(f, [(w, w_sim, s)])
print(f"intertwinings respected: {report.passed} (violation {report.max_violation:.2e})")

# jointly nilpotent points make truncated series exact
nilp = nilpotent_tuple(rng, 2, 3)
order = nilpotency_order(nilp)
print(f"\nsampled nilpotent point of size 3 has order {order}")
exact = evaluate_on_nilpotent(f, nilp)
print(f"|evaluate - nilpotent evaluate| = {np.linalg.norm(exact - evaluate(f, nilp)):.2e}")

# coefficients are recoverable from evaluations on the truncated free shift
recovered = extract_taylor_coefficients(functional_evaluator(f), d=2, max_len=3, out_dim=1, in_dim=1)
print("\nrecovered support:", [list(w) for w in recovered.support])
print("coefficient of (1, 2):", recovered.coefficient((1, 2)).real[0, 0])
