import numpy as np
import pytest

from ncrkhs.core import NotCp
from ncrkhs.cpmaps import (
    CpMap,
    cb_norm_cp,
    choi,
    effros_ruan_lower_bound,
    is_cp,
    max_entangled_argument,
    rkhs_of_cp_map,
    sampled_amplified_positivity,
    stinespring,
)
from ncrkhs.sampling import complex_gaussian, rng_from_seed


def identity_map(k):
    return CpMap.from_kraus([np.eye(k)])


def trace_map(k, m):
    # phi(a) = tr(a) I_m, Kraus ops e_i e_p^T stacked
    ops = []
    for i in range(m):
        for p in range(k):
            op = np.zeros((m, k), dtype=complex)
            op[i, p] = 1.0
            ops.append(op)
    return CpMap.from_kraus(ops)


def random_kraus_map(rng, k, m, n_ops):
    return CpMap.from_kraus([complex_gaussian(rng, m, k) for _ in range(n_ops)])


def test_choi_identity_map_rank_one():
    phi = identity_map(2)
    c = choi(phi)
    # blocks are the matrix units themselves
    np.testing.assert_allclose(c[0:2, 2:4], np.array([[0, 1], [0, 0]], dtype=complex))
    vals = np.linalg.eigvalsh(c)
    assert vals[-1] == pytest.approx(2.0)
    assert np.sum(vals > 1e-12) == 1


def test_choi_trace_map_is_identity():
    phi = trace_map(3, 2)
    np.testing.assert_allclose(choi(phi), np.eye(6), atol=1e-12)


def test_choi_zero_map():
    phi = CpMap.from_kraus([], k=2, m=2)
    np.testing.assert_allclose(choi(phi), np.zeros((4, 4)))
    assert is_cp(phi)[0]


def test_stinespring_identity():
    phi = identity_map(3)
    dil = stinespring(phi)
    assert dil.r == 1
    assert dil.reconstruction_error <= 1e-12
    np.testing.assert_allclose(dil.h @ dil.h.conj().T, np.eye(3), atol=1e-10)


def test_stinespring_trace_map():
    phi = trace_map(2, 2)
    dil = stinespring(phi)
    assert dil.r == 4  # Choi rank: one multiplicity slot per Kraus operator
    assert dil.reconstruction_error <= 1e-10


def test_stinespring_random_round_trip():
    rng = rng_from_seed(0)
    for _ in range(10):
        phi = random_kraus_map(rng, 2, 3, int(rng.integers(1, 4)))
        dil = stinespring(phi)
        assert dil.reconstruction_error <= 1e-10
        # sigma is a *-homomorphism by construction
        a = complex_gaussian(rng, 2, 2)
        b = complex_gaussian(rng, 2, 2)
        np.testing.assert_allclose(dil.sigma(a) @ dil.sigma(b), dil.sigma(a @ b), atol=1e-12)


def test_stinespring_rejects_non_cp():
    units = {(p, q): np.zeros((2, 2)) for p in range(2) for q in range(2)}
    units[(0, 0)] = np.diag([1.0, -0.1])
    phi = CpMap(2, 2, units)
    ok, min_eig = is_cp(phi)
    assert not ok and min_eig == pytest.approx(-0.1, abs=1e-12)
    with pytest.raises(NotCp):
        stinespring(phi)


def test_cb_norm_identity_and_homogeneity():
    phi = identity_map(2)
    assert cb_norm_cp(phi) == pytest.approx(1.0)
    assert cb_norm_cp(phi.scaled(2.0)) == pytest.approx(2.0)


def test_cb_norm_equals_dilation_norm():
    rng = rng_from_seed(1)
    for _ in range(5):
        phi = random_kraus_map(rng, 2, 2, 3)
        dil = stinespring(phi)
        hh = np.linalg.norm(dil.h @ dil.h.conj().T, 2)
        assert abs(cb_norm_cp(phi) - hh) <= 1e-10 * max(1.0, hh)


def test_cb_norm_amplification_bound():
    rng = rng_from_seed(2)
    for _ in range(5):
        phi = random_kraus_map(rng, 2, 3, 2)
        bound = cb_norm_cp(phi)
        for n_amp in range(1, 5):
            root = complex_gaussian(rng, n_amp * 2, n_amp * 2)
            p = root @ root.conj().T
            value = phi.apply_amplified(p)
            assert np.linalg.norm(value, 2) <= bound * np.linalg.norm(p, 2) + 1e-10


def test_max_entangled_argument_maps_to_choi():
    rng = rng_from_seed(3)
    phi = random_kraus_map(rng, 3, 2, 2)
    np.testing.assert_allclose(
        phi.apply_amplified(max_entangled_argument(3)), choi(phi), atol=1e-12
    )


def test_choi_vs_sampled_amplified_positivity_agreement():
    rng = rng_from_seed(4)
    for trial in range(100):
        if trial % 2 == 0:
            phi = random_kraus_map(rng, 2, 2, int(rng.integers(1, 4)))
        else:
            # Hermitian-perturbed map, generically not cp
            units = {}
            herm = complex_gaussian(rng, 4, 4)
            herm = (herm + herm.conj().T) / 2
            for p in range(2):
                for q in range(2):
                    units[(p, q)] = herm[p * 2:(p + 1) * 2, q * 2:(q + 1) * 2]
            phi = CpMap(2, 2, units)
        choi_ok = is_cp(phi)[0]
        sampled_ok = sampled_amplified_positivity(phi, n_samples=5, seed=trial)[0]
        assert choi_ok == sampled_ok


def test_effros_ruan_cases():
    assert effros_ruan_lower_bound(identity_map(2), seed=0) >= 1.0 - 1e-6
    zero = CpMap.from_kraus([], k=2, m=2)
    assert effros_ruan_lower_bound(zero, seed=0) == 0.0

    rng = rng_from_seed(5)
    phi = random_kraus_map(rng, 2, 2, 3)
    bound = cb_norm_cp(phi)
    for seed in range(10):
        assert effros_ruan_lower_bound(phi, seed=seed) <= bound + 1e-8


def test_effros_ruan_lower_bounds_identity_exactly():
    # the unit sequence realizes ||phi(1)|| for cp maps
    rng = rng_from_seed(6)
    phi = random_kraus_map(rng, 3, 2, 2)
    assert effros_ruan_lower_bound(phi, n_samples=0, seed=0) == pytest.approx(
        cb_norm_cp(phi), abs=1e-10
    )


def test_rkhs_of_identity_map():
    phi = identity_map(2)
    model = rkhs_of_cp_map(phi)
    assert model.n_units == 4
    rng = rng_from_seed(7)
    for _ in range(10):
        c = complex_gaussian(rng, model.dim, 1)[:, 0]
        v = complex_gaussian(rng, 2, 2)
        y = complex_gaussian(rng, 2, 1)[:, 0]
        assert model.reproducing_violation(c, v, y) <= 1e-10


def test_rkhs_of_zero_map():
    phi = CpMap.from_kraus([], k=2, m=2)
    model = rkhs_of_cp_map(phi)
    np.testing.assert_allclose(np.asarray(model.gram), np.zeros((8, 8)))


def test_rkhs_linearity_relation():
    # K_{V,Y} = sum_i K_{v_i, y_i} holds coefficientwise in the model
    rng = rng_from_seed(8)
    phi = random_kraus_map(rng, 2, 2, 2)
    model = rkhs_of_cp_map(phi)
    v1 = complex_gaussian(rng, 2, 2)
    v2 = complex_gaussian(rng, 2, 2)
    y = complex_gaussian(rng, 2, 1)[:, 0]
    lhs = model.kernel_element(v1 + v2, y)
    rhs = model.kernel_element(v1, y) + model.kernel_element(v2, y)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_rkhs_sigma_laws():
    rng = rng_from_seed(9)
    phi = random_kraus_map(rng, 2, 2, 3)
    model = rkhs_of_cp_map(phi)
    a = complex_gaussian(rng, 2, 2)
    b = complex_gaussian(rng, 2, 2)
    sa, sb = model.sigma_matrix(a), model.sigma_matrix(b)
    np.testing.assert_allclose(sa @ sb, model.sigma_matrix(a @ b), atol=1e-12)
    np.testing.assert_allclose(model.sigma_matrix(np.eye(2)), np.eye(model.dim), atol=1e-12)
    # adjoint with respect to the model gramian: <sigma(a) f, g> = <f, sigma(a*) g>
    for _ in range(5):
        f = complex_gaussian(rng, model.dim, 1)[:, 0]
        g = complex_gaussian(rng, model.dim, 1)[:, 0]
        lhs = model.inner_product(sa @ f, g)
        rhs = model.inner_product(f, model.sigma_matrix(a.conj().T) @ g)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_rkhs_sigma_pointwise_action():
    # (sigma(a) f)(u) = f(u a)
    rng = rng_from_seed(10)
    phi = random_kraus_map(rng, 2, 2, 2)
    model = rkhs_of_cp_map(phi)
    c = complex_gaussian(rng, model.dim, 1)[:, 0]
    a = complex_gaussian(rng, 2, 2)
    u = complex_gaussian(rng, 2, 2)
    lhs = model.evaluate(model.sigma_matrix(a) @ c, u)
    rhs = model.evaluate(c, u @ a)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_star_preservation_report():
    rng = rng_from_seed(11)
    phi = random_kraus_map(rng, 2, 2, 2)
    ok, dev = phi.is_star_preserving()
    assert ok and dev <= 1e-12
    units = {(p, q): np.zeros((2, 2)) for p in range(2) for q in range(2)}
    units[(0, 1)] = np.eye(2)
    bad = CpMap(2, 2, units)
    assert not bad.is_star_preserving()[0]
