"""Multipliers between nc RKHS models and de Branges-Rovnyak machinery.

A multiplier is an nc function S acting pointwise by (M_S f)(W) = S(W) f(W).
Contractivity of M_S is equivalent to complete positivity of the kernel
K(Z,W)(P) - S(Z) K'(Z,W)(P) S(W)*; the certificate here samples that kernel,
so a failure is a disproof witness while a pass is seeded evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    DimMismatch,
    InputError,
    MatrixTuple,
    NotContraction,
    NotInTarget,
    Tolerances,
    as_cmatrix,
    hermitize,
)
from .kernels import (
    CallableKernel,
    CpCertificate,
    KernelBase,
    KernelElement,
    cp_certificate,
)
from .rkhs import RkhsModel
from .series import NcSeries, column_slice, evaluate, linear_combination, multiply


@dataclass(frozen=True)
class Multiplier:
    """S together with its source and target kernels."""

    s: NcSeries
    source: KernelBase
    target: KernelBase

    def __post_init__(self):
        if self.s.d != self.source.d or self.s.d != self.target.d:
            raise DimMismatch("multiplier and kernels must share the variable count")
        if self.s.out_dim != self.target.y_dim or self.s.in_dim != self.source.y_dim:
            raise DimMismatch(
                f"multiplier shape {self.s.out_dim}x{self.s.in_dim} does not match "
                f"target/source coefficient dimensions {self.target.y_dim}/{self.source.y_dim}"
            )
        if self.source.algebra != self.target.algebra:
            raise DimMismatch("source and target kernels must share the coefficient algebra")


def _element_slice_series(model: RkhsModel, coeffs) -> list[NcSeries]:
    """The k column-slice series of a model element."""
    c = model._coerce(coeffs)
    k = model.algebra.k
    slices = []
    for col in range(k):
        parts = [column_slice(f, col) for f in model.basis]
        weights = [c[model.slice_index(i, col)] for i in range(model.n_basis)]
        slices.append(linear_combination(parts, weights))
    return slices


def apply_multiplier_series(mult: Multiplier, source_model: RkhsModel, coeffs) -> list[NcSeries]:
    """Slice series of M_S f, computed by series multiplication."""
    return [multiply(mult.s, sl) for sl in _element_slice_series(source_model, coeffs)]


@dataclass(frozen=True)
class Represented:
    """Coefficients of a represented element with its least-squares residual."""

    coefficients: np.ndarray
    residual: float


def apply_multiplier(
    mult: Multiplier,
    source_model: RkhsModel,
    coeffs,
    target_model: RkhsModel | None = None,
    tol: Tolerances = DEFAULT_TOL,
):
    """Apply M_S to a source element.

    Without a target model, returns the slice series of the image function.
    With one, represents the image in the target basis by least squares,
    reporting the residual; raises :class:`NotInTarget` when one survives.
    """
    image = apply_multiplier_series(mult, source_model, coeffs)
    if target_model is None:
        return image
    return _represent_in_model(image, target_model, tol)


def _represent_in_model(slices: list[NcSeries], model: RkhsModel, tol: Tolerances) -> Represented:
    k = model.algebra.k
    if len(slices) != k:
        raise DimMismatch("slice count does not match the target algebra")
    words = sorted(
        {w for f in model.basis for w in f.support} | {w for s in slices for w in s.support},
        key=lambda w: (len(w), w),
    )
    columns = []
    for i in range(model.n_basis):
        for col in range(k):
            sl = column_slice(model.basis[i], col)
            columns.append(np.concatenate([sl.coefficient(w).reshape(-1) for w in words]))
    span = np.array(columns).T

    target_vecs = []
    for col in range(k):
        target_vecs.append(np.concatenate([slices[col].coefficient(w).reshape(-1) for w in words]))

    # the (i, col) slice of the image expands only over (j, col) slices of the
    # target, but solving jointly over the full span is equivalent and simpler
    out = np.zeros(model.dim, dtype=np.complex128)
    scale = max(1.0, max((np.linalg.norm(t) for t in target_vecs), default=1.0))
    worst = 0.0
    for col in range(k):
        sol, *_ = np.linalg.lstsq(span, target_vecs[col], rcond=None)
        residual = float(np.linalg.norm(span @ sol - target_vecs[col]))
        if residual > tol.eq_rel * scale * 100:
            raise NotInTarget(residual)
        worst = max(worst, residual)
        for i in range(model.n_basis):
            for c2 in range(k):
                if c2 == col:
                    out[model.slice_index(i, col)] += sol[i * k + c2]
                elif abs(sol[i * k + c2]) > tol.eq_rel * scale * 100:
                    raise NotInTarget(abs(sol[i * k + c2]), "image mixes slice slots")
    return Represented(out, worst)


def multiplier_matrix(
    mult: Multiplier,
    source_model: RkhsModel,
    target_model: RkhsModel,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Coefficient matrix of M_S: source slices -> target slices."""
    cols = []
    for idx in range(source_model.dim):
        e = np.zeros(source_model.dim, dtype=np.complex128)
        e[idx] = 1.0
        cols.append(apply_multiplier(mult, source_model, e, target_model, tol).coefficients)
    return np.array(cols).T


def dbr_kernel(mult: Multiplier) -> CallableKernel:
    """The kernel K(Z,W)(P) - S(Z) K'(Z,W)(P) S(W)*."""
    s = mult.s
    source, target = mult.source, mult.target

    def fn(z: MatrixTuple, w: MatrixTuple, p: np.ndarray) -> np.ndarray:
        sz = evaluate(s, z)
        sw = evaluate(s, w)
        inner = source.evaluate(z, w, p, allow_truncation=True)
        return target.evaluate(z, w, p, allow_truncation=True) - sz @ inner @ sw.conj().T

    sampler = target.default_sampler
    if source.default_sampler == "nilpotent" or target.default_sampler == "nilpotent":
        sampler = "nilpotent"
    return CallableKernel(target.d, target.y_dim, target.algebra, fn, default_sampler=sampler)


def contractivity_certificate(
    mult: Multiplier,
    n_points: int = 4,
    sizes=(1, 2, 3),
    n_rows: int = 2,
    seed=0,
    tol: Tolerances = DEFAULT_TOL,
    sampler: str | None = None,
) -> CpCertificate:
    """Sampled cp test of the de Branges-Rovnyak kernel of S."""
    return cp_certificate(
        dbr_kernel(mult), n_points=n_points, sizes=sizes, n_rows=n_rows,
        seed=seed, tol=tol, sampler=sampler,
    )


def adjoint_on_kernel_element(
    mult: Multiplier, w: MatrixTuple, v, y
) -> KernelElement:
    """(M_S)* K_{W,v,y} = K'_{W, v, S(W)* y}."""
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if y.shape[0] != w.n * mult.target.y_dim:
        raise DimMismatch("y must lie in the target Y^m")
    sw = evaluate(mult.s, w)
    return KernelElement(mult.source, w, v, sw.conj().T @ y)


# ---------------------------------------------------------------------------
# Brangesian complements at finite dimension
# ---------------------------------------------------------------------------

def _sqrtm_hpd(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(hermitize(g))
    if vals[0] <= 0:
        raise InputError("gramian must be positive definite")
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    inv_root = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return root, inv_root


_RANK_CUT = 1e-13


class BrangesianDecomposition:
    """Complementary pair M_A = Ran A and H_A = Ran (I - A A*)^{1/2}.

    Works in the coordinates induced by the source/target gramians; ``decompose``
    realizes the unique norm-minimizing split h = iota iota* h + (I - iota iota*) h.
    All range projections and pseudo-inverses come from one SVD of the
    normalized contraction so that numerically-zero directions are cut exactly.
    """

    def __init__(self, a: np.ndarray, gram_src=None, gram_tgt=None,
                 tol: Tolerances = DEFAULT_TOL):
        a = as_cmatrix(a)
        n_tgt, n_src = a.shape
        gram_src = np.eye(n_src) if gram_src is None else as_cmatrix(gram_src, n_src, n_src)
        gram_tgt = np.eye(n_tgt) if gram_tgt is None else as_cmatrix(gram_tgt, n_tgt, n_tgt)
        self.a = a
        self.gram_src = gram_src
        self.gram_tgt = gram_tgt
        self.tol = tol
        root_s, inv_root_s = _sqrtm_hpd(gram_src)
        root_t, inv_root_t = _sqrtm_hpd(gram_tgt)
        self._root_t, self._inv_root_t = root_t, inv_root_t
        self.a0 = root_t @ a @ inv_root_s

        u, svals, vh = np.linalg.svd(self.a0)
        norm = float(svals[0]) if svals.size else 0.0
        if norm > 1.0 + tol.psd_floor:
            raise NotContraction(f"operator norm {norm:.6f} exceeds 1")
        self.operator_norm = norm
        s_full = np.zeros(n_tgt)
        s_full[: svals.size] = np.clip(svals, 0.0, 1.0)
        s_cut = s_full.copy()
        s_cut[s_cut <= _RANK_CUT] = 0.0
        defect = np.clip(1.0 - s_cut**2, 0.0, None)
        defect[defect <= _RANK_CUT] = 0.0
        droot = np.sqrt(defect)

        inv_s = np.where(s_cut > 0, 1.0 / np.where(s_cut > 0, s_cut, 1.0), 0.0)
        inv_droot = np.where(droot > 0, 1.0 / np.where(droot > 0, droot, 1.0), 0.0)
        r = min(n_src, n_tgt)
        self._u = u
        self._defect_root = (u * droot) @ u.conj().T
        self._a0_pinv = (vh.conj().T[:, :r] * inv_s[:r]) @ u[:, :r].conj().T
        self._defect_pinv = (u * inv_droot) @ u.conj().T
        self._proj_m = (u * (s_cut > 0)) @ u.conj().T
        self._proj_h = (u * (droot > 0)) @ u.conj().T

        self.m_range_basis = self._inv_root_t @ u[:, s_cut > 0]
        self.h_range_basis = self._inv_root_t @ u[:, droot > 0]
        self.m_pullback_gram = self._pullback_gram(self.m_range_basis, self._a0_pinv)
        self.h_pullback_gram = self._pullback_gram(self.h_range_basis, self._defect_pinv)

    def _pullback_gram(self, basis_tgt: np.ndarray, pinv0: np.ndarray) -> np.ndarray:
        pre = pinv0 @ (self._root_t @ basis_tgt)
        return pre.conj().T @ pre

    @property
    def defect_root(self) -> np.ndarray:
        """(I - A0 A0*)^{1/2} in orthonormal coordinates.

        Feeding it back as a contraction realizes the double complement: its
        H-space is M_A with the same pull-back norm.
        """
        return self._defect_root

    # -- norms ---------------------------------------------------------------

    def ambient_norm(self, h) -> float:
        h0 = self._root_t @ np.asarray(h, dtype=np.complex128).reshape(-1)
        return float(np.linalg.norm(h0))

    def _member_norm(self, x, pinv0: np.ndarray, proj: np.ndarray, label: str) -> float:
        x0 = self._root_t @ np.asarray(x, dtype=np.complex128).reshape(-1)
        gap = float(np.linalg.norm(proj @ x0 - x0))
        if gap > self.tol.eq_rel * max(1.0, float(np.linalg.norm(x0))) * 1e3:
            raise InputError(f"vector is not in {label} (distance {gap:.3e})")
        return float(np.linalg.norm(pinv0 @ x0))

    def norm_m(self, x) -> float:
        """Pull-back norm on M_A = Ran A."""
        return self._member_norm(x, self._a0_pinv, self._proj_m, "Ran A")

    def norm_h(self, x) -> float:
        """Pull-back norm on H_A = Ran (I - A A*)^{1/2}."""
        return self._member_norm(x, self._defect_pinv, self._proj_h, "Ran (I - A A*)^{1/2}")

    # -- the canonical split ---------------------------------------------------

    def decompose(self, h) -> tuple[np.ndarray, np.ndarray]:
        """h = iota iota* h + (I - iota iota*) h in target coordinates."""
        h = np.asarray(h, dtype=np.complex128).reshape(-1)
        h0 = self._root_t @ h
        k0 = self.a0 @ (self.a0.conj().T @ h0)
        return self._inv_root_t @ k0, self._inv_root_t @ (h0 - k0)

    def split_cost(self, k, kprime) -> float:
        """||k||_M^2 + ||k'||_{H_A}^2 of a feasible split."""
        return self.norm_m(k) ** 2 + self.norm_h(kprime) ** 2

    def feasible_perturbation_basis(self) -> np.ndarray:
        """Orthonormal directions of Ran A  intersect  Ran (I - A A*)^{1/2}.

        Shifting the split along these directions keeps both parts in their
        spaces; the canonical split minimizes the cost over all such shifts.
        """
        prod = self._proj_m @ self._proj_h @ self._proj_m
        vals, vecs = np.linalg.eigh(hermitize(prod))
        keep = vals > 1.0 - 1e-9
        return self._inv_root_t @ vecs[:, keep]


def brangesian_complement(a, gram_src=None, gram_tgt=None,
                          tol: Tolerances = DEFAULT_TOL) -> BrangesianDecomposition:
    """Brangesian complement data of a contraction between gramian-weighted spaces."""
    return BrangesianDecomposition(a, gram_src, gram_tgt, tol)


# ---------------------------------------------------------------------------
# contractive containment
# ---------------------------------------------------------------------------

def difference_kernel(kprime: KernelBase, kernel: KernelBase) -> CallableKernel:
    """K'' = K - K', the complement kernel of a contractive containment."""
    if kprime.y_dim != kernel.y_dim or kprime.algebra != kernel.algebra:
        raise DimMismatch("kernels must share coefficient dimension and algebra")
    if kprime.d != kernel.d:
        raise DimMismatch("kernels must share the variable count")

    def fn(z, w, p):
        return kernel.evaluate(z, w, p, allow_truncation=True) - kprime.evaluate(
            z, w, p, allow_truncation=True
        )

    sampler = kernel.default_sampler
    if "nilpotent" in (kprime.default_sampler, kernel.default_sampler):
        sampler = "nilpotent"
    return CallableKernel(kernel.d, kernel.y_dim, kernel.algebra, fn, default_sampler=sampler)


def contractive_containment(
    kprime: KernelBase,
    kernel: KernelBase,
    n_points: int = 4,
    sizes=(1, 2, 3),
    n_rows: int = 2,
    seed=0,
    tol: Tolerances = DEFAULT_TOL,
    sampler: str | None = None,
) -> tuple[CpCertificate, CallableKernel]:
    """Certificate that H(K') embeds contractively in H(K): cp test of K - K'.

    On a pass the returned difference kernel is the Brangesian complement
    kernel H(K) (-)_dBR H(K') = H(K - K').
    """
    diff = difference_kernel(kprime, kernel)
    cert = cp_certificate(
        diff, n_points=n_points, sizes=sizes, n_rows=n_rows, seed=seed, tol=tol, sampler=sampler
    )
    return cert, diff
