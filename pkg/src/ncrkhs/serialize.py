"""JSON encoding of matrices, words, series, kernels and cp maps.

Complex scalars are two-element arrays [re, im]; matrices are row-major.
Serialized words use the stored (product-order) convention.  The canonical
dumper renders floats with 17 significant digits so that identical inputs
and seeds produce byte-identical payloads.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .core import InputError, MatrixTuple, as_cmatrix, validate_word
from .cpmaps import CpMap
from .formal import FormalKernel
from .kernels import (
    FULL_MATRIX,
    SCALAR,
    AlgebraSpec,
    GramBasisKernel,
    KernelBase,
    KolmogorovKernel,
    MomentKernel,
)
from .rkhs import RkhsModel
from .series import NcSeries


# ---------------------------------------------------------------------------
# canonical dumping
# ---------------------------------------------------------------------------

def _render_float(x: float) -> str:
    if x == 0.0:
        return "0"
    return format(float(x), ".17g")


def dumps_canonical(obj: Any) -> str:
    """Deterministic JSON text: dict order preserved, floats at 17 significant digits."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _render_float(float(obj))
    if isinstance(obj, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{dumps_canonical(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps_canonical(v) for v in obj) + "]"
    raise InputError(f"cannot serialize object of type {type(obj).__name__}")


# ---------------------------------------------------------------------------
# scalars, matrices, words, tuples
# ---------------------------------------------------------------------------

def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(data, where: str = "scalar") -> complex:
    if not isinstance(data, (list, tuple)) or len(data) != 2:
        raise InputError(f"{where}: complex scalar must be a two-element [re, im] array")
    try:
        return complex(float(data[0]), float(data[1]))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: non-numeric complex scalar") from exc


def encode_matrix(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [encode_complex(z) for z in m.reshape(-1)],
    }


def decode_matrix(data, where: str = "matrix") -> np.ndarray:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object with rows/cols/data")
    try:
        rows = int(data["rows"])
        cols = int(data["cols"])
        entries = data["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed matrix object") from exc
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise InputError(f"{where}: data must hold rows*cols = {rows * cols} entries")
    values = [decode_complex(e, where) for e in entries]
    return as_cmatrix(np.array(values, dtype=np.complex128).reshape(rows, cols))


def encode_word(w) -> list[int]:
    return [int(l) for l in w]


def decode_word(data, d: int, where: str = "word"):
    if not isinstance(data, list):
        raise InputError(f"{where}: a word is an array of integers")
    try:
        return validate_word([int(l) for l in data], d)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: non-integer letter") from exc


def encode_tuple(z: MatrixTuple) -> dict:
    return {
        "d": z.d,
        "n": z.n,
        "coords": [encode_matrix(c) for c in z.coords],
    }


def decode_tuple(data, where: str = "point") -> MatrixTuple:
    if not isinstance(data, dict) or "coords" not in data:
        raise InputError(f"{where}: expected an object with d/n/coords")
    coords = [decode_matrix(c, f"{where}.coords[{i}]") for i, c in enumerate(data["coords"])]
    z = MatrixTuple(tuple(coords))
    if "d" in data and int(data["d"]) != z.d:
        raise InputError(f"{where}: declared d={data['d']} but {z.d} coordinates given")
    if "n" in data and int(data["n"]) != z.n:
        raise InputError(f"{where}: declared n={data['n']} but coordinates are {z.n}x{z.n}")
    return z


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

def encode_series(f: NcSeries) -> dict:
    return {
        "d": f.d,
        "p": f.out_dim,
        "q": f.in_dim,
        "terms": [
            {"word": encode_word(w), "coeff": encode_matrix(c)} for w, c in f.terms.items()
        ],
    }


def decode_series(data, where: str = "series") -> NcSeries:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object with d/p/q/terms")
    try:
        d = int(data["d"])
        p = int(data["p"])
        q = int(data["q"])
        raw_terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed series object") from exc
    terms = {}
    for i, item in enumerate(raw_terms):
        word = decode_word(item.get("word"), d, f"{where}.terms[{i}].word")
        if word in terms:
            raise InputError(f"{where}.terms[{i}]: duplicate word {list(word)}")
        terms[word] = decode_matrix(item.get("coeff"), f"{where}.terms[{i}].coeff")
    return NcSeries(d, p, q, terms)


# ---------------------------------------------------------------------------
# algebras and kernels
# ---------------------------------------------------------------------------

def encode_algebra(a: AlgebraSpec) -> dict:
    return {"kind": a.kind, "k": a.k, "r": a.r}


def decode_algebra(data, where: str = "algebra") -> AlgebraSpec:
    if data is None:
        return AlgebraSpec(SCALAR)
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object with kind/k/r")
    kind = data.get("kind", SCALAR)
    if kind not in (SCALAR, FULL_MATRIX):
        raise InputError(f"{where}: unknown algebra kind {kind!r}")
    return AlgebraSpec(kind, int(data.get("k", 1)), int(data.get("r", 1)))


def _encode_moment_table(moments) -> list[dict]:
    return [
        {"row_word": encode_word(wa), "col_word": encode_word(wb), "coeff": encode_matrix(c)}
        for (wa, wb), c in moments.items()
    ]


def _decode_moment_table(data, d: int, where: str) -> dict:
    moments = {}
    for i, item in enumerate(data):
        wa = decode_word(item.get("row_word"), d, f"{where}[{i}].row_word")
        wb = decode_word(item.get("col_word"), d, f"{where}[{i}].col_word")
        if (wa, wb) in moments:
            raise InputError(f"{where}[{i}]: duplicate moment pair")
        moments[(wa, wb)] = decode_matrix(item.get("coeff"), f"{where}[{i}].coeff")
    return moments


def encode_kernel(kernel: KernelBase) -> dict:
    if isinstance(kernel, MomentKernel):
        return {
            "form": "moment",
            "d": kernel.d,
            "y_dim": kernel.y_dim,
            "max_len": kernel.max_len,
            "moments": _encode_moment_table(kernel.moments),
        }
    if isinstance(kernel, KolmogorovKernel):
        return {
            "form": "kolmogorov",
            "algebra": encode_algebra(kernel.algebra),
            "s": kernel.s,
            "h": encode_series(kernel.h),
        }
    if isinstance(kernel, GramBasisKernel):
        return {
            "form": "gram_basis",
            "algebra": encode_algebra(kernel.algebra),
            "basis": [encode_series(f) for f in kernel.basis],
            "gram": encode_matrix(kernel.gram),
        }
    raise InputError(f"kernel of type {type(kernel).__name__} has no file form")


def decode_kernel(data, where: str = "kernel") -> KernelBase:
    if not isinstance(data, dict) or "form" not in data:
        raise InputError(f"{where}: expected an object with a 'form' field")
    form = data["form"]
    if form == "moment":
        try:
            d = int(data["d"])
            y_dim = int(data["y_dim"])
            max_len = int(data["max_len"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{where}: malformed moment kernel") from exc
        moments = _decode_moment_table(data.get("moments", []), d, f"{where}.moments")
        return MomentKernel(d, y_dim, moments, max_len)
    if form == "kolmogorov":
        algebra = decode_algebra(data.get("algebra"), f"{where}.algebra")
        h = decode_series(data.get("h"), f"{where}.h")
        s = int(data.get("s", max(1, h.in_dim // max(1, algebra.rep_dim))))
        return KolmogorovKernel(algebra, h, s)
    if form == "gram_basis":
        algebra = decode_algebra(data.get("algebra"), f"{where}.algebra")
        basis = [decode_series(b, f"{where}.basis[{i}]") for i, b in enumerate(data.get("basis", []))]
        gram = decode_matrix(data.get("gram"), f"{where}.gram")
        return GramBasisKernel(algebra, basis, gram)
    raise InputError(f"{where}: unknown kernel form {form!r}")


def encode_formal_kernel(kernel: FormalKernel) -> dict:
    return {
        "formal": True,
        "form": "moment",
        "d": kernel.d,
        "y_dim": kernel.y_dim,
        "max_len": kernel.max_len,
        "moments": _encode_moment_table(kernel.moments),
    }


def decode_formal_kernel(data, where: str = "formal kernel") -> FormalKernel:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object")
    try:
        d = int(data["d"])
        y_dim = int(data["y_dim"])
        max_len = int(data["max_len"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed formal kernel") from exc
    moments = _decode_moment_table(data.get("moments", []), d, f"{where}.moments")
    return FormalKernel(d, y_dim, moments, max_len)


# ---------------------------------------------------------------------------
# RKHS models and cp maps
# ---------------------------------------------------------------------------

def encode_model(m: RkhsModel) -> dict:
    return {
        "algebra": encode_algebra(m.algebra),
        "y_dim": m.y_dim,
        "basis": [encode_series(f) for f in m.basis],
        "gram": encode_matrix(m.gram),
    }


def decode_model(data, where: str = "model") -> RkhsModel:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object with algebra/basis/gram")
    algebra = decode_algebra(data.get("algebra"), f"{where}.algebra")
    basis = [decode_series(b, f"{where}.basis[{i}]") for i, b in enumerate(data.get("basis", []))]
    if not basis:
        raise InputError(f"{where}: model needs a nonempty basis")
    gram = decode_matrix(data.get("gram"), f"{where}.gram")
    return RkhsModel(algebra, basis, gram)


def encode_cp_map(phi: CpMap) -> dict:
    return {
        "k": phi.k,
        "m": phi.m,
        "units": [
            [encode_matrix(phi.unit_values[(p, q)]) for q in range(phi.k)] for p in range(phi.k)
        ],
    }


def decode_cp_map(data, where: str = "map") -> CpMap:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object with k/m/units")
    try:
        k = int(data["k"])
        m = int(data["m"])
        rows = data["units"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed cp-map object") from exc
    if not isinstance(rows, list) or len(rows) != k or any(len(r) != k for r in rows):
        raise InputError(f"{where}: units must be a {k} x {k} grid of matrices")
    units = {
        (p, q): decode_matrix(rows[p][q], f"{where}.units[{p}][{q}]")
        for p in range(k)
        for q in range(k)
    }
    return CpMap(k, m, units)
