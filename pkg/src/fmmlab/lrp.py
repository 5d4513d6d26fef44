"""Bilinear (LRP) representation of matrix-multiplication schemes.

A scheme multiplying an m x k by a k x n matrix with r elementwise
products is a triple (L, R, P): C = devectorize(P @ ((L @ vec A) * (R @ vec B))),
with vec the row-major vectorization.  Coefficients are exact dyadics;
evaluation over float inputs uses a float image of the triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dyadic import ZERO, Dyadic

__all__ = [
    "LrpScheme",
    "ValidationReport",
    "vectorize",
    "devectorize",
    "apply_one_level",
    "validate_scheme",
    "as_dyadic_matrix",
    "as_float_matrix",
]


def _as_dyadic(value):
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, float):
        return Dyadic.from_float(value)  # exact: floats are dyadic
    return Dyadic(value)


def as_dyadic_matrix(rows):
    """Build a dense object matrix of Dyadic from nested values."""
    arr = np.asarray(rows, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for idx, value in enumerate(flat_in):
        flat_out[idx] = _as_dyadic(value)
    return out


def as_float_matrix(matrix):
    """Exact float image of a dyadic matrix (raises if any entry is inexact)."""
    matrix = np.asarray(matrix, dtype=object)
    out = np.empty(matrix.shape, dtype=np.float64)
    flat_in = matrix.reshape(-1)
    flat_out = out.reshape(-1)
    for idx, value in enumerate(flat_in):
        if not isinstance(value, Dyadic):
            value = Dyadic(value)
        flat_out[idx] = value.to_float(strict=True)
    return out


@dataclass(eq=False)
class LrpScheme:
    """Immutable-by-convention scheme <m,k,n:r> with dyadic coefficients."""

    id: str
    m: int
    k: int
    n: int
    r: int
    L: np.ndarray  # r x (m*k)
    R: np.ndarray  # r x (k*n)
    P: np.ndarray  # (m*n) x r
    _floats: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("m", "k", "n", "r"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        self.L = as_dyadic_matrix(self.L)
        self.R = as_dyadic_matrix(self.R)
        self.P = as_dyadic_matrix(self.P)
        expected = {
            "L": (self.r, self.m * self.k),
            "R": (self.r, self.k * self.n),
            "P": (self.m * self.n, self.r),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ValueError(f"{name} has shape {actual}, expected {shape}")

    def float_triple(self):
        if self._floats is None:
            self._floats = (
                as_float_matrix(self.L),
                as_float_matrix(self.R),
                as_float_matrix(self.P),
            )
        return self._floats


@dataclass
class ValidationReport:
    scheme_id: str
    checked: int
    failures: list

    @property
    def valid(self):
        return not self.failures

    def __str__(self):
        if self.valid:
            return f"{self.scheme_id}: valid ({self.checked} elementary products checked)"
        lines = [
            f"{self.scheme_id}: INVALID ({len(self.failures)} of {self.checked} "
            "elementary products wrong)"
        ]
        for a, b, c, d in self.failures[:20]:
            lines.append(f"  E[{a},{b}] * E[{c},{d}] mismatched")
        if len(self.failures) > 20:
            lines.append(f"  ... and {len(self.failures) - 20} more")
        return "\n".join(lines)


def vectorize(matrix):
    """Row-major vectorization: entry (i, j) lands at index i*cols + j."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError("vectorize expects a 2-D matrix")
    return matrix.reshape(-1)


def devectorize(vector, rows, cols):
    vector = np.asarray(vector)
    if vector.ndim != 1 or vector.size != rows * cols:
        raise ValueError(f"cannot reshape {vector.size} entries into {rows}x{cols}")
    return vector.reshape(rows, cols)


def _is_float(arr):
    return arr.dtype.kind == "f"


def _to_exact(arr):
    if arr.dtype == object or arr.dtype.kind in "iu":
        return as_dyadic_matrix(arr)
    if arr.dtype.kind == "f":
        out = np.empty(arr.shape, dtype=object)
        flat_in, flat_out = arr.reshape(-1), out.reshape(-1)
        for idx, value in enumerate(flat_in):
            flat_out[idx] = Dyadic.from_float(float(value))
        return out
    raise TypeError(f"unsupported element dtype {arr.dtype}")


def apply_one_level(scheme, A, B):
    """One non-recursive application of the scheme: P((L vec A) * (R vec B)).

    Float inputs run in 64-bit arithmetic; anything else is evaluated
    exactly over Dyadic elements.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != (scheme.m, scheme.k) or B.shape != (scheme.k, scheme.n):
        raise ValueError(
            f"scheme {scheme.id} needs {scheme.m}x{scheme.k} by "
            f"{scheme.k}x{scheme.n} operands, got {A.shape} by {B.shape}"
        )
    if _is_float(A) and _is_float(B):
        Lf, Rf, Pf = scheme.float_triple()
        products = (Lf @ vectorize(A.astype(np.float64))) * (
            Rf @ vectorize(B.astype(np.float64))
        )
        return devectorize(Pf @ products, scheme.m, scheme.n)
    Ax = _to_exact(A)
    Bx = _to_exact(B)
    products = (scheme.L @ vectorize(Ax)) * (scheme.R @ vectorize(Bx))
    return devectorize(scheme.P @ products, scheme.m, scheme.n)


def validate_scheme(scheme):
    """Exhaustively check all elementary operand pairs in exact arithmetic.

    By bilinearity the scheme is correct iff it multiplies every pair of
    elementary matrices (E_ab, E_cd) correctly; failures are reported as
    (a, b, c, d) quadruples, not raised.
    """
    m, k, n = scheme.m, scheme.k, scheme.n
    failures = []
    checked = 0
    A = np.full((m, k), ZERO, dtype=object)
    B = np.full((k, n), ZERO, dtype=object)
    one = Dyadic(1)
    for a in range(m):
        for b in range(k):
            A[a, b] = one
            for c in range(k):
                for d in range(n):
                    B[c, d] = one
                    got = apply_one_level(scheme, A, B)
                    checked += 1
                    ok = True
                    for i in range(m):
                        for j in range(n):
                            expect = one if (b == c and i == a and j == d) else ZERO
                            if got[i, j] != expect:
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        failures.append((a, b, c, d))
                    B[c, d] = ZERO
            A[a, b] = ZERO
    return ValidationReport(scheme.id, checked, failures)
