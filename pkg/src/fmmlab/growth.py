"""Growth factors, error-bound exponents and complexity constants.

The (p, q)-growth factor of a scheme bounds the first-order error
amplification per recursion level: for each output j, sum over the r
products the dual-q norms of the corresponding L and R rows weighted by
|P[j, i]|, then take the p-norm over outputs.  Its base-k logarithm is the
exponent of the error-bound function, with k the scheme's middle dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "GrowthReport",
    "dual_exponent",
    "growth_factor",
    "gamma2",
    "error_exponent",
    "complexity_constant",
    "alt_complexity_constant",
    "growth_report",
    "NORM_PAIRS",
]

INF = math.inf

NORM_PAIRS = ((INF, INF), (INF, 2), (2, INF), (2, 2))


def dual_exponent(q):
    """Hoelder dual: 1/q + 1/q* = 1 on {1, 2, inf}."""
    if q == INF:
        return 1
    if q == 2:
        return 2
    if q == 1:
        return INF
    raise ValueError(f"unsupported norm exponent {q!r}")


def _two_pass_2norm(values):
    peak = np.max(np.abs(values)) if values.size else 0.0
    if peak == 0.0:
        return 0.0
    scaled = values / peak
    return peak * math.sqrt(float(np.dot(scaled, scaled)))


def _vector_norm(values, p):
    values = np.asarray(values, dtype=np.float64)
    if p == INF:
        return float(np.max(np.abs(values)))
    if p == 2:
        return _two_pass_2norm(values)
    if p == 1:
        return float(np.sum(np.abs(values)))
    raise ValueError(f"unsupported norm exponent {p!r}")


def _row_norms(matrix, p):
    return np.array([_vector_norm(row, p) for row in matrix])


def growth_factor(scheme, p, q):
    """Per-level error growth factor for output p-norm and input q-norm."""
    if p not in (2, INF) or q not in (2, INF):
        raise ValueError("growth_factor is defined here for p, q in {2, inf}")
    qs = dual_exponent(q)
    Lf, Rf, Pf = scheme.float_triple()
    weights = _row_norms(Lf, qs) * _row_norms(Rf, qs)
    per_output = np.abs(Pf) @ weights
    return _vector_norm(per_output, p)


def gamma2(scheme):
    """Sum over products of ||L row|| * ||R row|| * ||P column|| (2-norms).

    A smoother upper bound for the (2,2)-growth factor; this is the
    quantity the accurate scheme in the catalog was selected to minimize.
    """
    Lf, Rf, Pf = scheme.float_triple()
    return float(
        np.sum(_row_norms(Lf, 2) * _row_norms(Rf, 2) * _row_norms(Pf.T, 2))
    )


def error_exponent(gamma, k):
    """log_k(gamma): the exponent of the error-bound function."""
    if gamma < 1:
        raise ValueError("growth factor must be >= 1")
    if k < 2:
        raise ValueError("middle dimension must be >= 2")
    return math.log(gamma) / math.log(k)


def complexity_constant(adds, r, m, n):
    """Leading constant and exponent of the straight-line recursion cost.

    A scheme of rank r on m x m blocks (square case) with `adds` linear
    operations per level costs (1 + adds/(r - m*n)) * N**log_m(r) plus
    lower-order terms; the leading constant is returned exactly.
    """
    if r <= m * n:
        raise ValueError("rank must exceed m*n for a sub-cubic recursion")
    leading = 1 + Fraction(adds, r - m * n)
    return leading, math.log(r) / math.log(m)


def alt_complexity_constant(core_ops, r, t, m=4):
    """Leading constant for the alternative-basis recursion.

    The sparse core pays `core_ops` linear operations per level and the
    recursion shrinks by r - t, with t the inner dimension of the
    factorization; the change-of-basis cost is lower order.
    """
    if r <= t:
        raise ValueError("rank must exceed the inner dimension")
    leading = 1 + Fraction(core_ops, r - t)
    return leading, math.log(r) / math.log(m)


@dataclass
class GrowthReport:
    scheme_id: str
    k: int
    gamma: dict
    gamma2: float
    exponents: dict

    def rows(self):
        for pq in NORM_PAIRS:
            yield pq, self.gamma[pq], self.exponents[pq]


def growth_report(scheme):
    gammas = {pq: growth_factor(scheme, *pq) for pq in NORM_PAIRS}
    exponents = {pq: error_exponent(g, scheme.k) for pq, g in gammas.items()}
    return GrowthReport(
        scheme_id=scheme.id,
        k=scheme.k,
        gamma=gammas,
        gamma2=gamma2(scheme),
        exponents=exponents,
    )
