"""Recursive matrix multiplication driven by a scheme bundle.

Inputs of any size are zero-padded up to base * m**levels (base <= the
plan threshold), the scheme is applied for the requested number of levels
and the base products fall back to classical multiplication with a fixed
accumulation order.  When the bundle ships straight-line programs the
recursion executes them (LinCombine = block additions and scalings,
Product = recursive call); otherwise it combines blocks with the scheme
matrices.  All intermediate block populations are kept as one batched
array per stage so the float path stays inside vectorized numpy.

Over Dyadic elements every path (dense, SLP-driven, alternative basis)
returns the exact classical product bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import slp as slp_mod
from .dyadic import ZERO, Dyadic
from .lrp import _to_exact, as_float_matrix

__all__ = ["RecursionPlan", "classical_multiply", "multiply", "multiply_alt"]


@dataclass(frozen=True)
class RecursionPlan:
    """levels=None picks the smallest depth whose base blocks fit the
    threshold; threshold=None defaults to 4x the scheme's block dimension."""

    levels: int | None = None
    base_threshold: int | None = None
    padding: str = "zero"

    def __post_init__(self):
        if self.levels is not None and self.levels < 0:
            raise ValueError("levels must be non-negative")
        if self.base_threshold is not None and self.base_threshold < 1:
            raise ValueError("base threshold must be positive")
        if self.padding != "zero":
            raise ValueError(f"unsupported padding policy {self.padding!r}")


def _ceil_div(a, b):
    return -(-a // b)


def _resolve_plan(scheme, dims, plan):
    plan = plan or RecursionPlan()
    threshold = plan.base_threshold
    if threshold is None:
        threshold = 4 * max(scheme.m, scheme.k, scheme.n)
    splits = (scheme.m, scheme.k, scheme.n)
    if plan.levels is not None:
        levels = plan.levels
    else:
        levels = 0
        while any(
            _ceil_div(dim, split**levels) > threshold
            for dim, split in zip(dims, splits)
        ):
            levels += 1
    bases = tuple(
        _ceil_div(dim, split**levels) for dim, split in zip(dims, splits)
    )
    return levels, bases


def _prepare_pair(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("operands must be 2-D matrices")
    if A.shape[1] != B.shape[0]:
        raise ValueError(
            f"shape mismatch: inner dimensions {A.shape[1]} and {B.shape[0]} differ"
        )
    if A.dtype.kind == "f" and B.dtype.kind == "f":
        return A.astype(np.float64, copy=False), B.astype(np.float64, copy=False), True
    return _to_exact(A), _to_exact(B), False


def _zeros(shape, is_float):
    if is_float:
        return np.zeros(shape, dtype=np.float64)
    return np.full(shape, ZERO, dtype=object)


def _pad_to(X, rows, cols, is_float):
    if X.shape == (rows, cols):
        return X
    out = _zeros((rows, cols), is_float)
    out[: X.shape[0], : X.shape[1]] = X
    return out


def _split_grid(batch, rows, cols):
    """(B, rows*s, cols*u) -> (B, rows*cols, s, u) with row-major block order."""
    b, height, width = batch.shape
    s, u = height // rows, width // cols
    blocks = batch.reshape(b, rows, s, cols, u).transpose(0, 1, 3, 2, 4)
    return blocks.reshape(b, rows * cols, s, u)


def _join_grid(blocks, rows, cols):
    b, count, s, u = blocks.shape
    grid = blocks.reshape(b, rows, cols, s, u).transpose(0, 1, 3, 2, 4)
    return grid.reshape(b, rows * s, cols * u)


def _classical_batched(Ab, Bb, is_float):
    b, m, k = Ab.shape
    _, _, n = Bb.shape
    out = _zeros((b, m, n), is_float)
    for t in range(k):  # ascending k: same addition order as the triple loop
        out += Ab[:, :, t : t + 1] * Bb[:, t : t + 1, :]
    return out


def classical_multiply(A, B):
    """Cubic reference product with row-major, index-ordered accumulation."""
    A, B, is_float = _prepare_pair(A, B)
    return _classical_batched(A[None], B[None], is_float)[0]


def _combine_rows(coeffs, blocks, is_float):
    """Linear block combinations: out[:, i] = sum_j coeffs[i, j] * blocks[:, j]."""
    if is_float:
        return np.einsum("ij,bjxy->bixy", coeffs, blocks)
    b, _, s, u = blocks.shape
    out = np.empty((b, coeffs.shape[0], s, u), dtype=object)
    for i in range(coeffs.shape[0]):
        acc = None
        for j in range(coeffs.shape[1]):
            coeff = coeffs[i, j]
            if coeff.m == 0:
                continue
            if coeff.m == 1 and coeff.e == 0:
                term = blocks[:, j]
            else:
                term = blocks[:, j] * coeff
            acc = term if acc is None else acc + term
        out[:, i] = acc if acc is not None else _zeros((b, s, u), is_float)
    return out


def _stack_named(outputs, names):
    return np.stack([outputs[name] for name in names], axis=1)


def _recurse_dense(bundle, Ab, Bb, level, is_float, use_slps):
    scheme = bundle.scheme
    if level == 0:
        return _classical_batched(Ab, Bb, is_float)
    a_blocks = _split_grid(Ab, scheme.m, scheme.k)
    b_blocks = _split_grid(Bb, scheme.k, scheme.n)
    if use_slps:
        l_out = slp_mod.eval_slp(
            bundle.slp_l,
            {name: a_blocks[:, i] for i, name in enumerate(bundle.slp_l.inputs)},
        )
        r_out = slp_mod.eval_slp(
            bundle.slp_r,
            {name: b_blocks[:, i] for i, name in enumerate(bundle.slp_r.inputs)},
        )
        pairs = [(ins.left, ins.right, ins.target) for ins in bundle.slp_had.instructions]
        left = np.stack([l_out[l] for l, _, _ in pairs], axis=1)
        right = np.stack([r_out[r] for _, r, _ in pairs], axis=1)
    else:
        if is_float:
            Lc, Rc, _ = scheme.float_triple()
        else:
            Lc, Rc = scheme.L, scheme.R
        left = _combine_rows(Lc, a_blocks, is_float)
        right = _combine_rows(Rc, b_blocks, is_float)

    b = Ab.shape[0]
    flat_left = left.reshape(b * scheme.r, *left.shape[2:])
    flat_right = right.reshape(b * scheme.r, *right.shape[2:])
    products = _recurse_dense(bundle, flat_left, flat_right, level - 1, is_float, use_slps)
    products = products.reshape(b, scheme.r, *products.shape[1:])

    if use_slps:
        p_out = slp_mod.eval_slp(
            bundle.slp_p,
            {tgt: products[:, i] for i, (_, _, tgt) in enumerate(pairs)},
        )
        c_blocks = _stack_named(p_out, bundle.slp_p.outputs)
    else:
        Pc = scheme.float_triple()[2] if is_float else scheme.P
        c_blocks = _combine_rows(Pc, products, is_float)
    return _join_grid(c_blocks, scheme.m, scheme.n)


def multiply(bundle, A, B, plan=None, driver="auto"):
    """Recursive product of arbitrary-size operands under a plan.

    driver: "auto" uses the bundle's straight-line programs when all four
    are present, "slp" requires them, "matrix" forces the scheme matrices.
    """
    scheme = bundle.scheme
    A, B, is_float = _prepare_pair(A, B)
    M, K = A.shape
    N = B.shape[1]
    levels, (m0, k0, n0) = _resolve_plan(scheme, (M, K, N), plan)
    if driver not in ("auto", "slp", "matrix"):
        raise ValueError(f"unknown driver {driver!r}")
    if driver == "slp" and not bundle.has_slps:
        raise ValueError(f"bundle {bundle.id} has no straight-line programs")
    use_slps = bundle.has_slps if driver == "auto" else driver == "slp"
    if levels == 0:
        return _classical_batched(A[None], B[None], is_float)[0]
    Ap = _pad_to(A, m0 * scheme.m**levels, k0 * scheme.k**levels, is_float)
    Bp = _pad_to(B, k0 * scheme.k**levels, n0 * scheme.n**levels, is_float)
    C = _recurse_dense(bundle, Ap[None], Bp[None], levels, is_float, use_slps)[0]
    return C[:M, :N]


# ---------------------------------------------------------------------------
# Alternative-basis recursion
# ---------------------------------------------------------------------------


def _alt_float_cache(alt):
    cache = getattr(alt, "_floats", None)
    if cache is None:
        cache = {
            name: as_float_matrix(getattr(alt, name))
            for name in ("l_alt", "r_alt", "p_alt", "l_cob", "r_cob", "p_cob")
        }
        alt._floats = cache
    return cache


def _cob_forward(X, cob, program, split_rows, split_cols, levels, is_float):
    """Recursively re-express X in the transformed basis: at each level the
    split_rows x split_cols block grid is mapped to t combinations."""
    cur = X[None]
    for _ in range(levels):
        blocks = _split_grid(cur, split_rows, split_cols)
        if program is not None:
            outs = slp_mod.eval_slp(
                program,
                {name: blocks[:, i] for i, name in enumerate(program.inputs)},
            )
            combined = _stack_named(outs, program.outputs)
        else:
            combined = _combine_rows(cob, blocks, is_float)
        cur = combined.reshape(-1, *combined.shape[2:])
    return cur


def _cob_inverse(W, p_cob, program, join_rows, join_cols, t, levels, is_float):
    cur = W
    for _ in range(levels):
        b = cur.shape[0] // t
        groups = cur.reshape(b, t, *cur.shape[1:])
        if program is not None:
            outs = slp_mod.eval_slp(
                program,
                {name: groups[:, i] for i, name in enumerate(program.inputs)},
            )
            blocks = _stack_named(outs, program.outputs)
        else:
            blocks = _combine_rows(p_cob, groups, is_float)
        cur = _join_grid(blocks, join_rows, join_cols)
    return cur[0] if cur.shape[0] == 1 else cur


def _sparse_combine(coeffs, groups, is_float):
    """out[:, i] = sum_j coeffs[i, j] * groups[:, j] for grouped reps
    (batch, cols, rep, s, u); the alt matrices are near-permutations so
    single-unit rows are plain views."""
    parts = []
    cols = coeffs.shape[1]
    for i in range(coeffs.shape[0]):
        acc = None
        for j in range(cols):
            coeff = coeffs[i, j]
            zero = coeff == 0.0 if is_float else coeff.m == 0
            if zero:
                continue
            if (coeff == 1.0 if is_float else (coeff.m == 1 and coeff.e == 0)):
                term = groups[:, j]
            else:
                term = groups[:, j] * coeff
            acc = term if acc is None else acc + term
        if acc is None:
            acc = _zeros(groups[:, 0].shape, is_float)
        parts.append(acc)
    return np.stack(parts, axis=1)


def _core_recurse(alt, Ab, Bb, depth, is_float, mats):
    """Ab, Bb: (batch, rep, s, u) transformed representations."""
    if depth == 0:
        return _classical_batched(Ab[:, 0], Bb[:, 0], is_float)[:, None]
    batch, rep = Ab.shape[0], Ab.shape[1]
    t = alt.t
    child = rep // t
    Ag = Ab.reshape(batch, t, child, *Ab.shape[2:])
    Bg = Bb.reshape(batch, t, child, *Bb.shape[2:])
    left = _sparse_combine(mats["l_alt"], Ag, is_float)
    right = _sparse_combine(mats["r_alt"], Bg, is_float)
    r = left.shape[1]
    flat_left = left.reshape(batch * r, child, *left.shape[3:])
    flat_right = right.reshape(batch * r, child, *right.shape[3:])
    products = _core_recurse(alt, flat_left, flat_right, depth - 1, is_float, mats)
    products = products.reshape(batch, r, child, *products.shape[2:])
    w = _sparse_combine(mats["p_alt"], products, is_float)
    return w.reshape(batch, t * child, *w.shape[3:])


def multiply_alt(bundle, A, B, plan=None):
    """Alternative-basis recursion: change of basis applied recursively to
    both operands, sparse-core recursion over the inner dimension, inverse
    change of basis on the output.  Exactly equals multiply() over Dyadic
    elements."""
    alt = bundle.alt
    if alt is None:
        raise ValueError(f"bundle {bundle.id} carries no alternative-basis data")
    scheme = bundle.scheme
    A, B, is_float = _prepare_pair(A, B)
    M, K = A.shape
    N = B.shape[1]
    side = max(M, K, N)
    levels, bases = _resolve_plan(scheme, (side, side, side), plan)
    if levels == 0:
        return _classical_batched(A[None], B[None], is_float)[0]
    base = max(bases)
    padded = base * scheme.m**levels
    Ap = _pad_to(A, padded, padded, is_float)
    Bp = _pad_to(B, padded, padded, is_float)
    mats = (
        _alt_float_cache(alt)
        if is_float
        else {
            name: getattr(alt, name)
            for name in ("l_alt", "r_alt", "p_alt", "l_cob", "r_cob", "p_cob")
        }
    )
    Ta = _cob_forward(Ap, mats["l_cob"], alt.slp_cob_l, scheme.m, scheme.k, levels, is_float)
    Tb = _cob_forward(Bp, mats["r_cob"], alt.slp_cob_r, scheme.k, scheme.n, levels, is_float)
    W = _core_recurse(alt, Ta[None], Tb[None], levels, is_float, mats)
    C = _cob_inverse(
        W.reshape(-1, *W.shape[2:]), mats["p_cob"], alt.slp_cob_p,
        scheme.m, scheme.n, alt.t, levels, is_float,
    )
    return C[:M, :N]
