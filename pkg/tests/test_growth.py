import math
from fractions import Fraction

import numpy as np
import pytest

from fmmlab.growth import (
    INF,
    NORM_PAIRS,
    alt_complexity_constant,
    complexity_constant,
    dual_exponent,
    error_exponent,
    gamma2,
    growth_factor,
    growth_report,
)
from fmmlab.lrp import LrpScheme, as_dyadic_matrix, validate_scheme


def test_dual_exponent():
    assert dual_exponent(INF) == 1
    assert dual_exponent(2) == 2
    assert dual_exponent(1) == INF
    with pytest.raises(ValueError):
        dual_exponent(3)


def test_classic_growth_is_two(classic_bundle):
    # Every output of the classic scheme sums two unit-coefficient products.
    assert growth_factor(classic_bundle.scheme, INF, INF) == pytest.approx(2.0)
    assert gamma2(classic_bundle.scheme) == pytest.approx(8.0)


def test_trivial_scheme_gamma2_is_one():
    one = as_dyadic_matrix([[1]])
    scheme = LrpScheme(id="trivial-1x1x1", m=1, k=1, n=1, r=1, L=one, R=one, P=one)
    assert gamma2(scheme) == pytest.approx(1.0)


TABLE_ROWS = {
    "acc-4x4x4": (224.0, 27.314, 896.0, 109.26),
    "strassen": (12.0, 6.829, 17.889, 10.453),
    "winograd": (18.0, 8.0, 31.241, 14.0),
}


@pytest.mark.parametrize("scheme_id", sorted(TABLE_ROWS))
def test_growth_factor_table(scheme_id):
    from fmmlab.catalog import builtin

    scheme = builtin(scheme_id).scheme
    expected = TABLE_ROWS[scheme_id]
    for (p, q), want in zip(NORM_PAIRS, expected):
        tolerance = 0.5 if (scheme_id, p, q) == ("acc-4x4x4", 2, INF) else 0.01
        assert abs(growth_factor(scheme, p, q) - want) <= tolerance


def test_acc_gamma2_closed_form(acc_bundle):
    assert abs(gamma2(acc_bundle.scheme) - 64 * (1 + math.sqrt(2))) <= 1e-3


def test_error_exponent_examples():
    assert abs(error_exponent(27.314, 4) - 2.386) <= 1e-3
    assert abs(error_exponent(12, 2) - 3.585) <= 1e-3
    assert error_exponent(5, 5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        error_exponent(0.5, 4)
    with pytest.raises(ValueError):
        error_exponent(2, 1)


def test_complexity_constants_exact():
    leading, exponent = complexity_constant(355, 48, 4, 4)
    assert leading == Fraction(387, 32)
    assert float(leading) == 12.09375
    assert exponent == pytest.approx(2.792481250360578, abs=1e-12)
    leading, exponent = complexity_constant(4, 8, 2, 2)
    assert leading == Fraction(2)
    assert exponent == pytest.approx(3.0)
    with pytest.raises(ValueError):
        complexity_constant(10, 4, 2, 2)


def test_alt_complexity_constant():
    leading, exponent = alt_complexity_constant(7, 48, 47, 4)
    assert leading == Fraction(8)
    assert exponent == pytest.approx(2.792481250360578, abs=1e-12)
    with pytest.raises(ValueError):
        alt_complexity_constant(7, 47, 47)


def test_report_invariants():
    from fmmlab.catalog import BUILTIN_IDS, builtin

    for bundle_id in BUILTIN_IDS:
        scheme = builtin(bundle_id).scheme
        report = growth_report(scheme)
        assert report.gamma2 >= report.gamma[(2, 2)] - 1e-9
        assert all(g >= 1.0 for g in report.gamma.values())
        for pq, gamma_value, expo in report.rows():
            assert expo == pytest.approx(math.log(gamma_value, scheme.k))


def test_invariance_under_product_relabeling(acc_bundle):
    scheme = acc_bundle.scheme
    rng = np.random.default_rng(42)
    perm = rng.permutation(scheme.r)
    shuffled = LrpScheme(
        id="acc-shuffled", m=4, k=4, n=4, r=48,
        L=scheme.L[perm], R=scheme.R[perm], P=scheme.P[:, perm],
    )
    for p, q in NORM_PAIRS:
        assert growth_factor(shuffled, p, q) == pytest.approx(
            growth_factor(scheme, p, q), rel=1e-12
        )


def test_row_rescaling_recomputation_consistency(acc_bundle):
    # Scale one L row by 2 and compensate in the matching P column; the
    # rescaled scheme must stay valid and its growth factors must recompute
    # to the same values every time (no invariance asserted).
    scheme = acc_bundle.scheme
    L = scheme.L.copy()
    P = scheme.P.copy()
    for j in range(L.shape[1]):
        L[0, j] = L[0, j].shift(1)
    for i in range(P.shape[0]):
        P[i, 0] = P[i, 0].shift(-1)
    rescaled = LrpScheme(id="acc-rescaled", m=4, k=4, n=4, r=48, L=L, R=scheme.R, P=P)
    assert validate_scheme(rescaled).valid
    first = {pq: growth_factor(rescaled, *pq) for pq in NORM_PAIRS}
    second = {pq: growth_factor(rescaled, *pq) for pq in NORM_PAIRS}
    assert first == second
