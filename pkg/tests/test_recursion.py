import numpy as np
import pytest

from fmmlab.dyadic import Dyadic
from fmmlab.recursion import (
    RecursionPlan,
    _resolve_plan,
    classical_multiply,
    multiply,
    multiply_alt,
)
from tests.conftest import exact_equal


def test_classical_examples():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(classical_multiply(A, np.eye(2)), A)
    E12 = np.zeros((2, 2)); E12[0, 1] = 1.0
    E21 = np.zeros((2, 2)); E21[1, 0] = 1.0
    E11 = np.zeros((2, 2)); E11[0, 0] = 1.0
    assert np.array_equal(classical_multiply(E12, E21), E11)
    assert np.array_equal(classical_multiply(A, np.zeros((2, 2))), np.zeros((2, 2)))


def test_classical_shape_error():
    with pytest.raises(ValueError):
        classical_multiply(np.eye(3), np.eye(4))


def test_plan_resolution(acc_bundle, strassen_bundle):
    levels, bases = _resolve_plan(acc_bundle.scheme, (32, 32, 32), None)
    assert levels == 1 and bases == (8, 8, 8)
    levels, bases = _resolve_plan(acc_bundle.scheme, (100, 100, 100), None)
    assert levels == 2 and bases == (7, 7, 7)  # zero-pads to 112 = 7 * 16
    levels, _ = _resolve_plan(strassen_bundle.scheme, (32, 32, 32), None)
    assert levels == 2  # threshold 8 for a <2,2,2> scheme
    levels, bases = _resolve_plan(acc_bundle.scheme, (8, 8, 8), None)
    assert levels == 0
    levels, _ = _resolve_plan(acc_bundle.scheme, (64, 64, 64), RecursionPlan(levels=2))
    assert levels == 2


def test_plan_validation():
    with pytest.raises(ValueError):
        RecursionPlan(levels=-1)
    with pytest.raises(ValueError):
        RecursionPlan(base_threshold=0)
    with pytest.raises(ValueError):
        RecursionPlan(padding="peel")


def test_identity_multiply_exact(acc_bundle):
    rng = np.random.default_rng(0)
    B = rng.integers(-99, 100, (64, 64))
    C = multiply(acc_bundle, np.eye(64, dtype=int), B, RecursionPlan(levels=1))
    assert exact_equal(C, B)


def test_identity_multiply_float(acc_bundle):
    rng = np.random.default_rng(0)
    B = rng.standard_normal((64, 64))
    C = multiply(acc_bundle, np.eye(64), B, RecursionPlan(levels=1))
    eps = np.finfo(np.float64).eps
    assert np.max(np.abs(C - B)) <= 32 * eps * np.max(np.abs(B))


def test_shape_mismatch(acc_bundle):
    with pytest.raises(ValueError):
        multiply(acc_bundle, np.eye(8), np.ones((9, 8)))


def test_exact_recursion_catalog_schemes(
    acc_bundle, strassen_bundle, winograd_bundle, classic_bundle
):
    rng = np.random.default_rng(21)
    for bundle, size in (
        (acc_bundle, 32),
        (strassen_bundle, 16),
        (winograd_bundle, 16),
        (classic_bundle, 16),
    ):
        A = rng.integers(-8, 9, (size, size))
        B = rng.integers(-8, 9, (size, size))
        want = classical_multiply(A, B)
        for levels in (1, 2):
            got = multiply(bundle, A, B, RecursionPlan(levels=levels))
            assert exact_equal(got, want), (bundle.id, levels)


def test_exact_rectangular_with_padding(acc_bundle):
    rng = np.random.default_rng(33)
    A = rng.integers(-5, 6, (10, 7))
    B = rng.integers(-5, 6, (7, 13))
    want = classical_multiply(A, B)
    got = multiply(acc_bundle, A, B, RecursionPlan(levels=1))
    assert got.shape == (10, 13)
    assert exact_equal(got, want)


def test_padding_neutrality_exact(acc_bundle):
    # Caller-side zero padding to any larger size is value-neutral; over
    # exact elements the equality is bit-for-bit.
    rng = np.random.default_rng(4)
    n = 24
    A = rng.integers(-9, 10, (n, n))
    B = rng.integers(-9, 10, (n, n))
    direct = multiply(acc_bundle, A, B, RecursionPlan(levels=1))
    padded_A = np.zeros((32, 32), dtype=int); padded_A[:n, :n] = A
    padded_B = np.zeros((32, 32), dtype=int); padded_B[:n, :n] = B
    padded = multiply(acc_bundle, padded_A, padded_B, RecursionPlan(levels=1))
    assert exact_equal(direct, padded[:n, :n])


def test_padding_neutrality_float_same_partition(acc_bundle):
    # Padding up to the size the recursion would pad to anyway reproduces
    # the identical float computation.
    rng = np.random.default_rng(4)
    n = 21
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, n))
    direct = multiply(acc_bundle, A, B, RecursionPlan(levels=1))  # pads to 24
    padded_A = np.zeros((24, 24)); padded_A[:n, :n] = A
    padded_B = np.zeros((24, 24)); padded_B[:n, :n] = B
    padded = multiply(acc_bundle, padded_A, padded_B, RecursionPlan(levels=1))
    assert np.array_equal(direct, padded[:n, :n])


def test_float_100x100_against_classical(acc_bundle):
    rng = np.random.default_rng(55)
    A = rng.standard_normal((100, 100))
    B = rng.standard_normal((100, 100))
    got = multiply(acc_bundle, A, B)
    want = classical_multiply(A, B)
    eps = np.finfo(np.float64).eps
    bound = 1e3 * eps * np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
    assert np.max(np.abs(got - want)) <= bound


def test_slp_and_matrix_drivers_identical_exact(acc_bundle):
    rng = np.random.default_rng(8)
    A = rng.integers(-8, 9, (32, 32))
    B = rng.integers(-8, 9, (32, 32))
    via_slp = multiply(acc_bundle, A, B, RecursionPlan(levels=2), driver="slp")
    via_matrix = multiply(acc_bundle, A, B, RecursionPlan(levels=2), driver="matrix")
    assert exact_equal(via_slp, via_matrix)


def test_driver_validation(acc_bundle, strassen_bundle):
    with pytest.raises(ValueError):
        multiply(acc_bundle, np.eye(8), np.eye(8), driver="quantum")
    with pytest.raises(ValueError):
        multiply(strassen_bundle, np.eye(8), np.eye(8), driver="slp")


def test_multiply_alt_requires_alt_data(acc_bundle):
    with pytest.raises(ValueError):
        multiply_alt(acc_bundle, np.eye(16), np.eye(16))


def test_multiply_alt_zero(alt_bundle):
    Z = np.zeros((16, 16))
    assert np.array_equal(multiply_alt(alt_bundle, Z, Z, RecursionPlan(levels=1)), Z)


def test_multiply_alt_matches_dense_exact(alt_bundle, acc_bundle):
    rng = np.random.default_rng(77)
    A = rng.integers(-8, 9, (16, 16))
    B = rng.integers(-8, 9, (16, 16))
    dense = multiply(acc_bundle, A, B, RecursionPlan(levels=1))
    alt = multiply_alt(alt_bundle, A, B, RecursionPlan(levels=1))
    assert exact_equal(dense, alt)
    dense = multiply(acc_bundle, A, B, RecursionPlan(levels=2))
    alt = multiply_alt(alt_bundle, A, B, RecursionPlan(levels=2))
    assert exact_equal(dense, alt)


def test_multiply_alt_float_error_near_dense(alt_bundle, acc_bundle):
    from fmmlab.bench import reference_product

    rng = np.random.default_rng(13)
    ratios = []
    for trial in range(3):
        A = rng.standard_normal((64, 64))
        B = rng.standard_normal((64, 64))
        ref = reference_product(A, B)
        dense_err = np.max(np.abs(multiply(acc_bundle, A, B) - ref))
        alt_err = np.max(np.abs(multiply_alt(alt_bundle, A, B) - ref))
        ratios.append(alt_err / dense_err)
    assert np.median(ratios) <= 4.0


def test_exact_dyadic_inputs(acc_bundle):
    rng = np.random.default_rng(3)
    A = np.array(
        [[Dyadic(int(v), -1) for v in row] for row in rng.integers(-8, 9, (16, 16))],
        dtype=object,
    )
    B = np.array(
        [[Dyadic(int(v), -2) for v in row] for row in rng.integers(-8, 9, (16, 16))],
        dtype=object,
    )
    got = multiply(acc_bundle, A, B, RecursionPlan(levels=1))
    want = classical_multiply(A, B)
    assert exact_equal(got, want)
