#!/usr/bin/env python3
"""
矩阵束代数测试脚本
测试内容：
1. 求值与右代入
2. 行列式根、根区与强双曲性
3. 谱根、右除法、首一分解与块 Vandermonde 矩阵
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.pencil_algebra import (
    MatrixPencil,
    check_strong_hyperbolicity,
    det_roots,
    divide_right,
    elementary_block_sums,
    eval_pencil,
    eval_pencil_at_matrix,
    factorize,
    is_selfadjoint,
    root_zones,
    spectral_root,
    vandermonde,
)
from src.utils.errors import (
    DimensionMismatch,
    IndefiniteLeading,
    NonSelfAdjoint,
    NonzeroRemainder,
    SingularLeadingCoefficient,
    WrongEigenCountInZone,
    WrongSeparatorCount,
)

ROOT_LOW = (1.5 - np.sqrt(3.25)) / 2
ROOT_HIGH = (1.5 + np.sqrt(3.25)) / 2


@pytest.fixture
def quadratic():
    """H(z) = z² - 1.5z - 0.25"""
    return MatrixPencil.scalar([-0.25, -1.5, 1.0])


def random_hermitian(rng, m, low, high):
    """谱位于 [low, high] 的随机 Hermite 矩阵"""
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    Q, _ = np.linalg.qr(A)
    return Q @ np.diag(rng.uniform(low, high, m)) @ Q.conj().T


def test_evaluation(quadratic):
    P = MatrixPencil.linear(np.diag([1.0, 2.0]))
    assert_allclose(eval_pencil(P, 1), np.diag([0.0, -1.0]))
    assert abs(eval_pencil(quadratic, ROOT_HIGH)[0, 0]) < 1e-9
    assert_allclose(eval_pencil(quadratic, 0), quadratic.coeffs[0])
    assert_allclose(quadratic.descending()[0], [[1.0]])


def test_at_matrix(quadratic):
    Z0 = np.array([[1.0, 2.0], [0.5, -1.0]])
    assert_allclose(eval_pencil_at_matrix(MatrixPencil.linear(Z0), Z0), np.zeros((2, 2)))
    assert abs(eval_pencil_at_matrix(quadratic, np.array([[ROOT_HIGH]]))[0, 0]) < 1e-9
    square = MatrixPencil.scalar([0, 0, 1], m=2)
    assert_allclose(square.at_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])), np.zeros((2, 2)))
    with pytest.raises(DimensionMismatch):
        square.at_matrix(np.eye(3))


def test_arithmetic():
    A = MatrixPencil.linear(np.diag([1.0, 2.0]))
    B = MatrixPencil.linear(np.array([[0.0, 1.0], [1.0, 0.0]]))
    product = A @ B
    z = 0.7 + 0.3j
    assert_allclose(product(z), A(z) @ B(z))
    assert_allclose((A + B)(z), A(z) + B(z))
    assert_allclose((A - B)(z), A(z) - B(z))
    assert_allclose(product.derivative()(z), A(z) + B(z), atol=1e-14)
    with pytest.raises(DimensionMismatch):
        A @ MatrixPencil.identity(3)


def test_is_selfadjoint():
    P = MatrixPencil(np.array([[[0, 1j], [-1j, 0]], np.eye(2)]))
    assert is_selfadjoint(P)
    assert not is_selfadjoint(MatrixPencil(np.array([[0, 1], [0, 0]])))
    assert is_selfadjoint(MatrixPencil.zero(2))
    with pytest.raises(ValueError):
        is_selfadjoint(P, -1.0)


def test_det_roots(quadratic):
    roots = det_roots(MatrixPencil.linear(np.diag([1.0, 2.0])))
    assert [(round(r.real, 12), k) for r, k in roots] == [(1.0, 1), (2.0, 1)]
    assert det_roots(MatrixPencil.scalar([-1.5, 1.0]))[0][0] == pytest.approx(1.5)
    roots = det_roots(quadratic)
    assert roots[0][0].real == pytest.approx(ROOT_LOW, abs=1e-9)
    assert roots[1][0].real == pytest.approx(ROOT_HIGH, abs=1e-9)
    double = det_roots(MatrixPencil.scalar([-1.5, 1.0], m=2))
    assert len(double) == 1 and double[0][1] == 2
    with pytest.raises(SingularLeadingCoefficient):
        det_roots(MatrixPencil(np.array([np.eye(2), np.zeros((2, 2))])))


def test_det_roots_of_product():
    rng = np.random.default_rng(3)
    factors = [random_hermitian(rng, 3, -2, -1), random_hermitian(rng, 3, 4, 5)]
    P = MatrixPencil.from_linear_factors(factors)
    expected = np.sort(np.concatenate([np.linalg.eigvalsh(Y) for Y in factors]))
    found = np.sort([r.real for r, k in det_roots(P) for _ in range(k)])
    assert_allclose(found, expected, atol=1e-8)


def test_root_zones():
    report = root_zones(MatrixPencil.scalar([-1.5, 1.0]))
    assert report.zones[0] == pytest.approx((1.5, 1.5))
    assert report.hyperbolicity == 'strongly'

    report = root_zones(MatrixPencil.linear(np.diag([1.2, 1.8])), probes=8, rng_seed=1)
    low, high = report.zones[0]
    assert low == pytest.approx(1.2, abs=1e-10) and high == pytest.approx(1.8, abs=1e-10)

    P = MatrixPencil.linear(np.diag([-1.0, -2.0])) @ MatrixPencil.linear(np.diag([5.0, 6.0]))
    report = root_zones(P, probes=8, rng_seed=0)
    assert report.contains(0, (-2, -1), 1e-9)
    assert report.contains(1, (5, 6), 1e-9)
    assert report.hyperbolicity == 'strongly'


def test_root_zones_deterministic():
    rng = np.random.default_rng(5)
    A, B = random_hermitian(rng, 2, 0, 1), random_hermitian(rng, 2, 3, 4)
    P = MatrixPencil(np.array([0.5 * (A @ B + B @ A), -(A + B), np.eye(2)]))
    assert is_selfadjoint(P, 1e-12)
    assert root_zones(P, 8, 11).zones == root_zones(P, 8, 11).zones


def test_root_zones_nonreal_roots():
    """z² + 1 的采样根不是实数"""
    assert root_zones(MatrixPencil.scalar([1.0, 0.0, 1.0], m=2), probes=4).hyperbolicity == 'not-weakly'
    P = MatrixPencil.scalar([2.0, -3.0, 1.0], m=2)
    assert root_zones(P, probes=4).hyperbolicity == 'strongly'


def test_root_zones_errors():
    with pytest.raises(NonSelfAdjoint):
        root_zones(MatrixPencil(np.array([[[0, 1], [0, 0]], np.eye(2)])))
    with pytest.raises(IndefiniteLeading):
        root_zones(MatrixPencil(np.array([np.zeros((2, 2)), -np.eye(2)])))


def test_strong_hyperbolicity(quadratic):
    passed, certificate = check_strong_hyperbolicity(MatrixPencil.scalar([-1.5, 1.0]), [])
    assert passed and certificate['separators'] == []
    passed, certificate = check_strong_hyperbolicity(quadratic, [0.5])
    assert passed
    assert certificate['min_eigenvalues'][0] == pytest.approx(0.75)
    passed, _ = check_strong_hyperbolicity(MatrixPencil.scalar([0, 0, 1], m=2), [0.0])
    assert not passed
    with pytest.raises(WrongSeparatorCount):
        check_strong_hyperbolicity(quadratic, [])
    with pytest.raises(WrongSeparatorCount):
        check_strong_hyperbolicity(MatrixPencil.scalar([1, 0, 0, 1]), [1.0, 0.0])


def test_spectral_root(quadratic):
    Z = spectral_root(quadratic, (1, 2))
    assert Z[0, 0].real == pytest.approx(ROOT_HIGH, abs=1e-9)

    rng = np.random.default_rng(2)
    A = random_hermitian(rng, 3, 0, 1)
    assert_allclose(spectral_root(MatrixPencil.linear(A), (0, 1)), A, atol=1e-10)

    P = MatrixPencil.linear(np.diag([5.0, 6.0])) @ MatrixPencil.linear(np.diag([-1.0, -2.0]))
    assert_allclose(spectral_root(P, (5, 6)), np.diag([5.0, 6.0]), atol=1e-9)
    with pytest.raises(WrongEigenCountInZone):
        spectral_root(quadratic, (3, 4))


def test_divide_right(quadratic):
    Z = np.array([[ROOT_HIGH]])
    B = divide_right(quadratic, Z)
    assert_allclose(B.coeffs[:, 0, 0], [-ROOT_LOW, 1.0], atol=1e-9)

    Z0 = np.array([[1.0, 2.0], [2.0, -1.0]])
    assert_allclose(divide_right(MatrixPencil.linear(Z0), Z0).coeffs, MatrixPencil.identity(2).coeffs)

    cubic = MatrixPencil.scalar([0.375, 2.0, -3.0, 1.0])
    assert_allclose(divide_right(cubic, np.array([[1.5]])).coeffs[:, 0, 0], [-0.25, -1.5, 1.0], atol=1e-12)
    with pytest.raises(NonzeroRemainder):
        divide_right(quadratic, np.array([[0.0]]))


def test_factorize(quadratic):
    Y1, Y2 = factorize(quadratic)
    assert Y1[0, 0].real == pytest.approx(ROOT_LOW, abs=1e-9)
    assert Y2[0, 0].real == pytest.approx(ROOT_HIGH, abs=1e-9)

    A = np.array([[1.0, 0.5], [0.5, 2.0]])
    assert_allclose(factorize(MatrixPencil.linear(A))[0], A, atol=1e-10)


@pytest.mark.parametrize('seed', range(4))
def test_factorize_round_trip(seed):
    """随机强双曲束分解后重新相乘"""
    rng = np.random.default_rng(seed)
    m = 3
    factors = [random_hermitian(rng, m, 3 * j, 3 * j + 1) for j in range(3)]
    P = MatrixPencil.from_linear_factors(factors)
    roots = factorize(P)
    rebuilt = MatrixPencil.from_linear_factors(roots)
    assert P.max_coefficient_gap(rebuilt) <= 1e-9 * P.norm()
    for j, Y in enumerate(roots):
        eigs = np.linalg.eigvals(Y)
        assert np.all(np.abs(eigs.imag) < 1e-9)
        assert np.all((eigs.real > 3 * j - 1e-9) & (eigs.real < 3 * j + 1 + 1e-9))


def test_vandermonde():
    V = vandermonde([np.array([[1.0]]), np.array([[2.0]])])
    assert_allclose(V, [[1, 1], [1, 2]])
    assert np.linalg.det(V) == pytest.approx(1.0)
    assert abs(np.linalg.det(vandermonde([np.array([[1.0]]), np.array([[1.0]])]))) < 1e-14
    V = vandermonde([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])])
    assert V.shape == (4, 4)
    assert abs(np.linalg.det(V)) > 1e-6


def test_vandermonde_disjoint_spectra():
    rng = np.random.default_rng(9)
    for _ in range(5):
        a, b = rng.uniform(0, 1, 2), rng.uniform(2, 3, 2)
        assert np.linalg.cond(vandermonde([np.diag(a), np.diag(b)])) < 1e8
        shared = np.array([a[0], b[0]])
        assert np.linalg.cond(vandermonde([np.diag(a), np.diag(shared)])) > 1e12


def test_elementary_block_sums():
    Y = [np.array([[1.0, 1.0], [0.0, 2.0]]), np.array([[3.0, 0.0], [1.0, 4.0]])]
    assert_allclose(elementary_block_sums(Y, 0), np.eye(2))
    assert_allclose(elementary_block_sums(Y, 1), Y[0] + Y[1])
    assert_allclose(elementary_block_sums(Y, 2), Y[1] @ Y[0])
    assert_allclose(elementary_block_sums(Y, 2, reverse=True), Y[0] @ Y[1])


if __name__ == "__main__":
    pytest.main([__file__])
