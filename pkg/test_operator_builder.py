#!/usr/bin/env python3
"""
算子数据与 Weyl 函数测试脚本
测试内容：
1. 四元组 (F, G_1, G_2, H) 的构造与束恒等式
2. 半直线与全直线 Weyl 函数、Herglotz 性质与渐近
3. 谱密度、Stieltjes 反演、Schur 补与 Herglotz 表示
"""

import os
import sys
import time

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.band_domain import new_band_structure
from src.dirichlet_data import default_seed, extract_dirichlet
from src.operator_builder import (
    EvaluationCache,
    OperatorData,
    WeylEvaluator,
    build_quadruple,
    density_schur_check,
    herglotz_representation_check,
    pencil_identity_report,
    spectral_density,
    stieltjes_check,
    verify_quadruple,
    weyl_asymptotics_check,
    weyl_full,
    weyl_half_line,
    weyl_herglotz_check,
)
from src.pencil_algebra import MatrixPencil
from src.utils.errors import AtSingularPoint

GAMMA = np.sqrt(0.375)


def build(edges, F, epsilons=None):
    bs = new_band_structure(edges)
    return build_quadruple(F, extract_dirichlet(F, bs, epsilons), bs)


@pytest.fixture(scope='module')
def scalar_od():
    return build([0, 1, 2], MatrixPencil.scalar([-1.5, 1.0]))


@pytest.fixture(scope='module')
def diagonal_od():
    bs = new_band_structure([0, 1, 2])
    return build([0, 1, 2], default_seed(bs, 2, [[1.25, 1.75]]))


@pytest.fixture(scope='module')
def nonabelian_od():
    A = np.diag([1.5, 2.5])
    B = 6 * np.eye(2) + np.array([[0.0, 1.0], [1.0, 0.0]])
    F = MatrixPencil(np.array([0.5 * (A @ B + B @ A), -(A + B), np.eye(2)]))
    return build([0, 1, 3, 4, 8], F)


def test_scalar_quadruple(scalar_od):
    """G_1 = G_2 = √0.375，H = z² - 1.5z - 0.25"""
    assert_allclose(scalar_od.G1.coeffs[:, 0, 0], [GAMMA], atol=1e-12)
    assert_allclose(scalar_od.G2.coeffs[:, 0, 0], [GAMMA], atol=1e-12)
    assert_allclose(scalar_od.H.coeffs[:, 0, 0], [-0.25, -1.5, 1.0], atol=1e-12)
    product = scalar_od.H @ scalar_od.F - scalar_od.G1 @ scalar_od.G1
    assert product.max_coefficient_gap(scalar_od.R_pencil()) < 1e-12


def test_verify_quadruple(scalar_od, diagonal_od, nonabelian_od):
    for od in (scalar_od, diagonal_od, nonabelian_od):
        report = verify_quadruple(od)
        assert report['passed'], report
        assert all(report['degrees'].values())
        assert set(report['identities']) == {
            'symmetry', 'intertwine_F', 'intertwine_H', 'determinant_FH', 'determinant_HF'}


def test_perturbed_quadruple_detected(scalar_od):
    od = scalar_od
    G1 = MatrixPencil(od.G1.coeffs + 1e-3)
    report = pencil_identity_report(od.F, G1, od.G2, od.H, od.bs, [1j], 1e-10)
    assert not report['passed']
    residual = report['identities']['determinant_HF']['coefficientwise']
    assert residual == pytest.approx(2 * GAMMA * 1e-3 + 1e-6, rel=1e-6)


def test_diagonal_decoupling(diagonal_od):
    """对角种子的四元组逐项等于两个标量实例"""
    bs = diagonal_od.bs
    for r, mu in enumerate((1.25, 1.75)):
        scalar = build([0, 1, 2], default_seed(bs, 1, [[mu]]))
        for name in ('F', 'G1', 'G2', 'H'):
            full = getattr(diagonal_od, name).coeffs
            assert_allclose(full[:, r, r], getattr(scalar, name).coeffs[:, 0, 0], atol=1e-10)
            assert_allclose(full[:, r, 1 - r], 0.0, atol=1e-10)


def test_half_line_values(scalar_od):
    ev = WeylEvaluator(scalar_od)
    assert weyl_half_line(ev, 3, 1, 'upper')[0, 0] == pytest.approx((1j * np.sqrt(6) - GAMMA) / 1.5)
    assert weyl_half_line(ev, 3, -1, 'upper')[0, 0] == pytest.approx((-1j * np.sqrt(6) - GAMMA) / 1.5)
    assert ev.half_line(1j, 1)[0, 0].imag > 0
    assert (-ev.half_line(1j, -1))[0, 0].imag > 0
    with pytest.raises(ValueError):
        ev.half_line(1j, 0)


def test_singular_points(scalar_od):
    ev = WeylEvaluator(scalar_od)
    with pytest.raises(AtSingularPoint):
        ev.half_line(1.5, 1)
    with pytest.raises(AtSingularPoint):
        ev.half_line(1.0, 1)
    with pytest.raises(AtSingularPoint):
        ev.half_line(0.5, 1)


def test_full_matrix(scalar_od, nonabelian_od):
    for od in (scalar_od, nonabelian_od):
        ev = WeylEvaluator(od)
        m = od.m
        for z in (1j, 2 + 0.5j, -3 + 2j):
            M = weyl_full(ev, z)
            assert M.shape == (2 * m, 2 * m)
            # (2,2) 块 = [M_- - M_+]^{-1}
            N = ev.half_line(z, -1) - ev.half_line(z, 1)
            assert_allclose(M[m:, m:], np.linalg.inv(N), atol=1e-10)
            # M(z̄)* = M(z)
            assert_allclose(ev.full(np.conj(z)).conj().T, M, atol=1e-10)


def test_herglotz(scalar_od, diagonal_od, nonabelian_od):
    for od in (scalar_od, diagonal_od, nonabelian_od):
        ev = WeylEvaluator(od)
        report = weyl_herglotz_check(ev, od.bs.herglotz_grid(5))
        assert report['passed'], report
        assert set(report['min_eigenvalue']) == {'plus', 'minus', 'full'}


def test_asymptotics(scalar_od, nonabelian_od):
    ev = WeylEvaluator(scalar_od)
    z = 1e6j
    root = np.sqrt(z)
    assert abs(ev.half_line(z, 1)[0, 0] - 1j * root) / abs(root) < 1e-2
    for od in (scalar_od, nonabelian_od):
        span = od.bs.span
        report = weyl_asymptotics_check(WeylEvaluator(od), [10 * span, 100 * span, 1000 * span])
        assert report['decreasing']
        assert report['errors'][-1] < 1e-2
        half = WeylEvaluator(od).asymptotics_check([100 * span, 1000 * span], np.pi / 4, half_aperture=True)
        assert half['decreasing']


def test_spectral_density(scalar_od):
    ev = WeylEvaluator(scalar_od)
    density = spectral_density(ev, 3.0)
    expected = np.array([[9 - 4.5 - 0.25, -GAMMA], [-GAMMA, 1.5]]) / (2 * np.pi * np.sqrt(6))
    assert not density.outside_bands
    assert_allclose(density.matrix, expected, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(density.matrix) > 0)

    gap = spectral_density(ev, 1.5)
    assert gap.outside_bands
    assert_allclose(gap.matrix, 0.0)

    low = spectral_density(ev, 0.5)
    assert np.sum(np.linalg.eigvalsh(low.matrix) > 1e-12) == 2


def test_density_rank_nonabelian(nonabelian_od):
    ev = WeylEvaluator(nonabelian_od)
    for lam in nonabelian_od.bs.band_midpoints():
        eigs = np.linalg.eigvalsh(ev.spectral_density(lam).matrix)
        assert np.all(eigs > 0)
        assert density_schur_check(ev, lam) < 1e-9


def test_stieltjes(scalar_od):
    """实对称数据的一阶项相消，ε 每缩小十倍误差缩小 10 到 100 倍"""
    ev = WeylEvaluator(scalar_od)
    coarse = stieltjes_check(ev, 0.5, 1e-4)
    fine = stieltjes_check(ev, 0.5, 1e-5)
    assert 8 < coarse / fine < 150
    assert stieltjes_check(ev, 3.0, 1e-6) <= 1e-4 * scalar_od.coefficient_scale()
    assert stieltjes_check(ev, 1.2, 1e-8) < 1e-6
    with pytest.raises(ValueError):
        ev.stieltjes_check(0.5, 0.0)


def test_schur_complement(scalar_od, diagonal_od):
    for od in (scalar_od, diagonal_od):
        ev = WeylEvaluator(od)
        assert density_schur_check(ev, 0.5) < 1e-9
        assert density_schur_check(ev, 3.0) < 1e-9
        assert density_schur_check(ev, 1.5) == 0.0


@pytest.mark.parametrize('side', [1, -1])
def test_herglotz_representation(scalar_od, nonabelian_od, side):
    """±M_± = Γ_0 + 积分项 - Σ (1 ± ε_k)Γ_k/(z - μ_k)"""
    for od in (scalar_od, nonabelian_od):
        ev = WeylEvaluator(od)
        assert herglotz_representation_check(ev, 1j, side) < 1e-6
        assert ev.representation_check(2 + 3j, side) < 1e-6


def test_representation_with_negative_epsilon():
    od = build([0, 1, 2], MatrixPencil.scalar([-1.5, 1.0]), [-1])
    ev = WeylEvaluator(od)
    for side in (1, -1):
        assert ev.representation_check(1j, side) < 1e-6


def test_evaluation_cache():
    cache = EvaluationCache(max_size=2)
    a, b, c = (cache.get_cache_key(z, None) for z in (1j, 2j, 3j))
    cache.set(a, {'v': 1})
    time.sleep(0.002)
    cache.set(b, {'v': 2})
    time.sleep(0.002)
    assert cache.get(a) == {'v': 1}
    time.sleep(0.002)
    cache.set(c, {'v': 3})
    assert cache.get(b) is None
    assert cache.get(a) == {'v': 1} and cache.get(c) == {'v': 3}
    cache.clear()
    assert cache.get(a) is None


def test_operator_data_helpers(scalar_od):
    assert scalar_od.n == 1 and scalar_od.m == 1
    assert scalar_od.scale(10j) == pytest.approx(scalar_od.coefficient_scale() * 100)
    assert isinstance(scalar_od, OperatorData)


if __name__ == "__main__":
    pytest.main([__file__])
