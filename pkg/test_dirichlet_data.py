#!/usr/bin/env python3
"""
Dirichlet 数据测试脚本
测试内容：
1. 对角种子生成与 Herglotz 检验
2. μ_k、Γ_k、Γ_0 的提取与校验
3. 非对易种子的多重数据
"""

import os
import sys
import warnings

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.band_domain import new_band_structure
from src.dirichlet_data import default_seed, extract_dirichlet, verify_herglotz_seed
from src.pencil_algebra import MatrixPencil
from src.utils.errors import DirichletError, PlacementOutsideGap, RootAtBandEdge

GAMMA = np.sqrt(0.375)


def nonabelian_seed():
    """F(z) = z²I - z(A+B) + (AB+BA)/2，A = diag(1.5, 2.5)，B = 6I + σ_x"""
    A = np.diag([1.5, 2.5])
    B = 6 * np.eye(2) + np.array([[0.0, 1.0], [1.0, 0.0]])
    return MatrixPencil(np.array([0.5 * (A @ B + B @ A), -(A + B), np.eye(2)]))


@pytest.fixture
def scalar_bs():
    return new_band_structure([0, 1, 2])


def test_default_seed(scalar_bs):
    F = default_seed(scalar_bs, 1, [[1.5]])
    assert_allclose(F.coeffs[:, 0, 0], [-1.5, 1.0])

    F = default_seed(scalar_bs, 2, [[1.25, 1.75]])
    assert_allclose(F(0.0), np.diag([-1.25, -1.75]))
    assert F.is_monic()

    with pytest.raises(PlacementOutsideGap):
        default_seed(scalar_bs, 1, [[2.5]])
    with pytest.raises(PlacementOutsideGap):
        default_seed(scalar_bs, 2, [[1.5]])


def test_verify_herglotz_seed(scalar_bs):
    report = verify_herglotz_seed(MatrixPencil.scalar([-1.5, 1.0]), scalar_bs, samples=[1j])
    assert report['passed']
    assert report['worst_eigenvalue'] > 0

    report = verify_herglotz_seed(MatrixPencil.scalar([-0.5, 1.0]), scalar_bs)
    assert not report['passed']
    assert not report['roots_in_gaps']

    report = verify_herglotz_seed(default_seed(scalar_bs, 2, [[1.25, 1.75]]), scalar_bs)
    assert report['passed'] and report['strongly_hyperbolic']


def test_verify_herglotz_seed_shape_errors(scalar_bs):
    report = verify_herglotz_seed(MatrixPencil.scalar([2.0, -3.0, 1.0]), scalar_bs)
    assert not report['passed'] and 'reason' in report
    report = verify_herglotz_seed(MatrixPencil(np.array([[[0, 1], [0, 0]], np.eye(2)])), scalar_bs)
    assert not report['passed']


def test_extract_scalar(scalar_bs):
    ds = extract_dirichlet(MatrixPencil.scalar([-1.5, 1.0]), scalar_bs)
    assert ds.N == 1
    datum = ds.data[0]
    assert datum.mu == pytest.approx(1.5)
    assert datum.gamma[0, 0].real == pytest.approx(GAMMA, abs=1e-12)
    assert datum.rank == 1 and datum.epsilon == 1
    assert datum.residue_residual < 1e-12
    assert all(ds.validate(scalar_bs).values())


def test_extract_diagonal(scalar_bs):
    ds = extract_dirichlet(default_seed(scalar_bs, 2, [[1.25, 1.75]]), scalar_bs)
    assert [d.mu for d in ds.data] == pytest.approx([1.25, 1.75])
    assert_allclose(ds.data[0].gamma, np.diag([np.sqrt(0.234375), 0.0]), atol=1e-12)
    assert_allclose(ds.data[1].gamma, np.diag([0.0, np.sqrt(0.328125)]), atol=1e-12)
    flags = ds.validate(scalar_bs)
    assert flags['rank_bound'] and flags['gap_multiplicity']


def test_gamma0_reconstruction(scalar_bs):
    """i R^{1/2} F^{-1} + Σ Γ_k/(z - μ_k) 为 Herglotz 函数，Γ_0 为其在 z=i 处的实部"""
    F = default_seed(scalar_bs, 2, [[1.25, 1.75]])
    ds = extract_dirichlet(F, scalar_bs)
    assert_allclose(ds.gamma0, ds.gamma0.conj().T, atol=1e-14)
    for z in scalar_bs.herglotz_grid(5):
        value = 1j * scalar_bs.sqrt_R(z) * np.linalg.inv(F(z)) + ds.residue_sum(z, weighted=False)
        imag = (value - value.conj().T) / 2j
        assert np.linalg.eigvalsh(imag)[0] >= -1e-10 * max(1.0, np.abs(value).max())


def test_epsilons(scalar_bs):
    F = MatrixPencil.scalar([-1.5, 1.0])
    ds = extract_dirichlet(F, scalar_bs, [-1])
    assert ds.data[0].epsilon == -1
    assert ds.half_line_atoms(1)[0][1][0, 0] == pytest.approx(0.0)
    assert ds.half_line_atoms(-1)[0][1][0, 0].real == pytest.approx(2 * GAMMA)
    with pytest.raises(DirichletError):
        extract_dirichlet(F, scalar_bs, [1, 1])
    with pytest.raises(DirichletError):
        extract_dirichlet(F, scalar_bs, [0])


def test_root_outside_gap(scalar_bs):
    with pytest.raises(PlacementOutsideGap):
        extract_dirichlet(MatrixPencil.scalar([-0.5, 1.0]), scalar_bs)


def test_root_at_band_edge(scalar_bs):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        ds = extract_dirichlet(MatrixPencil.scalar([-1.0, 1.0]), scalar_bs)
    assert any(issubclass(w.category, RootAtBandEdge) for w in caught)
    assert_allclose(ds.data[0].gamma, [[0.0]])


def test_nonabelian_seed():
    bs = new_band_structure([0, 1, 3, 4, 8])
    F = nonabelian_seed()
    report = verify_herglotz_seed(F, bs)
    assert report['passed']
    assert report['strongly_hyperbolic']

    ds = extract_dirichlet(F, bs)
    assert sum(d.multiplicity for d in ds.data) == 4
    assert all(d.residue_residual < 1e-8 for d in ds.data)
    flags = ds.validate(bs)
    assert all(flags.values())
    assert ds.hermitian_defect < 1e-10


if __name__ == "__main__":
    pytest.main([__file__])
