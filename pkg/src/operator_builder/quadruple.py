"""
由 (F, Dirichlet 数据) 构造 G_1, G_2, H 并校验束恒等式
"""

from dataclasses import dataclass
from math import comb
from typing import Any, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from config.settings import NUMERIC_CONFIG, TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure
from src.dirichlet_data.dirichlet import DirichletSet
from src.pencil_algebra.matrix_pencil import MatrixPencil
from src.utils.errors import ResidueNotCancelled
from src.utils.helpers import max_abs


@dataclass(frozen=True, eq=False)
class OperatorData:
    """x_0 处的四元组 (F, G_1, G_2, H)"""

    F: MatrixPencil
    G1: MatrixPencil
    G2: MatrixPencil
    H: MatrixPencil
    ds: DirichletSet
    bs: BandStructure

    @property
    def n(self) -> int:
        return self.bs.n

    @property
    def m(self) -> int:
        return self.F.m

    def coefficient_scale(self) -> float:
        return max(p.norm() for p in (self.F, self.G1, self.G2, self.H))

    def scale(self, z: complex = 0.0) -> float:
        """容差尺度：系数范数最大值 × max(1, |z|^{n+1})"""
        return self.coefficient_scale() * max(1.0, abs(z) ** (self.n + 1))

    def R_pencil(self) -> MatrixPencil:
        return MatrixPencil.scalar(np.poly(self.bs.edges)[::-1], self.m)


def _interpolation_nodes(bs: BandStructure, mus: Sequence[float], needed: int, extra: int):
    """[E_0 - span, E_2n + span] 上的 Chebyshev 节点，去掉 μ_k 邻域"""
    low, high = bs.edges[0] - bs.span, bs.edges[-1] + bs.span
    count = 2 * (needed + extra) + 4 * len(mus) + 8
    k = np.arange(count)
    nodes = 0.5 * (low + high) + 0.5 * (high - low) * np.cos((2 * k + 1) * np.pi / (2 * count))
    exclusion = NUMERIC_CONFIG['node_exclusion'] * bs.span
    nodes = np.sort([t for t in nodes if all(abs(t - mu) > exclusion for mu in mus)])
    fit_index = np.unique(np.round(np.linspace(0, len(nodes) - 1, needed)).astype(int))
    if len(fit_index) < needed:
        raise ResidueNotCancelled("可用插值节点不足")
    rest = np.setdiff1d(np.arange(len(nodes)), fit_index)
    check_index = rest[np.unique(np.round(np.linspace(0, len(rest) - 1, extra)).astype(int))]
    return nodes[fit_index], nodes[check_index], 0.5 * (low + high), 0.5 * (high - low)


def _monomial_transform(degree: int, center: float, half_width: float) -> np.ndarray:
    """把 ((z - c)/h)^k 的系数转换为 z^j 的系数"""
    T = np.zeros((degree + 1, degree + 1))
    for k in range(degree + 1):
        for j in range(k + 1):
            T[j, k] = comb(k, j) * (-center) ** (k - j) / half_width ** k
    return T


def _fit_pencil(nodes: np.ndarray, values: np.ndarray, center: float, half_width: float) -> MatrixPencil:
    """过 len(nodes) 个节点的插值多项式（次数 len(nodes)-1）"""
    degree = len(nodes) - 1
    m = values.shape[1]
    s = (nodes - center) / half_width
    V = np.vander(s, degree + 1, increasing=True)
    coeffs_s = np.linalg.solve(V, values.reshape(len(nodes), m * m))
    coeffs_z = _monomial_transform(degree, center, half_width) @ coeffs_s
    return MatrixPencil(coeffs_z.reshape(degree + 1, m, m))


def build_quadruple(F: MatrixPencil, ds: DirichletSet, bs: BandStructure) -> OperatorData:
    """
    构造四元组

    G_1 = S F, G_2 = F S, H = R F^{-1} + S F S，其中 S(z) = Σ ε_k Γ_k/(z - μ_k)；
    三者通过 n+2 个节点插值化为多项式系数，并在其余节点上校验。

    Returns:
        OperatorData
    """
    n, m = bs.n, F.m
    mus = [d.mu for d in ds.data]
    fit_nodes, check_nodes, center, half_width = _interpolation_nodes(
        bs, mus, n + 2, NUMERIC_CONFIG['extra_check_nodes'])

    def evaluate(t: float):
        S = ds.residue_sum(t, weighted=True)
        Ft = F(t)
        return S @ Ft, Ft @ S, bs.R(t) * np.linalg.inv(Ft) + S @ Ft @ S

    fit_values = [evaluate(t) for t in fit_nodes]
    pencils = [
        _fit_pencil(fit_nodes, np.array([v[i] for v in fit_values]), center, half_width)
        for i in range(3)
    ]
    G1_full, G2_full, H_full = pencils

    # 其余节点上的一致性（留数未抵消时插值多项式与有理函数不符）
    worst = 0.0
    for t in check_nodes:
        for fitted, exact in zip(pencils, evaluate(t)):
            worst = max(worst, max_abs(fitted(t) - exact) / max(1.0, max_abs(exact)))
    value_scale = max(1.0, max(max_abs(v) for vals in fit_values for v in vals))
    g_excess = max(max_abs(G1_full.coeffs[n:]), max_abs(G2_full.coeffs[n:]))
    lead_gap = max_abs(H_full.coeffs[n + 1] - np.eye(m))
    fit_tol = 1e-6
    if worst > fit_tol or g_excess > fit_tol * value_scale or lead_gap > fit_tol:
        raise ResidueNotCancelled(
            f"插值不一致: 校验残差 {worst:.3e}, G 高次系数 {g_excess:.3e}, H 首项偏差 {lead_gap:.3e}"
        )

    G1 = MatrixPencil(G1_full.coeffs[:n])
    G2 = MatrixPencil(G2_full.coeffs[:n])
    h_coeffs = np.array(H_full.coeffs)
    h_coeffs[n + 1] = np.eye(m)
    h_defect = max_abs(h_coeffs - np.conj(np.swapaxes(h_coeffs, -1, -2)))
    if h_defect > NUMERIC_CONFIG['hermitian_tol'] * value_scale:
        logger.warning(f"H 系数 Hermite 偏差: {h_defect:.3e}")
    H = MatrixPencil(h_coeffs).hermitized()

    od = OperatorData(F=F, G1=G1, G2=G2, H=H, ds=ds, bs=bs)
    logger.info(f"构造四元组完成: n={n}, m={m}, 插值校验残差 {worst:.3e}")
    return od


def pencil_identity_report(F: MatrixPencil, G1: MatrixPencil, G2: MatrixPencil, H: MatrixPencil,
                           bs: BandStructure, z_samples: Sequence[complex],
                           tol: float) -> Dict[str, Any]:
    """
    校验 G_2(z̄)* = G_1(z)、F G_1 = G_2 F、H G_2 = G_1 H、F H - G_2² = R I、H F - G_1² = R I

    Returns:
        报告：每个恒等式的逐系数残差（绝对与相对）、采样点残差及最差位置，次数检查
    """
    n, m = bs.n, F.m
    R = MatrixPencil.scalar(np.poly(bs.edges)[::-1], m)
    eye = np.eye(m)
    cscale = max(1.0, *(p.norm() for p in (F, G1, G2, H)))

    def point_scale(z: complex) -> float:
        return cscale * max(1.0, abs(z) ** (n + 1))

    identities = {
        'symmetry': (G2.adjoint() - G1, lambda z: G2(np.conj(z)).conj().T - G1(z), 1),
        'intertwine_F': (F @ G1 - G2 @ F, lambda z: F(z) @ G1(z) - G2(z) @ F(z), 2),
        'intertwine_H': (H @ G2 - G1 @ H, lambda z: H(z) @ G2(z) - G1(z) @ H(z), 2),
        'determinant_FH': (F @ H - G2 @ G2 - R, lambda z: F(z) @ H(z) - G2(z) @ G2(z) - bs.R(z) * eye, 2),
        'determinant_HF': (H @ F - G1 @ G1 - R, lambda z: H(z) @ F(z) - G1(z) @ G1(z) - bs.R(z) * eye, 2),
    }

    report: Dict[str, Any] = {'identities': {}}
    worst_relative = 0.0
    for name, (difference, pointwise, power) in identities.items():
        absolute = max_abs(difference.coeffs)
        relative = absolute / cscale ** power
        sample_worst, worst_z = 0.0, None
        for z in z_samples:
            value = max_abs(pointwise(z)) / point_scale(z) ** power
            if value >= sample_worst:
                sample_worst, worst_z = value, complex(z)
        report['identities'][name] = {
            'coefficientwise': absolute,
            'relative': relative,
            'samples': sample_worst,
            'worst_z': worst_z,
        }
        worst_relative = max(worst_relative, relative, sample_worst)

    report['degrees'] = {
        'F_monic_degree_n': F.degree == n and F.is_monic(1e-12),
        'H_monic_degree_n_plus_1': H.degree == n + 1 and H.is_monic(1e-12),
        'G_degree_at_most_n_minus_1': G1.degree <= n - 1 and G2.degree <= n - 1,
    }
    report['max_relative'] = worst_relative
    report['passed'] = bool(worst_relative <= tol and all(report['degrees'].values()))
    return report


def verify_quadruple(od: OperatorData, z_samples: Optional[Sequence[complex]] = None,
                     tol: Optional[float] = None) -> Dict[str, Any]:
    """x_0 处四元组的多项式恒等式报告"""
    tol = tol if tol is not None else TOLERANCE_CONFIG['quadruple']
    if z_samples is None:
        z_samples = od.bs.herglotz_grid(NUMERIC_CONFIG['herglotz_grid_size'], NUMERIC_CONFIG['herglotz_radii'])
    report = pencil_identity_report(od.F, od.G1, od.G2, od.H, od.bs, z_samples, tol)
    logger.info(f"四元组恒等式最大相对残差 {report['max_relative']:.3e}")
    return report
