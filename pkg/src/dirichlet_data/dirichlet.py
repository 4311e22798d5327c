"""
Dirichlet 型谱数据 {μ_k, Γ_k, ε_k} 的提取与校验
"""

import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import linalg

from config.settings import NUMERIC_CONFIG, TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure
from src.pencil_algebra.matrix_pencil import MatrixPencil, det_roots
from src.utils.errors import (
    DefectiveRoot,
    DirichletError,
    NegativeGamma,
    PlacementOutsideGap,
    RootAtBandEdge,
)
from src.utils.helpers import hermitian_part, max_abs


@dataclass
class DirichletDatum:
    """单个 Dirichlet 数据"""

    mu: float
    gamma: np.ndarray
    rank: int
    epsilon: int = 1
    multiplicity: int = 1
    residue_residual: float = 0.0


@dataclass
class DirichletSet:
    """Dirichlet 数据集合及常数项 Γ_0"""

    data: List[DirichletDatum]
    gamma0: np.ndarray
    m: int = 1
    hermitian_defect: float = 0.0

    @property
    def N(self) -> int:
        return len(self.data)

    def residue_sum(self, z: complex, weighted: bool = True) -> np.ndarray:
        """Σ_k ε_k Γ_k/(z - μ_k)（weighted=False 时不乘 ε_k）"""
        total = np.zeros((self.m, self.m), dtype=complex)
        for datum in self.data:
            weight = datum.epsilon if weighted else 1
            total += weight * datum.gamma / (z - datum.mu)
        return total

    def half_line_atoms(self, side: int) -> List[Tuple[float, np.ndarray]]:
        """半直线表示中的点质量 (μ_k, (1 ± ε_k)Γ_k)"""
        return [(d.mu, (1 + side * d.epsilon) * d.gamma) for d in self.data]

    def validate(self, bs: BandStructure, tol: Optional[float] = None) -> Dict[str, bool]:
        """
        校验秩上界、每个能隙的重数、半正定性与留数恒等式

        Returns:
            各项检查结果
        """
        tol = tol if tol is not None else TOLERANCE_CONFIG['dirichlet']
        per_gap = [0] * bs.n
        root_tol = NUMERIC_CONFIG['cluster_rel_tol'] * bs.span
        for datum in self.data:
            j = bs.gap_index(datum.mu, root_tol)
            if j is not None:
                per_gap[j - 1] += datum.multiplicity
        psd = all(
            np.linalg.eigvalsh(d.gamma)[0] >= -NUMERIC_CONFIG['psd_tol'] * max(1.0, max_abs(d.gamma))
            for d in self.data
        )
        return {
            'rank_bound': sum(d.rank for d in self.data) <= self.m * bs.n,
            'gap_multiplicity': all(count == self.m for count in per_gap),
            'gamma_psd': psd,
            'residue_identity': all(d.residue_residual <= tol for d in self.data),
            'gamma0_hermitian': max_abs(self.gamma0 - self.gamma0.conj().T) <= tol,
        }


def _null_spaces(value: np.ndarray, multiplicity: int, scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """右零空间 V 与左零空间 W（W* F = 0）"""
    U, s, Vh = linalg.svd(value)
    if s[-multiplicity] > 1e-6 * scale:
        raise DefectiveRoot(f"几何重数小于代数重数 {multiplicity}: 奇异值 {s[-multiplicity]:.3e}")
    V = Vh[-multiplicity:].conj().T
    W = U[:, -multiplicity:]
    return V, W


def compute_gamma0(F: MatrixPencil, bs: BandStructure, data: Sequence[DirichletDatum]) -> np.ndarray:
    """Γ_0 = Re[i R^{1/2}(i) F(i)^{-1} + Σ Γ_k/(i - μ_k)]"""
    z = 1j
    value = 1j * bs.sqrt_R(z) * np.linalg.inv(F(z))
    for datum in data:
        value = value + datum.gamma / (z - datum.mu)
    return hermitian_part(value)


def extract_dirichlet(F: MatrixPencil, bs: BandStructure,
                      epsilons: Optional[Sequence[int]] = None) -> DirichletSet:
    """
    从种子 F 提取 Dirichlet 数据

    Γ_k = -i R^{1/2}(μ_k) V (W* F'(μ_k) V)^{-1} W*

    Args:
        F: 通过 Herglotz 检验的种子
        bs: 能带结构
        epsilons: 符号 ε_k，缺省全部为 +1

    Returns:
        DirichletSet
    """
    roots = det_roots(F, scale=bs.span)
    if epsilons is not None and len(epsilons) != len(roots):
        raise DirichletError(f"需要 {len(roots)} 个符号 ε_k，实际 {len(epsilons)} 个")
    signs = list(epsilons) if epsilons is not None else [1] * len(roots)
    if any(s not in (1, -1) for s in signs):
        raise DirichletError(f"ε_k 只能取 ±1: {signs}")

    scale = max(1.0, F.norm()) * max(1.0, bs.span) ** F.degree
    root_tol = NUMERIC_CONFIG['cluster_rel_tol'] * bs.span
    dF = F.derivative()
    data: List[DirichletDatum] = []
    worst_defect = 0.0

    for (root, multiplicity), epsilon in zip(roots, signs):
        mu = float(root.real)
        if abs(root.imag) > root_tol or not bs.in_gap_closure(mu, root_tol):
            raise PlacementOutsideGap(f"行列式根 {root} 不在能隙闭包内")

        V, W = _null_spaces(F(mu), multiplicity, scale)
        S = W.conj().T @ dF(mu) @ V
        if np.linalg.cond(S) > 1e12:
            raise DefectiveRoot(f"μ={mu} 处为亏损根")

        r = bs.sqrt_R(mu)
        if abs(bs.R(mu)) <= root_tol * scale:
            message = f"μ={mu} 落在能带边界，对应留数置零"
            warnings.warn(message, RootAtBandEdge)
            logger.warning(message)
            gamma = np.zeros((F.m, F.m), dtype=complex)
        else:
            gamma = -1j * r * (V @ np.linalg.solve(S, W.conj().T))

        defect = max_abs(gamma - gamma.conj().T)
        worst_defect = max(worst_defect, defect / max(1.0, max_abs(gamma)))
        gamma = hermitian_part(gamma)

        eigs = np.linalg.eigvalsh(gamma)
        norm = max(float(np.max(np.abs(eigs))), np.finfo(float).tiny)
        if eigs[0] < -NUMERIC_CONFIG['psd_tol'] * max(1.0, norm):
            raise NegativeGamma(f"μ={mu} 处 Γ 不半正定: 最小特征值 {eigs[0]:.3e}")
        rank = int(np.sum(eigs > NUMERIC_CONFIG['rank_rel_tol'] * norm))

        residue = 1j * r * gamma + gamma @ dF(mu) @ gamma
        residue_residual = max_abs(residue) / max(1.0, max_abs(gamma)) ** 2

        data.append(DirichletDatum(mu=mu, gamma=gamma, rank=rank, epsilon=int(epsilon),
                                   multiplicity=multiplicity, residue_residual=residue_residual))
        logger.debug(f"Dirichlet 数据: μ={mu:.10f}, 重数={multiplicity}, 秩={rank}, ε={epsilon}")

    if worst_defect > NUMERIC_CONFIG['hermitian_tol']:
        logger.warning(f"Γ_k 对称化前的 Hermite 偏差: {worst_defect:.3e}")

    gamma0 = compute_gamma0(F, bs, data)
    ds = DirichletSet(data=data, gamma0=gamma0, m=F.m, hermitian_defect=worst_defect)
    logger.info(f"提取 Dirichlet 数据 {ds.N} 个，秩之和 {sum(d.rank for d in data)}")
    return ds
