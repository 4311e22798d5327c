"""
根区估计与双曲性判定
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config.settings import NUMERIC_CONFIG
from src.pencil_algebra.matrix_pencil import MatrixPencil, is_selfadjoint
from src.utils.errors import IndefiniteLeading, NonSelfAdjoint, WrongSeparatorCount

HYPERBOLICITY_LEVELS = ('not-weakly', 'weakly', 'hyperbolic', 'strongly')


@dataclass
class RootZoneReport:
    """根区估计结果"""

    zones: List[Tuple[float, float]]
    hyperbolicity: str
    certificate: Dict[str, list] = field(default_factory=dict)
    probes: int = 0

    def contains(self, index: int, interval: Tuple[float, float], tol: float = 0.0) -> bool:
        """第 index 个根区估计是否包含于给定区间"""
        low, high = self.zones[index]
        return interval[0] - tol <= low and high <= interval[1] + tol


def _probe_vectors(m: int, probes: int, rng_seed: int, P: MatrixPencil) -> List[np.ndarray]:
    """确定性随机单位向量，并补充各系数的特征向量"""
    rng = np.random.default_rng(rng_seed)
    vectors = []
    for _ in range(probes):
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        vectors.append(v / np.linalg.norm(v))
    for c in P.coeffs:
        _, eigvecs = np.linalg.eigh(0.5 * (c + c.conj().T))
        vectors.extend(eigvecs[:, i] for i in range(m))
    return vectors


def root_zones(P: MatrixPencil, probes: Optional[int] = None, rng_seed: int = 0) -> RootZoneReport:
    """
    对单位向量 f 求标量多项式 (f, A(z) f) 的有序实根，取逐个下标的上下包络作为根区估计

    Args:
        P: 自伴且首项正定的矩阵束
        probes: 随机向量个数
        rng_seed: 随机种子

    Returns:
        RootZoneReport
    """
    probes = probes if probes is not None else NUMERIC_CONFIG['root_zone_probes']
    tol = NUMERIC_CONFIG['hermitian_tol'] * max(1.0, P.norm())
    if not is_selfadjoint(P, tol):
        raise NonSelfAdjoint("根区计算要求自伴矩阵束")
    if np.linalg.eigvalsh(0.5 * (P.leading + P.leading.conj().T))[0] <= 0:
        raise IndefiniteLeading("首项系数不是正定矩阵")

    d = P.degree
    if d == 0:
        return RootZoneReport(zones=[], hyperbolicity='strongly', probes=probes)

    imag_tol = NUMERIC_CONFIG['zone_imag_tol']
    all_roots = []
    nonreal = False
    for f in _probe_vectors(P.m, probes, rng_seed, P):
        scalar = np.real(np.einsum('i,kij,j->k', f.conj(), P.coeffs, f))
        roots = np.roots(scalar[::-1])
        scale = max(1.0, float(np.max(np.abs(roots))))
        if np.any(np.abs(roots.imag) > imag_tol * scale):
            nonreal = True
        all_roots.append(np.sort(roots.real))
    table = np.array(all_roots)
    zones = [(float(table[:, j].min()), float(table[:, j].max())) for j in range(d)]

    if nonreal:
        level = 'not-weakly'
    elif all(zones[j][1] < zones[j + 1][0] for j in range(d - 1)):
        level = 'strongly'
    elif np.all(np.diff(table, axis=1) > 0):
        level = 'hyperbolic'
    else:
        level = 'weakly'

    separators = [0.5 * (zones[j][1] + zones[j + 1][0]) for j in range(d - 1)] if level == 'strongly' else []
    report = RootZoneReport(zones=zones, hyperbolicity=level,
                            certificate={'separators': separators}, probes=probes)
    logger.debug(f"根区估计: {zones}, 双曲性={level}")
    return report


def check_strong_hyperbolicity(P: MatrixPencil, separators: Sequence[float]) -> Tuple[bool, Dict[str, list]]:
    """
    检验 (-1)^{d-j} A(γ_j) 对全部分隔点正定

    Returns:
        (是否强双曲, 证书)，证书记录分隔点、符号与最小特征值
    """
    d = P.degree
    separators = list(separators)
    if len(separators) != max(d - 1, 0):
        raise WrongSeparatorCount(f"需要 {d - 1} 个分隔点，实际 {len(separators)} 个")
    if any(a >= b for a, b in zip(separators[:-1], separators[1:])):
        raise WrongSeparatorCount("分隔点必须严格递增")

    signs, smallest = [], []
    for j, gamma in enumerate(separators, start=1):
        sign = (-1) ** (d - j)
        value = sign * P(gamma)
        eig_min = float(np.linalg.eigvalsh(0.5 * (value + value.conj().T))[0])
        signs.append(sign)
        smallest.append(eig_min)
    passed = all(e > 0 for e in smallest)
    certificate = {'separators': separators, 'signs': signs, 'min_eigenvalues': smallest}
    return passed, certificate
