"""
谱根、右除法、首一分解与块 Vandermonde 矩阵
"""

from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config.settings import NUMERIC_CONFIG
from src.pencil_algebra.matrix_pencil import MatrixPencil, companion_eig
from src.utils.errors import (
    IllConditionedEigenbasis,
    NonzeroRemainder,
    SingularLeadingCoefficient,
    WrongEigenCountInZone,
)


def spectral_root(P: MatrixPencil, zone: Tuple[float, float], tol: Optional[float] = None) -> np.ndarray:
    """
    由根区闭包内的块友矩阵特征对构造谱根 Z = X diag(λ) X^{-1}

    Args:
        P: 首一强双曲矩阵束
        zone: 根区区间 [a, b]
        tol: 区间端点的放宽量，缺省为 1e-9·max(1, |a|, |b|)

    Returns:
        m×m 复矩阵 Z，满足 P(Z) ≈ 0
    """
    eigenvalues, X = companion_eig(P)
    low, high = zone
    if tol is None:
        tol = 1e-9 * max(1.0, abs(low), abs(high))
    imag_limit = NUMERIC_CONFIG['imag_root_tol'] * max(1.0, abs(low), abs(high)) * 1e2
    selected = [
        i for i, lam in enumerate(eigenvalues)
        if low - tol <= lam.real <= high + tol and abs(lam.imag) <= imag_limit
    ]
    if len(selected) != P.m:
        raise WrongEigenCountInZone(
            f"根区 [{low}, {high}] 内有 {len(selected)} 个特征值，应为 {P.m} 个"
        )

    Xs = X[:, selected]
    condition = np.linalg.cond(Xs)
    if not np.isfinite(condition) or condition > NUMERIC_CONFIG['eig_condition_max']:
        raise IllConditionedEigenbasis(f"特征基条件数过大: {condition:.3e}")
    lam = eigenvalues[selected].real
    Z = Xs @ np.diag(lam) @ np.linalg.inv(Xs)

    residual = float(np.max(np.abs(P.at_matrix(Z))))
    bound = 1e-9 * max(1.0, P.norm()) * max(1.0, float(np.max(np.abs(lam)))) ** P.degree
    if residual > bound:
        logger.warning(f"谱根残差偏大: {residual:.3e} (参考 {bound:.3e})")
    return Z


def divide_right(P: MatrixPencil, Z: np.ndarray, tol: float = 1e-8) -> MatrixPencil:
    """
    右除法 P(z) = B(z)(zI - Z)

    递推 B_{d-1} = A_d, B_{k-1} = A_k + B_k Z，余项 A_0 + B_0 Z 必须为零
    """
    d = P.degree
    if d == 0:
        raise NonzeroRemainder("常数矩阵束不能被线性因子整除")
    Z = np.asarray(Z, dtype=complex)
    B = [None] * d
    B[d - 1] = P.coeffs[d].copy()
    for k in range(d - 1, 0, -1):
        B[k - 1] = P.coeffs[k] + B[k] @ Z
    remainder = P.coeffs[0] + B[0] @ Z

    size = max(1.0, P.norm()) * max(1.0, float(np.linalg.norm(Z, 2))) ** d
    if np.max(np.abs(remainder)) > tol * size:
        raise NonzeroRemainder(f"右除余项不为零: {np.max(np.abs(remainder)):.3e}")
    return MatrixPencil(np.array(B))


def _zones_from_spectrum(P: MatrixPencil) -> List[Tuple[float, float]]:
    """按实部排序后每 m 个特征值分为一组，组间必须分离"""
    eigenvalues, _ = companion_eig(P)
    values = np.sort(eigenvalues.real)
    m, d = P.m, P.degree
    zones = [(float(values[j * m]), float(values[(j + 1) * m - 1])) for j in range(d)]
    for (a_low, a_high), (b_low, _) in zip(zones[:-1], zones[1:]):
        if not a_high < b_low:
            raise WrongEigenCountInZone(f"根区未分离: {a_high} >= {b_low}")
    return zones


def factorize(P: MatrixPencil, zones: Optional[Sequence[Tuple[float, float]]] = None) -> List[np.ndarray]:
    """
    首一分解 P(z) = (zI - Y_d)⋯(zI - Y_1)

    依次提取最低根区的谱根作为最右因子并右除。

    Returns:
        [Y_1, ..., Y_d]，spec(Y_j) 位于第 j 个根区
    """
    if not P.is_monic(1e-10):
        raise SingularLeadingCoefficient("分解要求首一矩阵束")
    zones = list(zones) if zones is not None else _zones_from_spectrum(P)
    current = P
    roots = []
    for zone in zones:
        Y = spectral_root(current, zone)
        roots.append(Y)
        if current.degree > 1:
            current = divide_right(current, Y)
    return roots


def vandermonde(roots: Sequence[np.ndarray]) -> np.ndarray:
    """块 Vandermonde 矩阵，第 j 列块为 I, Z_j, ..., Z_j^{d-1}"""
    d = len(roots)
    m = np.asarray(roots[0]).shape[0]
    V = np.zeros((d * m, d * m), dtype=complex)
    for j, Z in enumerate(roots):
        power = np.eye(m, dtype=complex)
        for i in range(d):
            V[i * m:(i + 1) * m, j * m:(j + 1) * m] = power
            power = power @ np.asarray(Z, dtype=complex)
    return V


def elementary_block_sums(roots: Sequence[np.ndarray], k: int, reverse: bool = False) -> np.ndarray:
    """
    Σ_{j_1<…<j_k} Y_{j_k}⋯Y_{j_1}（reverse=True 时为 Y_{j_1}⋯Y_{j_k}）

    roots 按下标 1..d 排列，k=0 时返回单位阵。
    """
    m = np.asarray(roots[0]).shape[0]
    total = np.zeros((m, m), dtype=complex)
    if k == 0:
        return np.eye(m, dtype=complex)
    for indices in combinations(range(len(roots)), k):
        ordered = indices if reverse else indices[::-1]
        product = np.eye(m, dtype=complex)
        for j in ordered:
            product = product @ roots[j]
        total += product
    return total
