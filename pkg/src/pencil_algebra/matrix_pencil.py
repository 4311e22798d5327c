"""
矩阵束：以 m×m 复矩阵为系数的多项式
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import linalg

from config.settings import NUMERIC_CONFIG
from src.utils.errors import DimensionMismatch, SingularLeadingCoefficient
from src.utils.helpers import adjoint


@dataclass(frozen=True, eq=False)
class MatrixPencil:
    """
    A(z) = Σ_k A_k z^k

    coeffs 形如 (d+1, m, m)，按 z 的升幂排列。descending() 给出互补下标
    A(z) = Σ_l A_{d-l}' z^l 中的 A_0' = A_d, A_1' = A_{d-1}, ...
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
            raise DimensionMismatch(f"系数数组形状无效: {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, 'coeffs', arr)

    # ---------------- 构造 ----------------

    @classmethod
    def from_descending(cls, coeffs: Sequence[np.ndarray]) -> 'MatrixPencil':
        """由降幂系数 [A_d, A_{d-1}, ..., A_0] 构造"""
        return cls(np.array(list(coeffs), dtype=complex)[::-1])

    @classmethod
    def identity(cls, m: int) -> 'MatrixPencil':
        return cls(np.eye(m, dtype=complex)[np.newaxis])

    @classmethod
    def zero(cls, m: int) -> 'MatrixPencil':
        return cls(np.zeros((1, m, m), dtype=complex))

    @classmethod
    def scalar(cls, ascending: Sequence[complex], m: int = 1) -> 'MatrixPencil':
        """标量多项式乘以 I_m"""
        eye = np.eye(m, dtype=complex)
        return cls(np.array([a * eye for a in ascending]))

    @classmethod
    def linear(cls, Z: np.ndarray) -> 'MatrixPencil':
        """zI - Z"""
        Z = np.asarray(Z, dtype=complex)
        return cls(np.array([-Z, np.eye(Z.shape[0], dtype=complex)]))

    @classmethod
    def from_linear_factors(cls, roots: Sequence[np.ndarray]) -> 'MatrixPencil':
        """(zI - Y_d)⋯(zI - Y_1)，roots = [Y_1, ..., Y_d]"""
        if not roots:
            raise ValueError("至少需要一个线性因子")
        product = cls.linear(roots[0])
        for Y in roots[1:]:
            product = cls.linear(Y) @ product
        return product

    # ---------------- 属性 ----------------

    @property
    def m(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def leading(self) -> np.ndarray:
        return self.coeffs[-1]

    def descending(self) -> np.ndarray:
        return self.coeffs[::-1].copy()

    def is_monic(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.leading - np.eye(self.m))) <= tol)

    def norm(self) -> float:
        """系数谱范数的最大值"""
        return float(max(np.linalg.norm(c, 2) for c in self.coeffs))

    # ---------------- 求值 ----------------

    def __call__(self, z: complex) -> np.ndarray:
        """Horner 求值"""
        result = self.coeffs[-1].copy()
        for c in self.coeffs[-2::-1]:
            result = result * z + c
        return result

    def at_matrix(self, Z: np.ndarray) -> np.ndarray:
        """右代入 A(Z) = Σ A_k Z^k"""
        Z = np.asarray(Z, dtype=complex)
        if Z.shape != (self.m, self.m):
            raise DimensionMismatch(f"矩阵维数 {Z.shape} 与束维数 {self.m} 不符")
        result = self.coeffs[-1].copy()
        for c in self.coeffs[-2::-1]:
            result = result @ Z + c
        return result

    # ---------------- 运算 ----------------

    def _padded(self, degree: int) -> np.ndarray:
        out = np.zeros((degree + 1, self.m, self.m), dtype=complex)
        out[:self.degree + 1] = self.coeffs
        return out

    def _check_dim(self, other: 'MatrixPencil') -> None:
        if other.m != self.m:
            raise DimensionMismatch(f"束维数不一致: {self.m} vs {other.m}")

    def __add__(self, other: 'MatrixPencil') -> 'MatrixPencil':
        self._check_dim(other)
        degree = max(self.degree, other.degree)
        return MatrixPencil(self._padded(degree) + other._padded(degree))

    def __sub__(self, other: 'MatrixPencil') -> 'MatrixPencil':
        self._check_dim(other)
        degree = max(self.degree, other.degree)
        return MatrixPencil(self._padded(degree) - other._padded(degree))

    def __neg__(self) -> 'MatrixPencil':
        return MatrixPencil(-self.coeffs)

    def __matmul__(self, other: 'MatrixPencil') -> 'MatrixPencil':
        """多项式乘积（保持书写顺序）"""
        self._check_dim(other)
        out = np.zeros((self.degree + other.degree + 1, self.m, self.m), dtype=complex)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a @ b
        return MatrixPencil(out)

    def scale(self, factor: complex) -> 'MatrixPencil':
        return MatrixPencil(self.coeffs * factor)

    def derivative(self) -> 'MatrixPencil':
        if self.degree == 0:
            return MatrixPencil.zero(self.m)
        k = np.arange(1, self.degree + 1)[:, None, None]
        return MatrixPencil(self.coeffs[1:] * k)

    def adjoint(self) -> 'MatrixPencil':
        """系数逐个取共轭转置，对应 A(z̄)*"""
        return MatrixPencil(adjoint(self.coeffs))

    def hermitized(self) -> 'MatrixPencil':
        return MatrixPencil(0.5 * (self.coeffs + adjoint(self.coeffs)))

    def trimmed(self, tol: float = 0.0) -> 'MatrixPencil':
        """去掉模不超过 tol 的高次系数（至少保留常数项）"""
        top = self.degree
        while top > 0 and np.max(np.abs(self.coeffs[top])) <= tol:
            top -= 1
        return MatrixPencil(self.coeffs[:top + 1])

    def max_coefficient_gap(self, other: 'MatrixPencil') -> float:
        """两束系数之差的最大元素模"""
        return float(np.max(np.abs((self - other).coeffs)))


def eval_pencil(P: MatrixPencil, z: complex) -> np.ndarray:
    return P(z)


def eval_pencil_at_matrix(P: MatrixPencil, Z: np.ndarray) -> np.ndarray:
    return P.at_matrix(Z)


def is_selfadjoint(P: MatrixPencil, tol: float = 0.0) -> bool:
    """每个系数在最大元素范数下 Hermite（容差 tol）"""
    if tol < 0:
        raise ValueError("tol 必须非负")
    return bool(np.max(np.abs(P.coeffs - adjoint(P.coeffs))) <= tol)


def companion_eig(P: MatrixPencil) -> Tuple[np.ndarray, np.ndarray]:
    """
    块友矩阵线性化的广义特征问题

    Returns:
        (eigenvalues, X)，X 的列为特征向量的前 m 个分量
    """
    m, d = P.m, P.degree
    if d == 0:
        return np.zeros(0, dtype=complex), np.zeros((m, 0), dtype=complex)
    lead = P.leading
    if np.linalg.cond(lead) > 1.0 / np.finfo(float).eps:
        raise SingularLeadingCoefficient("首项系数不可逆")
    if d == 1:
        C = -P.coeffs[0]
        D = lead
    else:
        C = np.block([
            [np.zeros((m * (d - 1), m)), np.eye(m * (d - 1))],
            [-np.column_stack(list(P.coeffs[:-1]))],
        ])
        D = np.block([
            [np.eye(m * (d - 1)), np.zeros((m * (d - 1), m))],
            [np.zeros((m, m * (d - 1))), lead],
        ])
    eigenvalues, vectors = linalg.eig(C, D)
    return eigenvalues, vectors[:m, :]


def det_roots(P: MatrixPencil, scale: Optional[float] = None,
              rel_tol: Optional[float] = None) -> List[Tuple[complex, int]]:
    """
    det P(z) 的全部根（按重数聚类）

    Args:
        P: 首项系数可逆的矩阵束
        scale: 聚类尺度（通常为边界跨度），缺省取根模的最大值与 1 的较大者
        rel_tol: 相对聚类容差

    Returns:
        [(root, multiplicity), ...]，按实部升序，重数之和为 d·m
    """
    eigenvalues, _ = companion_eig(P)
    if eigenvalues.size == 0:
        return []
    rel_tol = rel_tol if rel_tol is not None else NUMERIC_CONFIG['cluster_rel_tol']
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    ordered = eigenvalues[order]

    groups: List[List[complex]] = [[ordered[0]]]
    for value in ordered[1:]:
        if abs(value - groups[-1][-1]) <= rel_tol * scale:
            groups[-1].append(value)
        else:
            groups.append([value])
    roots = [(complex(np.mean(g)), len(g)) for g in groups]
    logger.debug(f"行列式根: {[(r.real, k) for r, k in roots]}")
    return roots
