"""
能带结构与 R_{2n+1} 的分支平方根
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.utils.errors import EvenEdgeCount, NonMonotoneEdges, OnBandPoint

ComplexLike = Union[complex, float, np.ndarray]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BandStructure:
    """
    谱 Σ 的能带结构

    edges 为严格递增的 2n+1 个边界点 E_0 < ... < E_2n；
    能带为 [E_2j, E_2j+1] (j=0..n-1) 与 [E_2n, ∞)，
    能隙为 (-∞, E_0) 与 (E_2j-1, E_2j) (j=1..n)。
    """

    edges: Tuple[float, ...]
    n: int = field(init=False)
    bands: Tuple[Tuple[float, float], ...] = field(init=False)
    gaps: Tuple[Tuple[float, float], ...] = field(init=False)

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        if len(edges) < 3 or len(edges) % 2 == 0:
            raise EvenEdgeCount(f"边界点个数必须为不小于3的奇数，实际为 {len(edges)}")
        if not all(np.isfinite(edges)):
            raise NonMonotoneEdges("边界点必须为有限实数")
        for left, right in zip(edges[:-1], edges[1:]):
            if not left < right:
                raise NonMonotoneEdges(f"边界点必须严格递增: {left} >= {right}")

        n = (len(edges) - 1) // 2
        bands = [(edges[2 * j], edges[2 * j + 1]) for j in range(n)]
        bands.append((edges[2 * n], float('inf')))
        gaps = [(float('-inf'), edges[0])]
        gaps += [(edges[2 * j - 1], edges[2 * j]) for j in range(1, n + 1)]

        object.__setattr__(self, 'edges', edges)
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'bands', tuple(bands))
        object.__setattr__(self, 'gaps', tuple(gaps))

    @property
    def span(self) -> float:
        """边界跨度 E_2n - E_0"""
        return self.edges[-1] - self.edges[0]

    @property
    def edge_sum(self) -> float:
        return float(sum(self.edges))

    @property
    def interior_gaps(self) -> Tuple[Tuple[float, float], ...]:
        """有限能隙 (E_2j-1, E_2j)，j=1..n"""
        return self.gaps[1:]

    def R(self, z: ComplexLike) -> ComplexLike:
        """R_{2n+1}(z) = ∏ (z - E_l)"""
        z = np.asarray(z, dtype=complex)
        result = np.ones_like(z)
        for e in self.edges:
            result = result * (z - e)
        return result if result.ndim else complex(result)

    def R_derivative(self, z: ComplexLike) -> ComplexLike:
        coeffs = np.poly(self.edges)
        value = np.polyval(np.polyder(coeffs), np.asarray(z, dtype=complex))
        return value if np.ndim(value) else complex(value)

    def sqrt_R(self, z: ComplexLike, boundary: str = 'upper') -> ComplexLike:
        """
        分支平方根 R^{1/2}(z) = |R(z)|^{1/2} exp(i/2 Σ arg(z - E_l))，arg 取值于 [0, 2π)

        Args:
            z: 复数或复数数组
            boundary: 实轴能带内部取上半平面('upper')或下半平面('lower')边界值

        Returns:
            与 z 同形的平方根值
        """
        z = np.asarray(z, dtype=complex)
        modulus = np.ones(z.shape)
        phase = np.zeros(z.shape)
        for e in self.edges:
            w = z - e
            modulus = modulus * np.sqrt(np.abs(w))
            phase = phase + np.mod(np.angle(w), TWO_PI)
        value = modulus * np.exp(0.5j * phase)
        if boundary == 'lower':
            on_band = (z.imag == 0) & self.in_band_interior(z.real)
            value = np.where(on_band, -value, value)
        elif boundary != 'upper':
            raise ValueError(f"未知的边界值方向: {boundary}")
        return value if value.ndim else complex(value)

    def in_band_interior(self, lam: Union[float, np.ndarray]) -> Union[bool, np.ndarray]:
        """λ 是否位于某个能带的开内部 Σ°"""
        lam = np.asarray(lam, dtype=float)
        inside = np.zeros(lam.shape, dtype=bool)
        for left, right in self.bands:
            inside |= (lam > left) & (lam < right)
        return inside if inside.ndim else bool(inside)

    def in_gap_closure(self, lam: float, tol: float = 0.0) -> bool:
        """λ 是否位于某个有限能隙的闭包内"""
        return any(left - tol <= lam <= right + tol for left, right in self.interior_gaps)

    def gap_index(self, lam: float, tol: float = 0.0) -> Optional[int]:
        """返回包含 λ 的有限能隙编号 j (1..n)，不在任何能隙闭包内时返回 None"""
        for j, (left, right) in enumerate(self.interior_gaps, start=1):
            if left - tol <= lam <= right + tol:
                return j
        return None

    def classify(self, lam: float) -> Tuple[str, int]:
        """
        对实数 λ 分类

        Returns:
            ('edge', l) / ('band', j) / ('gap', j)，其中 gap 编号 0 表示 (-∞, E_0)
        """
        for index, e in enumerate(self.edges):
            if lam == e:
                return 'edge', index
        for j, (left, right) in enumerate(self.bands):
            if left < lam < right:
                return 'band', j
        for j, (left, right) in enumerate(self.gaps):
            if left < lam < right:
                return 'gap', j
        raise ValueError(f"无法分类的实数: {lam}")

    def separators(self, degree: int) -> List[float]:
        """
        强双曲性检验的自动分隔点

        degree = n（F 类束）时取内部能带 (E_2j, E_2j+1), j=1..n-1 的中点；
        degree = n+1（H 类束）时取能带 (E_2j, E_2j+1), j=0..n-1 的中点。
        """
        if degree == self.n:
            return [0.5 * (self.edges[2 * j] + self.edges[2 * j + 1]) for j in range(1, self.n)]
        if degree == self.n + 1:
            return [0.5 * (self.edges[2 * j] + self.edges[2 * j + 1]) for j in range(self.n)]
        raise ValueError(f"次数 {degree} 与能带数 n={self.n} 不匹配")

    def band_midpoints(self) -> List[float]:
        points = [0.5 * (left + right) for left, right in self.bands[:-1]]
        points.append(self.edges[-1] + 0.5 * self.span)
        return points

    def gap_midpoints(self) -> List[float]:
        return [0.5 * (left + right) for left, right in self.interior_gaps]

    def herglotz_grid(self, size: int = 5, radii: Tuple[float, float] = (0.1, 10.0)) -> np.ndarray:
        """上半平面采样网格：几何分布半径 × (0, π) 内的角度"""
        rs = np.geomspace(radii[0] * self.span, radii[1] * self.span, size)
        angles = np.linspace(0.1 * np.pi, 0.9 * np.pi, size)
        center = 0.5 * (self.edges[0] + self.edges[-1])
        return np.array([center + r * np.exp(1j * a) for r in rs for a in angles])

    def sector_points(self, radius: float, opening: float, count: int = 5,
                      half_aperture: bool = False) -> np.ndarray:
        """
        扇形 {|arg z - π/2| ≤ α} 内的采样点

        Args:
            radius: 采样半径
            opening: 开角 ε
            count: 采样个数
            half_aperture: True 时 α = ε（半开角解读），否则 α = ε/2
        """
        alpha = opening if half_aperture else 0.5 * opening
        alpha = min(alpha, 0.45 * np.pi)
        angles = np.linspace(0.5 * np.pi - alpha, 0.5 * np.pi + alpha, count)
        return radius * np.exp(1j * angles)


def new_band_structure(edges: Sequence[float]) -> BandStructure:
    """由边界点构造并校验能带结构"""
    bs = BandStructure(tuple(edges))
    logger.debug(f"能带结构: n={bs.n}, 能带={bs.bands}, 能隙={bs.gaps}")
    return bs


def eval_R(bs: BandStructure, z: ComplexLike) -> ComplexLike:
    return bs.R(z)


def eval_sqrtR(bs: BandStructure, z: ComplexLike, strict: bool = False,
               boundary: str = 'upper') -> ComplexLike:
    """
    计算分支平方根

    Args:
        bs: 能带结构
        z: 复数（或数组）
        strict: True 时若 z 为能带内部的实数则抛出 OnBandPoint
        boundary: 能带内部实数点取 'upper' 或 'lower' 边界值
    """
    if strict:
        arr = np.asarray(z, dtype=complex)
        if np.any((arr.imag == 0) & bs.in_band_interior(arr.real)):
            raise OnBandPoint(f"在能带内部求值: {z}")
    return bs.sqrt_R(z, boundary=boundary)
