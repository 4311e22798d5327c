"""
Weyl–Titchmarsh 矩阵与谱密度的求值
"""

import threading
import time
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import integrate

from config.settings import NUMERIC_CONFIG, TOLERANCE_CONFIG
from src.operator_builder.quadruple import OperatorData
from src.utils.errors import AtSingularPoint, RouteDisagreement, SingularN
from src.utils.helpers import hermitian_part, imaginary_part, max_abs


class EvaluationCache:
    """按 (z, 边界方向) 缓存束的取值，读写加锁"""

    def __init__(self, max_size: int = 256):
        self.cache: Dict[Tuple, Dict[str, Any]] = {}
        self.max_size = max_size
        self._lock = threading.Lock()

    @staticmethod
    def get_cache_key(z: complex, boundary: Optional[str]) -> Tuple:
        z = complex(z)
        return (z.real, z.imag, boundary)

    def get(self, cache_key: Tuple) -> Optional[Dict[str, Any]]:
        with self._lock:
            entry = self.cache.get(cache_key)
            if entry is None:
                return None
            entry['last_accessed'] = time.monotonic()
            return entry['data']

    def set(self, cache_key: Tuple, data: Dict[str, Any]) -> None:
        with self._lock:
            # 缓存已满时删除最久未访问的项
            if len(self.cache) >= self.max_size:
                oldest_key = min(self.cache.keys(), key=lambda k: self.cache[k]['last_accessed'])
                del self.cache[oldest_key]
            self.cache[cache_key] = {'data': data, 'last_accessed': time.monotonic()}

    def clear(self) -> None:
        with self._lock:
            self.cache.clear()


@dataclass
class DensityResult:
    """谱密度取值；outside_bands 为 True 时矩阵为零"""

    lam: float
    matrix: np.ndarray
    outside_bands: bool


class WeylEvaluator:
    """半直线 M_± 与全直线 2m×2m M 的求值器"""

    def __init__(self, od: OperatorData, cache_size: int = 256,
                 route_tol: Optional[float] = None):
        self.od = od
        self.cache = EvaluationCache(cache_size)
        self.route_tol = route_tol if route_tol is not None else TOLERANCE_CONFIG['weyl_routes']
        logger.info(f"初始化 Weyl 求值器: m={od.m}, n={od.n}")

    # ---------------- 基础取值 ----------------

    def _check_point(self, z: complex, boundary: Optional[str]) -> None:
        tol = NUMERIC_CONFIG['singular_point_tol']
        for datum in self.od.ds.data:
            if abs(z - datum.mu) <= tol * max(1.0, abs(datum.mu)):
                raise AtSingularPoint(f"z={z} 与 μ={datum.mu} 重合")
        if z.imag == 0:
            kind, _ = self.od.bs.classify(z.real)
            if kind == 'edge':
                raise AtSingularPoint(f"z={z} 为能带边界点")
            if kind == 'band' and boundary is None:
                raise AtSingularPoint(f"z={z} 位于能带上，需要指定边界值方向")

    def blocks(self, z: complex, boundary: Optional[str] = None) -> Dict[str, Any]:
        """z 处的 F, G_1, G_2, H, F^{-1} 与 R^{1/2}（带缓存）"""
        z = complex(z)
        key = self.cache.get_cache_key(z, boundary)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        self._check_point(z, boundary)
        od = self.od
        F = od.F(z)
        data = {
            'F': F,
            'G1': od.G1(z),
            'G2': od.G2(z),
            'H': od.H(z),
            'Finv': np.linalg.inv(F),
            'sqrtR': od.bs.sqrt_R(z, boundary=boundary or 'upper'),
        }
        self.cache.set(key, data)
        return data

    # ---------------- Weyl 矩阵 ----------------

    def half_line(self, z: complex, side: int, boundary: Optional[str] = None) -> np.ndarray:
        """
        M_±(z) = ±i R^{1/2} F^{-1} - G_1 F^{-1}，并与 ±i R^{1/2} F^{-1} - F^{-1} G_2 比较

        Args:
            z: 复数
            side: +1 或 -1
            boundary: 实轴能带内部取值方向
        """
        if side not in (1, -1):
            raise ValueError(f"side 只能取 ±1: {side}")
        b = self.blocks(z, boundary)
        base = side * 1j * b['sqrtR'] * b['Finv']
        left = base - b['G1'] @ b['Finv']
        right = base - b['Finv'] @ b['G2']
        gap = max_abs(left - right)
        bound = max(1.0, max_abs(left), max_abs(b['G1']) * max_abs(b['Finv']))
        if gap > self.route_tol * bound:
            raise RouteDisagreement(f"M_± 两种形式不一致: {gap:.3e}")
        return left

    def full(self, z: complex, boundary: Optional[str] = None, cross_check: bool = True) -> np.ndarray:
        """
        2m×2m 矩阵 (i/2) R^{-1/2} [[H, -G_2], [-G_1, F]]，并与 M_±、N_± 块公式比较
        """
        b = self.blocks(z, boundary)
        direct = (0.5j / b['sqrtR']) * np.block([[b['H'], -b['G2']], [-b['G1'], b['F']]])
        if not cross_check:
            return direct

        Mp = self.half_line(z, 1, boundary)
        Mm = self.half_line(z, -1, boundary)
        Nm, Np = Mm - Mp, Mm + Mp
        if np.linalg.cond(Nm) > 1e12:
            raise SingularN(f"N_- 在 z={z} 处不可逆")
        Nm_inv = np.linalg.inv(Nm)
        block = np.block([
            [Mp @ Nm_inv @ Mm, 0.5 * Nm_inv @ Np],
            [0.5 * Np @ Nm_inv, Nm_inv],
        ])
        gap = max_abs(block - direct)
        if gap > self.route_tol * max(1.0, max_abs(direct)):
            raise RouteDisagreement(f"2m×2m M 两种形式不一致: {gap:.3e}")
        return direct

    def spectral_density(self, lam: float) -> DensityResult:
        """能带内部 (1/(2π R^{1/2}(λ))) [[H, -G_2], [-G_1, F]]，其余位置为零"""
        od = self.od
        size = 2 * od.m
        if not od.bs.in_band_interior(lam):
            return DensityResult(lam=float(lam), matrix=np.zeros((size, size), dtype=complex),
                                 outside_bands=True)
        b = self.blocks(complex(lam), 'upper')
        block = np.block([[b['H'], -b['G2']], [-b['G1'], b['F']]])
        density = hermitian_part(block / (2.0 * np.pi * b['sqrtR']))
        return DensityResult(lam=float(lam), matrix=density, outside_bands=False)

    # ---------------- 检查 ----------------

    def stieltjes_check(self, lam: float, eps: float) -> float:
        """‖(1/π) Im M(λ+iε) - 密度(λ)‖"""
        if eps <= 0:
            raise ValueError("ε 必须为正")
        value = imaginary_part(self.full(complex(lam, eps), cross_check=False)) / np.pi
        return max_abs(value - self.spectral_density(lam).matrix)

    def herglotz_check(self, samples: Sequence[complex], tol: Optional[float] = None) -> Dict[str, Any]:
        """Im(M_+)、Im(-M_-) 与 Im(M) 的最小特征值（按尺度归一）"""
        tol = tol if tol is not None else TOLERANCE_CONFIG['weyl_herglotz']
        worst = {'plus': np.inf, 'minus': np.inf, 'full': np.inf}
        where = {}
        for z in samples:
            scale = self.od.scale(z)
            values = {
                'plus': self.half_line(z, 1),
                'minus': -self.half_line(z, -1),
                'full': self.full(z),
            }
            for name, value in values.items():
                eig = float(np.linalg.eigvalsh(imaginary_part(value))[0]) / scale
                if eig < worst[name]:
                    worst[name], where[name] = eig, complex(z)
        minimum = min(worst.values())
        return {'min_eigenvalue': worst, 'worst_z': where, 'value': minimum,
                'passed': bool(minimum >= -tol)}

    def asymptotics_check(self, radii: Sequence[float], opening: float = np.pi / 2,
                          half_aperture: bool = False) -> Dict[str, Any]:
        """扇形内 ‖M_±(z) ∓ i z^{1/2} I‖ / |z|^{1/2} 随半径的变化"""
        eye = np.eye(self.od.m)
        errors = []
        for radius in radii:
            worst = 0.0
            for z in self.od.bs.sector_points(radius, opening, half_aperture=half_aperture):
                root = np.sqrt(complex(z))
                for side in (1, -1):
                    deviation = max_abs(self.half_line(z, side) - side * 1j * root * eye)
                    worst = max(worst, deviation / abs(root))
            errors.append(worst)
        decreasing = all(b <= a for a, b in zip(errors[:-1], errors[1:]))
        return {'radii': list(radii), 'errors': errors, 'decreasing': decreasing}

    def representation_check(self, z: complex, side: int) -> float:
        """
        比较 ±M_±(z) 与 Γ_0 + (1/π)∫_Σ R^{1/2} F^{-1} (1/(λ-z) - λ/(1+λ²)) dλ - Σ (1 ± ε_k)Γ_k/(z - μ_k)
        """
        od = self.od
        m = od.m

        def integrand(lam: float) -> np.ndarray:
            weight = od.bs.sqrt_R(lam).real * np.linalg.inv(od.F(lam))
            kernel = 1.0 / (lam - z) - lam / (1.0 + lam * lam)
            value = weight * kernel / np.pi
            return np.concatenate([value.real.ravel(), value.imag.ravel()])

        total = np.zeros(2 * m * m)
        for left, right in od.bs.bands:
            part, _ = integrate.quad_vec(integrand, left, right, epsabs=1e-12, epsrel=1e-11, limit=400)
            total += part
        integral = (total[:m * m] + 1j * total[m * m:]).reshape(m, m)

        atoms = sum(((weight / (z - mu)) for mu, weight in od.ds.half_line_atoms(side)),
                    np.zeros((m, m), dtype=complex))
        represented = od.ds.gamma0 + integral - atoms
        direct = side * self.half_line(z, side)
        return max_abs(represented - direct) / max(1.0, max_abs(direct))

    def density_schur_check(self, lam: float) -> float:
        """能带内部 D_11 - D_21 D_22^{-1} D_12 = R F^{-1}/(2π R^{1/2})"""
        density = self.spectral_density(lam)
        if density.outside_bands:
            return 0.0
        m = self.od.m
        D = density.matrix
        D11, D12, D21, D22 = D[:m, :m], D[:m, m:], D[m:, :m], D[m:, m:]
        b = self.blocks(complex(lam), 'upper')
        expected = (self.od.bs.R(lam) / (2.0 * np.pi * b['sqrtR'])) * b['Finv']
        value = D11 - D21 @ np.linalg.solve(D22, D12)
        return max_abs(value - expected) / max(1.0, max_abs(expected))


def weyl_half_line(ev: WeylEvaluator, z: complex, side: int, boundary: Optional[str] = None) -> np.ndarray:
    return ev.half_line(z, side, boundary)


def weyl_full(ev: WeylEvaluator, z: complex, boundary: Optional[str] = None) -> np.ndarray:
    return ev.full(z, boundary)


def spectral_density(ev: WeylEvaluator, lam: float) -> DensityResult:
    return ev.spectral_density(lam)


def stieltjes_check(ev: WeylEvaluator, lam: float, eps: float) -> float:
    return ev.stieltjes_check(lam, eps)


def weyl_herglotz_check(ev: WeylEvaluator, samples: Sequence[complex]) -> Dict[str, Any]:
    return ev.herglotz_check(samples)


def weyl_asymptotics_check(ev: WeylEvaluator, radii: Sequence[float], opening: float = np.pi / 2,
                           half_aperture: bool = False) -> Dict[str, Any]:
    return ev.asymptotics_check(radii, opening, half_aperture)


def herglotz_representation_check(ev: WeylEvaluator, z: complex, side: int) -> float:
    return ev.representation_check(z, side)


def density_schur_check(ev: WeylEvaluator, lam: float) -> float:
    return ev.density_schur_check(lam)
