"""
沿轨迹的恒等式与性质检查
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from config.settings import NUMERIC_CONFIG, TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure
from src.coefficient_flow.flow_state import FlowState, Trajectory
from src.operator_builder.quadruple import pencil_identity_report
from src.pencil_algebra.matrix_pencil import det_roots
from src.utils.errors import AtSingularPoint
from src.utils.helpers import central_derivative, max_abs


@dataclass
class NodeResiduals:
    """逐节点残差"""

    name: str
    x: np.ndarray
    values: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.values)) if len(self.values) else 0.0

    @property
    def argmax(self) -> Optional[float]:
        return float(self.x[int(np.argmax(self.values))]) if len(self.values) else None

    def to_dict(self) -> Dict[str, Any]:
        return {'max': self.max, 'worst_x': self.argmax, 'per_node': [float(v) for v in self.values]}


def state_drift(s: FlowState, bs: BandStructure) -> float:
    """五个束恒等式逐系数相对残差的最大值"""
    F, G1, G2, H = s.pencils()
    return pencil_identity_report(F, G1, G2, H, bs, [], np.inf)['max_relative']


def invariant_residuals(s: FlowState, bs: BandStructure, z_samples: Optional[Sequence[complex]] = None,
                        tol: Optional[float] = None) -> Dict[str, Any]:
    """
    状态 s 处的束恒等式残差（系数与采样点两种方式）

    这些恒等式的 z 系数是演化的首次积分，因此残差反映积分误差。
    """
    tol = tol if tol is not None else TOLERANCE_CONFIG['invariants']
    if z_samples is None:
        z_samples = bs.herglotz_grid(NUMERIC_CONFIG['herglotz_grid_size'], NUMERIC_CONFIG['herglotz_radii'])
    F, G1, G2, H = s.pencils()
    report = pencil_identity_report(F, G1, G2, H, bs, z_samples, tol)
    report['x'] = s.x
    return report


def state_weyl(s: FlowState, bs: BandStructure, z: complex, side: int) -> np.ndarray:
    """由状态构造 M_±(z, x) = ±i R^{1/2} F^{-1} - G_1 F^{-1}"""
    F, G1, _, _ = s.evaluate(z)
    if np.linalg.cond(F) > 1e14:
        raise AtSingularPoint(f"x={s.x} 处 F(z) 在 z={z} 不可逆")
    Finv = np.linalg.inv(F)
    return side * 1j * bs.sqrt_R(z) * Finv - G1 @ Finv


def riccati_residual(traj: Trajectory, bs: BandStructure, z: complex) -> NodeResiduals:
    """
    ‖dM_±/dx + M_±² - (Q - zI)‖ 的逐节点最大值（二阶中心差分）
    """
    if complex(z).imag == 0:
        raise AtSingularPoint(f"Riccati 检查需要非实的 z: {z}")
    if len(traj) < 3:
        raise ValueError("Riccati 检查至少需要 3 个节点")
    dx = traj.dx
    Q = traj.potentials()
    eye = np.eye(traj.m)
    values = np.zeros(len(traj))
    for side in (1, -1):
        M = np.array([state_weyl(s, bs, z, side) for s in traj.states])
        dM = central_derivative(M, dx)
        residual = dM + M @ M - (Q - z * eye)
        values = np.maximum(values, np.max(np.abs(residual), axis=(1, 2)))
    return NodeResiduals(f'riccati(z={complex(z)})', traj.grid.copy(), values)


def reflectionless_check(traj: Trajectory, bs: BandStructure, lam: float, eps: float) -> NodeResiduals:
    """‖M_+(λ+iε, x) - M_-(λ-iε, x)‖，λ 位于能带内部"""
    if not bs.in_band_interior(lam):
        raise ValueError(f"λ={lam} 不在能带内部")
    values = np.array([
        max_abs(state_weyl(s, bs, complex(lam, eps), 1) - state_weyl(s, bs, complex(lam, -eps), -1))
        for s in traj.states
    ])
    return NodeResiduals(f'reflectionless(λ={lam}, ε={eps:g})', traj.grid.copy(), values)


def lax_residual(traj: Trajectory, z_samples: Sequence[complex]) -> NodeResiduals:
    """
    G_2' = (-F'' + QF - FQ)/2 与 G_2'' = -2F'(Q - z) - FQ' + QG_2 - G_2Q 的逐节点残差
    """
    if len(traj) < 5:
        raise ValueError("Lax 检查至少需要 5 个节点")
    dx = traj.dx
    Q = traj.potentials()
    dQ = central_derivative(Q, dx)
    eye = np.eye(traj.m)
    values = np.zeros(len(traj))
    for z in z_samples:
        values_z = [s.evaluate(z) for s in traj.states]
        F = np.array([v[0] for v in values_z])
        G2 = np.array([v[2] for v in values_z])
        dF = central_derivative(F, dx)
        d2F = central_derivative(F, dx, order=2)
        dG2 = central_derivative(G2, dx)
        d2G2 = central_derivative(G2, dx, order=2)
        first = dG2 - 0.5 * (-d2F + Q @ F - F @ Q)
        second = d2G2 - (-2.0 * dF @ (Q - z * eye) - F @ dQ + Q @ G2 - G2 @ Q)
        scale = max(1.0, abs(z) ** traj.n)
        residual = np.maximum(np.max(np.abs(first), axis=(1, 2)), np.max(np.abs(second), axis=(1, 2)))
        values = np.maximum(values, residual / scale)
    # 端点附近的二阶差分只有一阶精度
    return NodeResiduals('lax', traj.grid[2:-2].copy(), values[2:-2])


def zone_confinement_check(traj: Trajectory, bs: BandStructure, tol: Optional[float] = None) -> Dict[str, Any]:
    """各节点 det F(·, x) 的根到能隙闭包的最大距离"""
    tol = tol if tol is not None else TOLERANCE_CONFIG['zone_confinement']
    worst, worst_x = 0.0, None
    for s in traj.states:
        F = s.pencils()[0]
        for root, _ in det_roots(F, scale=bs.span):
            distance = min(
                max(left - root.real, root.real - right, 0.0) for left, right in bs.interior_gaps
            ) + abs(root.imag)
            if distance >= worst:
                worst, worst_x = distance, s.x
    passed = worst <= tol * bs.span
    if not passed:
        logger.warning(f"x={worst_x} 处 det F 的根离开能隙 {worst:.3e}")
    return {'value': worst, 'worst_x': worst_x, 'passed': bool(passed)}


def hermiticity_check(traj: Trajectory, tol: Optional[float] = None) -> Dict[str, Any]:
    """max_x ‖Q(x) - Q(x)*‖"""
    tol = tol if tol is not None else TOLERANCE_CONFIG['hermiticity']
    Q = traj.potentials()
    defects = np.max(np.abs(Q - np.conj(np.swapaxes(Q, -1, -2))), axis=(1, 2))
    worst = float(np.max(defects))
    return {'value': worst, 'worst_x': float(traj.grid[int(np.argmax(defects))]), 'passed': bool(worst <= tol)}


def boundedness_check(traj: Trajectory, bs: BandStructure, tol: Optional[float] = None) -> Dict[str, Any]:
    """‖Q(x)‖ ≤ Σ|E_l| + 2n max|E_l|"""
    tol = tol if tol is not None else TOLERANCE_CONFIG['boundedness']
    edges = np.abs(np.asarray(bs.edges))
    bound = float(np.sum(edges) + 2 * bs.n * np.max(edges))
    norms = np.array([np.linalg.norm(Q, 2) for Q in traj.potentials()])
    worst = float(np.max(norms))
    return {'value': worst, 'bound': bound, 'passed': bool(worst <= bound * (1.0 + tol))}
