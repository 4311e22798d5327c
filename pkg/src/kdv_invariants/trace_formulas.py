"""
迹公式：由 F、H 的矩阵根表示 Q 与展开系数
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from config.settings import TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure
from src.band_domain.edge_series import EdgeSeries
from src.coefficient_flow.flow_state import FlowState, Trajectory, potential
from src.kdv_invariants.series import series_from_state
from src.pencil_algebra.factorization import elementary_block_sums, factorize
from src.utils.helpers import max_abs


@dataclass
class TraceReport:
    """单个节点的迹公式报告"""

    x: float
    U: List[np.ndarray]
    V: List[np.ndarray]
    F_residuals: List[float]
    H_residuals: List[float]
    reversed_F_residuals: List[float]
    q_from_U: float
    q_from_V: float
    edge_sum_residual: float
    zones_ok: bool
    zone_violation: float
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.F_residuals + self.H_residuals
                   + [self.q_from_U, self.q_from_V, self.edge_sum_residual])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'x': self.x,
            'F_residuals': self.F_residuals,
            'H_residuals': self.H_residuals,
            'reversed_F_residuals': self.reversed_F_residuals,
            'q_from_U': self.q_from_U,
            'q_from_V': self.q_from_V,
            'edge_sum_residual': self.edge_sum_residual,
            'zones_ok': self.zones_ok,
            'zone_violation': self.zone_violation,
            'U_spectra': [np.linalg.eigvals(U).real.tolist() for U in self.U],
            'V_spectra': [np.linalg.eigvals(V).real.tolist() for V in self.V],
        }


def _zone_violation(roots: List[np.ndarray], zones) -> float:
    worst = 0.0
    for Y, (low, high) in zip(roots, zones):
        eigs = np.linalg.eigvals(Y)
        for lam in eigs:
            worst = max(worst, low - lam.real, lam.real - high, abs(lam.imag))
    return float(worst)


def trace_formulas(s: FlowState, bs: BandStructure, es: EdgeSeries,
                   tol: Optional[float] = None) -> TraceReport:
    """
    分解 F = (zI - U_n)⋯(zI - U_1)、H = (zI - V_n)⋯(zI - V_0)，校验

    (-1)^k Σ_{j_1<…<j_k} U_{j_k}⋯U_{j_1} = Σ_{l≤k} c_{k-l} R̂_l   (1 ≤ k ≤ n)
    (-1)^k Σ_{j_1<…<j_k} V_{j_k}⋯V_{j_1} = Σ_{l≤k} c_{k-l} Ĥ_l   (1 ≤ k ≤ n+1)
    Q = (ΣE) I - 2ΣU_j，Q = -(ΣE) I + 2ΣV_k
    """
    tol = tol if tol is not None else TOLERANCE_CONFIG['trace']
    n, m = s.n, s.m
    F, _, _, H = s.pencils()
    U = factorize(F)
    V = factorize(H)
    series = series_from_state(s, es, n + 1)
    c = es.c
    size = max(1.0, float(np.max(np.abs(bs.edges))))
    eye = np.eye(m)

    def relative(value: float, k: int) -> float:
        return value / size ** k

    F_res, F_rev, H_res = [], [], []
    for k in range(1, n + 1):
        target = sum(c[k - l] * series.Rhat[l] for l in range(k + 1))
        sign = (-1) ** k
        F_res.append(relative(max_abs(sign * elementary_block_sums(U, k) - target), k))
        F_rev.append(relative(max_abs(sign * elementary_block_sums(U, k, reverse=True) - target), k))
    for k in range(1, n + 2):
        target = sum(c[k - l] * series.Hhat[l] for l in range(k + 1))
        H_res.append(relative(max_abs((-1) ** k * elementary_block_sums(V, k) - target), k))

    Q = potential(s)
    E = bs.edge_sum
    sum_U = sum(U)
    sum_V = sum(V)
    q_from_U = relative(max_abs(Q - (E * eye - 2 * sum_U)), 1)
    q_from_V = relative(max_abs(Q - (-E * eye + 2 * sum_V)), 1)
    edge_sum = relative(max_abs(sum_U + sum_V - E * eye), 1)

    F_zones = list(bs.interior_gaps)
    H_zones = [(-np.inf, bs.edges[0])] + list(bs.interior_gaps)
    violation = max(_zone_violation(U, F_zones), _zone_violation(V, H_zones))
    zones_ok = violation <= tol * size

    report = TraceReport(
        x=s.x, U=U, V=V, F_residuals=F_res, H_residuals=H_res, reversed_F_residuals=F_rev,
        q_from_U=q_from_U, q_from_V=q_from_V, edge_sum_residual=edge_sum,
        zones_ok=bool(zones_ok), zone_violation=violation,
    )
    logger.debug(f"x={s.x:g} 迹公式最大残差 {report.max_residual:.3e}，根区越界 {violation:.3e}")
    return report


def trace_check(traj: Trajectory, bs: BandStructure, es: EdgeSeries,
                tol: Optional[float] = None) -> Dict[str, Any]:
    """沿轨迹逐节点的迹公式检查"""
    tol = tol if tol is not None else TOLERANCE_CONFIG['trace']
    reports = [trace_formulas(s, bs, es, tol) for s in traj.states]
    value = max(r.max_residual for r in reports)
    reversed_value = max((max(r.reversed_F_residuals) for r in reports if r.reversed_F_residuals), default=0.0)
    zones_ok = all(r.zones_ok for r in reports)
    return {
        'value': value,
        'reversed_order_residual': reversed_value,
        'zones_ok': zones_ok,
        'zone_violation': max(r.zone_violation for r in reports),
        'first_node': reports[0].to_dict(),
        'passed': bool(value <= tol and zones_ok),
    }
