"""
KdV 展开系数 R̂_k, Ĝ_{p,k}, Ĥ_k 的三种计算途径与稳态 KdV 残差
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from loguru import logger

from config.settings import SERIES_CONFIG, TOLERANCE_CONFIG
from src.band_domain.edge_series import EdgeSeries
from src.coefficient_flow.flow_checks import NodeResiduals
from src.coefficient_flow.flow_state import FlowState, Trajectory
from src.pencil_algebra.matrix_pencil import MatrixPencil
from src.utils.errors import GridTooCoarse, SeriesError
from src.utils.helpers import central_derivative, max_abs


@dataclass
class InvariantSeries:
    """
    某一节点处的展开系数

    Rhat, Hhat: (K+1, m, m)，Rhat[0] = Hhat[0] = I
    Ghat1, Ghat2: (K+1, m, m)，Ghat[0] = 0；Ghat[l+1] = Σ_{k≤l} ĉ_{l-k} G_{p,k}
    """

    x: float
    K: int
    Rhat: np.ndarray
    Ghat1: np.ndarray
    Ghat2: np.ndarray
    Hhat: np.ndarray
    provenance: Dict[str, str] = field(default_factory=dict)


def _extend(values: np.ndarray, c: np.ndarray, start: int) -> None:
    """k ≥ start 时 X_k = -Σ_{l<k} c_{k-l} X_l（原地）"""
    for k in range(start, len(values)):
        values[k] = -sum(c[k - l] * values[l] for l in range(k))


def series_from_state(s: FlowState, es: EdgeSeries, K: Optional[int] = None) -> InvariantSeries:
    """
    由系数组计算展开系数

    l ≤ n 时 R̂_l = Σ_k ĉ_{l-k} F_k（Ĝ、Ĥ 同理），更高阶由 Σ_l c_{k-l} X_l = 0 递推。
    """
    n, m = s.n, s.m
    K = es.K if K is None else K
    if K > es.K:
        raise SeriesError(f"边界展开系数只计算到 {es.K} 阶，需要 {K} 阶")
    c, chat = es.c, es.chat
    zero = np.zeros((m, m), dtype=complex)

    Rhat = np.zeros((K + 1, m, m), dtype=complex)
    for l in range(min(K, n) + 1):
        Rhat[l] = sum(chat[l - k] * s.F[k] for k in range(l + 1))
    _extend(Rhat, c, n + 1)

    Hhat = np.zeros((K + 1, m, m), dtype=complex)
    for l in range(min(K, n + 1) + 1):
        Hhat[l] = sum(chat[l - k] * s.H[k] for k in range(l + 1))
    _extend(Hhat, c, n + 2)

    ghats = []
    for G in (s.G1, s.G2):
        Ghat = np.zeros((K + 1, m, m), dtype=complex)
        for l in range(1, min(K, n) + 1):
            Ghat[l] = sum((chat[l - 1 - k] * G[k] for k in range(l)), zero)
        _extend(Ghat, c, n + 1)
        ghats.append(Ghat)

    return InvariantSeries(
        x=s.x, K=K, Rhat=Rhat, Ghat1=ghats[0], Ghat2=ghats[1], Hhat=Hhat,
        provenance={'Rhat': 'pencil', 'Ghat': 'pencil', 'Hhat': 'pencil'},
    )


def _require_grid(count: int, minimum: int = 5) -> None:
    if count < minimum:
        raise GridTooCoarse(f"网格至少需要 {minimum} 个节点做差分，实际 {count} 个")


def explicit_low_order(Q_grid: np.ndarray, dx: float, x: Optional[np.ndarray] = None) -> List[InvariantSeries]:
    """
    显式低阶微分多项式

    R̂_1 = Q/2, R̂_2 = -Q''/8 + 3Q²/8, Ĥ_1 = -Q/2, Ĥ_2 = Q''/8 - Q²/8,
    Ĝ_{p,1} = -Q'/4, Ĝ_{1,2} = Q'''/16 - (Q²)'/8 - Q'Q/8, Ĝ_{2,2} = Q'''/16 - (Q²)'/8 - QQ'/8
    """
    Q = np.asarray(Q_grid, dtype=complex)
    N, m = Q.shape[0], Q.shape[1]
    _require_grid(N)
    x = np.arange(N) * dx if x is None else np.asarray(x)
    d1 = central_derivative(Q, dx)
    d2 = central_derivative(Q, dx, order=2)
    d3 = central_derivative(Q, dx, order=3)
    QQ = Q @ Q
    dQQ = central_derivative(QQ, dx)
    eye = np.eye(m, dtype=complex)

    result = []
    for i in range(N):
        Rhat = np.array([eye, Q[i] / 2, -d2[i] / 8 + 3 * QQ[i] / 8])
        Hhat = np.array([eye, -Q[i] / 2, d2[i] / 8 - QQ[i] / 8])
        Ghat1 = np.array([0 * eye, -d1[i] / 4, d3[i] / 16 - dQQ[i] / 8 - d1[i] @ Q[i] / 8])
        Ghat2 = np.array([0 * eye, -d1[i] / 4, d3[i] / 16 - dQQ[i] / 8 - Q[i] @ d1[i] / 8])
        result.append(InvariantSeries(
            x=float(x[i]), K=2, Rhat=Rhat, Ghat1=Ghat1, Ghat2=Ghat2, Hhat=Hhat,
            provenance={'Rhat': 'explicit', 'Ghat': 'explicit', 'Hhat': 'explicit'},
        ))
    return result


def m_expansion_recursion(Q_grid: np.ndarray, dx: float, K: int = 3) -> Dict[int, np.ndarray]:
    """
    M_± 的大 z 展开系数

    M_{±,1} = ∓iQ/2, M_{±,2} = Q'/4, M_{±,k+1} = ±(i/2)(M_{±,k}' + Σ_{l=1}^{k-1} M_{±,l} M_{±,k-l})

    Returns:
        {+1: (N, K+1, m, m), -1: (N, K+1, m, m)}，下标 0 位置不用
    """
    if K < 2 or K > SERIES_CONFIG['max_m_expansion_order']:
        raise SeriesError(f"展开阶数需在 2..{SERIES_CONFIG['max_m_expansion_order']} 之间: {K}")
    Q = np.asarray(Q_grid, dtype=complex)
    N, m = Q.shape[0], Q.shape[1]
    _require_grid(N, max(5, 2 * K - 1))
    result = {}
    for side in (1, -1):
        M = np.zeros((N, K + 1, m, m), dtype=complex)
        M[:, 1] = -side * 0.5j * Q
        M[:, 2] = central_derivative(Q, dx) / 4
        for k in range(2, K):
            quadratic = sum((M[:, l] @ M[:, k - l] for l in range(1, k)), np.zeros_like(Q))
            M[:, k + 1] = side * 0.5j * (central_derivative(M[:, k], dx) + quadratic)
        result[side] = M
    return result


def invert_m_expansion(M_minus: np.ndarray, M_plus: np.ndarray, order: int = 2) -> np.ndarray:
    """
    由 M_± 的展开系数求 (M_- - M_+)^{-1} = (i/2) z^{-1/2} Σ_j R̂_j z^{-j} 中的 R̂_0..R̂_order

    令 w = z^{-1/2}，M_- - M_+ = -2i z^{1/2}(I + Σ_q A_q w^q)，A_q = (M_{-,q-1} - M_{+,q-1})/(-2i)；
    逆级数 T_p = -Σ_{q=1}^p A_q T_{p-q}，R̂_j = T_{2j}。

    Args:
        M_minus, M_plus: (K+1, m, m)，K ≥ 2·order - 1
    """
    K = M_minus.shape[0] - 1
    if K < 2 * order - 1:
        raise SeriesError(f"计算 R̂_{order} 需要展开到 {2 * order - 1} 阶，实际 {K} 阶")
    m = M_minus.shape[1]
    top = 2 * order
    A = np.zeros((top + 1, m, m), dtype=complex)
    for q in range(2, top + 1):
        A[q] = (M_minus[q - 1] - M_plus[q - 1]) / (-2j)
    T = np.zeros_like(A)
    T[0] = np.eye(m)
    for p in range(1, top + 1):
        T[p] = -sum(A[q] @ T[p - q] for q in range(1, p + 1))
    return T[0::2]


def three_route_check(traj: Trajectory, es: EdgeSeries, tol: Optional[float] = None) -> Dict[str, Any]:
    """R̂_1、R̂_2 在束途径、显式途径与 M 展开途径之间的逐节点一致性"""
    tol = tol if tol is not None else TOLERANCE_CONFIG['series_routes']
    _require_grid(len(traj), 7)
    dx = traj.dx
    Q = traj.potentials()
    pencil = [series_from_state(s, es, min(es.K, 2)) for s in traj.states]
    explicit = explicit_low_order(Q, dx, traj.grid)
    expansion = m_expansion_recursion(Q, dx, 3)

    worst = {'pencil_vs_explicit': 0.0, 'pencil_vs_expansion': 0.0, 'explicit_vs_expansion': 0.0}
    per_node = np.zeros(len(traj))
    # 三阶差分只在距端点至少 3 个节点处保持二阶精度
    for i in range(3, len(traj) - 3):
        routes = {
            'pencil': pencil[i].Rhat[1:3],
            'explicit': explicit[i].Rhat[1:3],
            'expansion': invert_m_expansion(expansion[-1][i], expansion[1][i], 2)[1:3],
        }
        for key in worst:
            a, b = key.split('_vs_')
            gap = max_abs(routes[a] - routes[b])
            worst[key] = max(worst[key], gap)
            per_node[i] = max(per_node[i], gap)
    value = max(worst.values())
    return {'pairs': worst, 'value': value, 'per_node': per_node.tolist(), 'passed': bool(value <= tol)}


def skdv_residual(traj: Trajectory, es: EdgeSeries) -> NodeResiduals:
    """
    s-KdV_n(Q) = -2 Σ_{l=0}^n c_{n-l} R̂_{l+1}'

    l ≤ n 时 R̂_l' 为束途径值的中心差分；R̂_{n+1}' 由
    2R̂_{l+1}' = Ĝ_{2,l}'' + 2R̂_l' Q + R̂_l Q' + Ĝ_{2,l} Q - Q Ĝ_{2,l}（l = n）给出。
    """
    _require_grid(len(traj))
    n = traj.n
    if es.K < n + 1:
        raise SeriesError(f"边界展开系数至少需要 {n + 1} 阶")
    dx = traj.dx
    Q = traj.potentials()
    dQ = central_derivative(Q, dx)
    series = [series_from_state(s, es, n + 1) for s in traj.states]
    Rhat = np.array([sr.Rhat for sr in series])
    Ghat2 = np.array([sr.Ghat2 for sr in series])

    dR = central_derivative(Rhat[:, :n + 1], dx)
    d2G = central_derivative(Ghat2[:, n], dx, order=2)
    G = Ghat2[:, n]
    dR_top = 0.5 * (d2G + 2 * dR[:, n] @ Q + Rhat[:, n] @ dQ + G @ Q - Q @ G)

    c = es.c
    total = c[0] * dR_top
    for l in range(n):
        total = total + c[n - l] * dR[:, l + 1]
    residual = -2.0 * total
    values = np.max(np.abs(residual), axis=(1, 2))
    return NodeResiduals('skdv', traj.grid[2:-2].copy(), values[2:-2])


def nonabelian_probe(F: Union[MatrixPencil, Callable[[complex], np.ndarray]], z1: complex, z2: complex) -> float:
    """‖F(z_1)F(z_2) - F(z_2)F(z_1)‖"""
    A, B = np.asarray(F(z1)), np.asarray(F(z2))
    value = float(np.linalg.norm(A @ B - B @ A, 2))
    logger.debug(f"对易子范数 ({z1}, {z2}): {value:.3e}")
    return value
