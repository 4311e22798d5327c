"""
系数组沿 x 方向的积分
"""

from typing import Callable, List, Optional, Sequence

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp

from config.settings import FLOW_CONFIG, TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure
from src.coefficient_flow.flow_state import FlowState, Trajectory, derivative
from src.coefficient_flow.flow_checks import state_drift
from src.utils.errors import DriftExceeded, FlowError


class RK4:
    """
    经典四阶 Runge-Kutta 定步长积分器

    U 为状态向量，rhs_func(U) 返回导数向量。
    """

    def __init__(self, U: np.ndarray, rhs_func: Callable[[np.ndarray], np.ndarray]):
        self.U = np.array(U, dtype=complex)
        self.rhs_func = rhs_func
        self._allocate_arrays()

    def step(self, dt: float) -> np.ndarray:
        """
        前进一步

        Args:
            dt: 步长（可为负）
        """
        self.U0[...] = self.U
        self.U1[...] = 0.0

        ki = [dt / 6, dt / 3, dt / 3]
        hi = [dt / 2, dt / 2, dt]

        for h, k in zip(hi, ki):
            rhs = self.rhs_func(self.U)
            self.U1 += k * rhs
            self.U[...] = self.U0 + h * rhs

        rhs = self.rhs_func(self.U)
        self.U[...] = self.U0 + self.U1 + (dt / 6) * rhs
        return self.U

    def _allocate_arrays(self):
        self.U0 = np.copy(self.U)
        self.U1 = np.zeros_like(self.U)


def _packed_rhs(n: int, m: int) -> Callable[[np.ndarray], np.ndarray]:
    def rhs(y: np.ndarray) -> np.ndarray:
        return derivative(FlowState.unpack(0.0, y, n, m)).pack()
    return rhs


def _check_grid(s0: FlowState, x_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1:
        raise FlowError("网格至少需要一个节点")
    if grid[0] != s0.x:
        raise FlowError(f"网格起点 {grid[0]} 与初始状态位置 {s0.x} 不符")
    steps = np.diff(grid)
    if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
        raise FlowError("网格必须严格单调")
    return grid


class CoefficientIntegrator:
    """
    系数组积分器

    每个接受的步之后对 F、H 作 Hermite 化并令 G_2 = G_1*；
    在每个网格节点记录不变量漂移，超过阈值时中止并附带已完成的部分轨迹。
    """

    def __init__(self, bs: BandStructure, h: Optional[float] = None, method: Optional[str] = None,
                 drift_abort: Optional[float] = None):
        self.bs = bs
        self.h = float(h) if h is not None else FLOW_CONFIG['relative_step'] * bs.span
        self.method = method or FLOW_CONFIG['method']
        self.drift_abort = drift_abort if drift_abort is not None else TOLERANCE_CONFIG['drift_abort']
        if self.h <= 0:
            raise FlowError(f"步长必须为正: {self.h}")
        if self.method not in ('rk4', 'adaptive'):
            raise FlowError(f"未知的积分方法: {self.method}")
        logger.info(f"初始化系数积分器: 方法={self.method}, 步长={self.h:g}")

    def propagate(self, s0: FlowState, x_grid: Sequence[float]) -> Trajectory:
        grid = _check_grid(s0, x_grid)
        s0 = s0.symmetrized()
        states: List[FlowState] = [s0]
        drift: List[float] = [state_drift(s0, self.bs)]

        def accept(state: FlowState) -> None:
            value = state_drift(state, self.bs)
            states.append(state)
            drift.append(value)
            if value > self.drift_abort:
                partial = Trajectory(grid[:len(states)], list(states), self.h, list(drift), self.method)
                logger.error(f"不变量漂移 {value:.3e} 超过阈值 {self.drift_abort:.1e}，x={state.x}")
                raise DriftExceeded(f"x={state.x} 处不变量漂移 {value:.3e} 超过阈值", partial=partial, x=state.x)

        if self.method == 'rk4':
            self._run_rk4(s0, grid, accept)
        else:
            self._run_adaptive(s0, grid, accept)

        traj = Trajectory(grid, states, self.h, drift, self.method)
        logger.info(f"积分完成: {len(grid)} 个节点, 区间 [{grid[0]:g}, {grid[-1]:g}], 最大漂移 {max(drift):.3e}")
        return traj

    def _run_rk4(self, s0: FlowState, grid: np.ndarray, accept) -> None:
        n, m = s0.n, s0.m
        stepper = RK4(s0.pack(), _packed_rhs(n, m))
        for left, right in zip(grid[:-1], grid[1:]):
            count = max(1, int(np.ceil(abs(right - left) / self.h - 1e-9)))
            dt = (right - left) / count
            for _ in range(count):
                stepper.step(dt)
                # 每步后恢复对称结构
                stepper.U[...] = FlowState.unpack(0.0, stepper.U, n, m).symmetrized().pack()
            accept(FlowState.unpack(right, stepper.U, n, m))

    def _run_adaptive(self, s0: FlowState, grid: np.ndarray, accept) -> None:
        if len(grid) < 2:
            return
        n, m = s0.n, s0.m
        rhs = _packed_rhs(n, m)
        sol = solve_ivp(
            lambda x, y: rhs(y),
            (grid[0], grid[-1]),
            s0.pack(),
            method='DOP853',
            t_eval=grid,
            rtol=FLOW_CONFIG['adaptive_rtol'],
            atol=FLOW_CONFIG['adaptive_atol'],
        )
        if not sol.success:
            raise FlowError(f"自适应积分失败: {sol.message}")
        for x, y in zip(sol.t[1:], sol.y.T[1:]):
            accept(FlowState.unpack(x, y, n, m).symmetrized())


def propagate(s0: FlowState, x_grid: Sequence[float], bs: BandStructure, h: Optional[float] = None,
              method: Optional[str] = None, drift_abort: Optional[float] = None) -> Trajectory:
    """
    从 s0 出发沿网格积分

    Args:
        s0: 初始状态，x_grid[0] 必须等于 s0.x
        x_grid: 严格单调的网格，可以递减
        bs: 能带结构（用于漂移计算）
        h: 步长，缺省为 1e-3 × 边界跨度
        method: 'rk4' 或 'adaptive'
        drift_abort: 漂移中止阈值

    Returns:
        Trajectory
    """
    return CoefficientIntegrator(bs, h=h, method=method, drift_abort=drift_abort).propagate(s0, x_grid)
