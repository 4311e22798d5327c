"""
系数状态与轨迹
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from src.operator_builder.quadruple import OperatorData
from src.pencil_algebra.matrix_pencil import MatrixPencil
from src.utils.errors import FlowError
from src.utils.helpers import adjoint, hermitian_part, max_abs


@dataclass(frozen=True, eq=False)
class FlowState:
    """
    x 处的系数组

    F: (n+1, m, m)，F[l] 为 z^{n-l} 的系数，F[0] = I
    G1, G2: (n, m, m)，G[l] 为 z^{n-1-l} 的系数
    H: (n+2, m, m)，H[l] 为 z^{n+1-l} 的系数，H[0] = I
    """

    x: float
    F: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    H: np.ndarray

    @property
    def n(self) -> int:
        return self.F.shape[0] - 1

    @property
    def m(self) -> int:
        return self.F.shape[1]

    def pencils(self) -> Tuple[MatrixPencil, MatrixPencil, MatrixPencil, MatrixPencil]:
        """(F, G_1, G_2, H) 作为矩阵束"""
        return (
            MatrixPencil.from_descending(self.F),
            MatrixPencil.from_descending(self.G1),
            MatrixPencil.from_descending(self.G2),
            MatrixPencil.from_descending(self.H),
        )

    def evaluate(self, z: complex) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return tuple(p(z) for p in self.pencils())

    def coefficient_scale(self) -> float:
        return max(1.0, max_abs(self.F), max_abs(self.G1), max_abs(self.H))

    def pack(self) -> np.ndarray:
        """展开为复向量（供 ODE 求解器使用）"""
        return np.concatenate([self.F.ravel(), self.G1.ravel(), self.G2.ravel(), self.H.ravel()])

    @classmethod
    def unpack(cls, x: float, y: np.ndarray, n: int, m: int) -> 'FlowState':
        sizes = [(n + 1) * m * m, n * m * m, n * m * m, (n + 2) * m * m]
        offsets = np.cumsum([0] + sizes)
        parts = [y[offsets[i]:offsets[i + 1]] for i in range(4)]
        return cls(
            x=float(x),
            F=parts[0].reshape(n + 1, m, m).copy(),
            G1=parts[1].reshape(n, m, m).copy(),
            G2=parts[2].reshape(n, m, m).copy(),
            H=parts[3].reshape(n + 2, m, m).copy(),
        )

    def symmetrized(self) -> 'FlowState':
        """F、H 取 Hermite 部分，G_1 与 G_2* 取平均后令 G_2 = G_1*"""
        G1 = 0.5 * (self.G1 + adjoint(self.G2))
        return replace(self, F=hermitian_part(self.F), G1=G1, G2=adjoint(G1), H=hermitian_part(self.H))


@dataclass
class Trajectory:
    """按网格排列的状态序列"""

    grid: np.ndarray
    states: List[FlowState]
    h: float
    drift: List[float] = field(default_factory=list)
    method: str = 'rk4'

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if len(self.grid) != len(self.states):
            raise FlowError(f"网格节点数 {len(self.grid)} 与状态数 {len(self.states)} 不符")
        steps = np.diff(self.grid)
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise FlowError("轨迹网格必须严格单调")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def m(self) -> int:
        return self.states[0].m

    @property
    def n(self) -> int:
        return self.states[0].n

    @property
    def dx(self) -> float:
        """等距网格的步长（非等距时抛出 FlowError）"""
        steps = np.diff(self.grid)
        if not len(steps):
            raise FlowError("轨迹只有一个节点")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise FlowError("轨迹网格不是等距的")
        return float(steps[0])

    def potentials(self) -> np.ndarray:
        return np.array([potential(s) for s in self.states])

    def slice(self, start: int, stop: Optional[int] = None, step: int = 1) -> 'Trajectory':
        drift = self.drift[start:stop:step] if self.drift else []
        return Trajectory(self.grid[start:stop:step], self.states[start:stop:step], self.h, drift, self.method)

    def coarsened(self) -> 'Trajectory':
        """隔点抽取，步长加倍"""
        return self.slice(0, None, 2)

    @classmethod
    def join(cls, backward: 'Trajectory', forward: 'Trajectory') -> 'Trajectory':
        """把从 x_0 向左与向右的两条轨迹拼接为一条递增轨迹"""
        if backward.grid[0] != forward.grid[0]:
            raise FlowError("两条轨迹的起点不同")
        grid = np.concatenate([backward.grid[:0:-1], forward.grid])
        states = backward.states[:0:-1] + forward.states
        drift = (backward.drift[:0:-1] + forward.drift) if backward.drift and forward.drift else []
        return cls(grid, states, forward.h, drift, forward.method)


def state_from_operator_data(od: OperatorData, x0: float = 0.0) -> FlowState:
    """把四元组的系数复制为 x_0 处的状态"""
    F = od.F.descending()
    H = od.H.descending()
    eye = np.eye(od.m)
    if max_abs(F[0] - eye) > 1e-12 or max_abs(H[0] - eye) > 1e-12:
        raise FlowError("F 与 H 的首项系数必须为单位矩阵")
    G1 = np.zeros((od.n, od.m, od.m), dtype=complex)
    G2 = np.zeros_like(G1)
    g1, g2 = od.G1.descending(), od.G2.descending()
    G1[od.n - len(g1):] = g1
    G2[od.n - len(g2):] = g2
    return FlowState(x=float(x0), F=F, G1=G1, G2=G2, H=H)


def potential(s: FlowState) -> np.ndarray:
    """Q = F_1 - H_1"""
    return s.F[1] - s.H[1]


def derivative(s: FlowState) -> FlowState:
    """
    自治一阶系统的右端

    F_l' = -(G_{1,l-1} + G_{2,l-1})
    G_{1,l}' = -Q F_{l+1} + F_{l+2} - H_{l+2}
    G_{2,l}' = -F_{l+1} Q + F_{l+2} - H_{l+2}
    H_l' = G_{1,l-1} + G_{2,l-1} - G_{1,l-2} Q - Q G_{2,l-2}
    约定 F_{n+1} = 0，G_{p,-1} = G_{p,n} = 0。
    """
    n, m = s.n, s.m
    Q = potential(s)
    zero = np.zeros((m, m), dtype=complex)

    def Fc(l):
        return s.F[l] if 0 <= l <= n else zero

    def G1c(l):
        return s.G1[l] if 0 <= l < n else zero

    def G2c(l):
        return s.G2[l] if 0 <= l < n else zero

    def Hc(l):
        return s.H[l] if 0 <= l <= n + 1 else zero

    dF = np.array([-(G1c(l - 1) + G2c(l - 1)) for l in range(n + 1)])
    dG1 = np.array([-Q @ Fc(l + 1) + Fc(l + 2) - Hc(l + 2) for l in range(n)])
    dG2 = np.array([-Fc(l + 1) @ Q + Fc(l + 2) - Hc(l + 2) for l in range(n)])
    dH = np.array([
        G1c(l - 1) + G2c(l - 1) - G1c(l - 2) @ Q - Q @ G2c(l - 2) for l in range(n + 2)
    ])
    return FlowState(x=s.x, F=dF, G1=dG1, G2=dG2, H=dH)
