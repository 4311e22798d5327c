"""
异常类型定义
"""

from typing import Any, Optional


class FiniteBandError(Exception):
    """平台所有异常的基类"""


class NumericalAbort(FiniteBandError):
    """数值计算无法继续（命令行退出码 3）"""


# ---------------- 能带结构 ----------------

class BandStructureError(FiniteBandError):
    """能带边界数据错误"""


class NonMonotoneEdges(BandStructureError):
    """边界点不严格递增"""


class EvenEdgeCount(BandStructureError):
    """边界点个数不是不小于3的奇数"""


class OnBandPoint(BandStructureError):
    """严格模式下在能带内部的实轴上取值"""


# ---------------- 矩阵束 ----------------

class PencilError(FiniteBandError):
    """矩阵束运算错误"""


class DimensionMismatch(PencilError):
    pass


class SingularLeadingCoefficient(PencilError):
    pass


class NonSelfAdjoint(PencilError):
    pass


class IndefiniteLeading(PencilError):
    pass


class WrongSeparatorCount(PencilError):
    pass


class WrongEigenCountInZone(PencilError):
    pass


class IllConditionedEigenbasis(PencilError, NumericalAbort):
    pass


class NonzeroRemainder(PencilError, NumericalAbort):
    pass


# ---------------- Dirichlet 数据 ----------------

class DirichletError(FiniteBandError):
    """Dirichlet 数据提取错误"""


class PlacementOutsideGap(DirichletError):
    pass


class DefectiveRoot(DirichletError):
    pass


class NegativeGamma(DirichletError):
    pass


class RootAtBandEdge(UserWarning):
    """行列式根落在能带边界上，对应留数置零"""


# ---------------- 算子数据 ----------------

class OperatorError(FiniteBandError):
    """算子构造或 Weyl 矩阵求值错误"""


class ResidueNotCancelled(OperatorError):
    pass


class AtSingularPoint(OperatorError):
    pass


class SingularN(OperatorError, NumericalAbort):
    pass


class RouteDisagreement(OperatorError, NumericalAbort):
    """两条独立计算路径结果不一致"""


# ---------------- 演化与级数 ----------------

class FlowError(FiniteBandError):
    """坐标方向演化错误"""


class DriftExceeded(FlowError, NumericalAbort):
    """不变量漂移超过阈值，积分中止"""

    def __init__(self, message: str, partial: Any = None, x: Optional[float] = None):
        super().__init__(message)
        self.partial = partial
        self.x = x


class SeriesError(FiniteBandError):
    """KdV 级数计算错误"""


class GridTooCoarse(SeriesError):
    pass


# ---------------- 配置与输出 ----------------

class ConfigError(FiniteBandError):
    """运行配置错误（命令行退出码 2）"""


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"行 {line}")
        if field is not None:
            location.append(f"字段 {field}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.line = line
        self.field = field


class ConfigValidationError(ConfigError):
    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class ArtifactIoError(FiniteBandError):
    pass


class PipelineStageError(FiniteBandError):
    """带阶段名称的流水线错误"""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
