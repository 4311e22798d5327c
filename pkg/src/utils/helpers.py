"""
工具函数
"""

import json
import os
from typing import Any, Iterable

import numpy as np
from loguru import logger


def ensure_dir(directory: str) -> None:
    """确保目录存在"""
    if not os.path.exists(directory):
        os.makedirs(directory)


def _json_default(value: Any) -> Any:
    if isinstance(value, (complex, np.complexfloating)):
        return complex_to_pair(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return _json_default_array(value)
    raise TypeError(f"无法序列化的类型: {type(value).__name__}")


def _json_default_array(value: np.ndarray) -> list:
    if np.iscomplexobj(value):
        return [_json_default_array(v) if np.ndim(v) else complex_to_pair(v) for v in value]
    return value.tolist()


def save_json(data: Any, path: str) -> None:
    """以确定性格式保存 JSON（键排序，浮点数 repr 精确往返）"""
    ensure_dir(os.path.dirname(os.path.abspath(path)))
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')


def load_json(path: str) -> Any:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def complex_to_pair(value: complex) -> list:
    """复数序列化为 [re, im]"""
    value = complex(value)
    return [float(value.real), float(value.imag)]


def matrix_to_pairs(matrix: np.ndarray) -> list:
    """复矩阵序列化为 [[[re, im], ...], ...]"""
    arr = np.asarray(matrix, dtype=complex)
    return [[complex_to_pair(v) for v in row] for row in arr]


def pairs_to_matrix(pairs: Iterable) -> np.ndarray:
    """[[[re, im], ...], ...] 或实数嵌套列表转为复矩阵"""
    rows = []
    for row in pairs:
        rows.append([parse_complex(v) for v in row])
    return np.array(rows, dtype=complex)


def parse_complex(value: Any) -> complex:
    """解析 [re, im]、数字或 Python 复数字符串"""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"复数需要 [re, im] 两个分量: {value}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(' ', ''))
    return complex(value)


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    """Re A = (A + A*)/2，支持批量矩阵"""
    return 0.5 * (matrix + np.conj(np.swapaxes(matrix, -1, -2)))


def imaginary_part(matrix: np.ndarray) -> np.ndarray:
    """Im A = (A - A*)/(2i)，支持批量矩阵"""
    return (matrix - np.conj(np.swapaxes(matrix, -1, -2))) / 2j


def adjoint(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


def max_abs(matrix: np.ndarray) -> float:
    """最大元素模（空数组返回 0）"""
    arr = np.asarray(matrix)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def central_derivative(values: np.ndarray, dx: float, order: int = 1) -> np.ndarray:
    """
    沿第 0 轴的二阶精度中心差分导数（端点用二阶单侧格式）

    Args:
        values: 形如 (N, ...) 的节点值
        dx: 网格间距
        order: 求导阶数

    Returns:
        与 values 同形的导数
    """
    result = np.asarray(values)
    for _ in range(order):
        result = np.gradient(result, dx, axis=0, edge_order=2)
    return result


def format_residual(value: float) -> str:
    """格式化残差"""
    return f"{value:.3e}"


def log_check(name: str, value: float, tolerance: float, passed: bool) -> None:
    """记录单项检查结果"""
    mark = "通过" if passed else "未通过"
    level = "INFO" if passed else "WARNING"
    logger.log(level, f"检查 {name}: {format_residual(value)} (容差 {format_residual(tolerance)}) {mark}")
