"""
边界点展开系数 c_k(E) 与 ĉ_k(E)

ĉ_k 为 ∏_l (1 - E_l η)^{-1/2} 的幂级数系数，c_k 为 ∏_l (1 - E_l η)^{1/2} 的幂级数系数，
两者互为卷积逆。
"""

from dataclasses import dataclass
from math import comb
from typing import Iterator, Tuple

import numpy as np
from loguru import logger

from config.settings import SERIES_CONFIG
from src.band_domain.band_structure import BandStructure


@dataclass(frozen=True)
class EdgeSeries:
    """c_0..c_K 与 ĉ_0..ĉ_K"""

    K: int
    c: np.ndarray
    chat: np.ndarray

    def convolution_residual(self) -> float:
        """max_k |Σ_l ĉ_{k-l} c_l - δ_{k0}|"""
        worst = 0.0
        for k in range(self.K + 1):
            total = sum(self.chat[k - l] * self.c[l] for l in range(k + 1))
            target = 1.0 if k == 0 else 0.0
            worst = max(worst, abs(total - target))
        return float(worst)


def _inverse_sqrt_coefficient(j: int) -> float:
    """(1 - η)^{-1/2} 的第 j 个系数 (2j)!/(4^j (j!)^2)"""
    return comb(2 * j, j) / 4.0 ** j


def _sqrt_coefficient(j: int) -> float:
    """(1 - η)^{1/2} 的第 j 个系数 -(2j)!/(4^j (j!)^2 (2j-1))"""
    return -_inverse_sqrt_coefficient(j) / (2 * j - 1)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """total 拆分为 parts 个非负整数之和的全部有序方式"""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial_series(edges: Tuple[float, ...], K: int, coefficient) -> np.ndarray:
    values = np.zeros(K + 1)
    for k in range(K + 1):
        total = 0.0
        for js in _compositions(k, len(edges)):
            term = 1.0
            for e, j in zip(edges, js):
                if j:
                    term *= coefficient(j) * e ** j
            total += term
        values[k] = total
    return values


def _product_series(edges: Tuple[float, ...], K: int, coefficient) -> np.ndarray:
    """逐个边界点做截断幂级数乘法"""
    result = np.zeros(K + 1)
    result[0] = 1.0
    for e in edges:
        factor = np.array([coefficient(j) * e ** j for j in range(K + 1)])
        result = np.convolve(result, factor)[:K + 1]
    return result


def edge_series(bs: BandStructure, K: int, method: str = 'auto') -> EdgeSeries:
    """
    计算展开系数

    Args:
        bs: 能带结构
        K: 最高阶数
        method: 'multinomial'（闭式多项求和）、'product'（级数乘法）或 'auto'

    Returns:
        EdgeSeries
    """
    if K < 0:
        raise ValueError(f"K 必须非负: {K}")
    if method == 'auto':
        terms = comb(K + 2 * bs.n, 2 * bs.n)
        method = 'multinomial' if terms <= SERIES_CONFIG['multinomial_max_terms'] else 'product'
    if method == 'multinomial':
        chat = _multinomial_series(bs.edges, K, _inverse_sqrt_coefficient)
        c = _multinomial_series(bs.edges, K, _sqrt_coefficient)
    elif method == 'product':
        chat = _product_series(bs.edges, K, _inverse_sqrt_coefficient)
        c = _product_series(bs.edges, K, _sqrt_coefficient)
    else:
        raise ValueError(f"未知的计算方法: {method}")

    series = EdgeSeries(K=K, c=c, chat=chat)
    logger.debug(f"边界展开系数 ({method}): ĉ={chat[:3]}, c={c[:3]}")
    return series
