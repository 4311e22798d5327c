"""
KdV 不变量模块：展开系数、迹公式与稳态 KdV 方程
"""

from src.kdv_invariants.series import (
    InvariantSeries,
    series_from_state,
    explicit_low_order,
    m_expansion_recursion,
    invert_m_expansion,
    three_route_check,
    skdv_residual,
    nonabelian_probe,
)
from src.kdv_invariants.trace_formulas import TraceReport, trace_formulas, trace_check

__all__ = [
    'InvariantSeries', 'series_from_state', 'explicit_low_order', 'm_expansion_recursion',
    'invert_m_expansion', 'three_route_check', 'skdv_residual', 'nonabelian_probe',
    'TraceReport', 'trace_formulas', 'trace_check',
]
