"""
算子数据构造模块：四元组 (F, G_1, G_2, H) 与 Weyl–Titchmarsh 矩阵
"""

from src.operator_builder.quadruple import OperatorData, build_quadruple, verify_quadruple, pencil_identity_report
from src.operator_builder.weyl_evaluator import (
    DensityResult,
    EvaluationCache,
    WeylEvaluator,
    weyl_half_line,
    weyl_full,
    spectral_density,
    stieltjes_check,
    weyl_herglotz_check,
    weyl_asymptotics_check,
    herglotz_representation_check,
    density_schur_check,
)

__all__ = [
    'OperatorData', 'build_quadruple', 'verify_quadruple', 'pencil_identity_report',
    'DensityResult', 'EvaluationCache', 'WeylEvaluator',
    'weyl_half_line', 'weyl_full', 'spectral_density', 'stieltjes_check',
    'weyl_herglotz_check', 'weyl_asymptotics_check', 'herglotz_representation_check',
    'density_schur_check',
]
