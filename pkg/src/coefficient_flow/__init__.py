"""
系数组沿 x 方向的演化与动力学恒等式检查
"""

from src.coefficient_flow.flow_state import (
    FlowState,
    Trajectory,
    state_from_operator_data,
    potential,
    derivative,
)
from src.coefficient_flow.flow_checks import (
    NodeResiduals,
    state_drift,
    state_weyl,
    invariant_residuals,
    riccati_residual,
    reflectionless_check,
    lax_residual,
    zone_confinement_check,
    hermiticity_check,
    boundedness_check,
)
from src.coefficient_flow.integrator import RK4, CoefficientIntegrator, propagate

__all__ = [
    'FlowState', 'Trajectory', 'state_from_operator_data', 'potential', 'derivative',
    'NodeResiduals', 'state_drift', 'state_weyl', 'invariant_residuals', 'riccati_residual',
    'reflectionless_check', 'lax_residual', 'zone_confinement_check', 'hermiticity_check',
    'boundedness_check', 'RK4', 'CoefficientIntegrator', 'propagate',
]
