"""
有限带矩阵势构造平台配置文件
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# 加载.env文件
load_dotenv()

# 项目根目录
BASE_DIR = Path(__file__).resolve().parent.parent

# 数值计算配置
NUMERIC_CONFIG = {
    'cluster_rel_tol': 1e-7,          # 行列式根聚类相对容差（乘以边界跨度）
    'eig_condition_max': 1e8,         # 特征基条件数上限
    'hermitian_tol': 1e-10,           # 自伴性判定容差
    'rank_rel_tol': 1e-8,             # 数值秩相对容差
    'psd_tol': 1e-10,                 # 半正定判定容差
    'imag_root_tol': 1e-9,            # 根的虚部容差
    'zone_imag_tol': 1e-6,            # 根区采样中判定非实根的虚部容差（乘以根的尺度）
    'node_exclusion': 1e-3,           # 插值节点与 μ_k 的最小相对距离
    'extra_check_nodes': 6,           # 插值校验节点个数
    'herglotz_grid_size': 5,          # Herglotz 采样网格边长
    'herglotz_radii': (0.1, 10.0),    # 采样半径范围（乘以边界跨度）
    'root_zone_probes': 16,           # 根区采样向量个数
    'singular_point_tol': 1e-12,      # 奇点判定相对容差
    'min_convergence_order': 1.5,     # 差分类检查超出容差时要求的最低观测收敛阶
}

# 各项检查的默认容差（乘以相应尺度）
TOLERANCE_CONFIG = {
    'herglotz': 1e-10,
    'quadruple': 1e-10,
    'dirichlet': 1e-8,
    'weyl_routes': 1e-9,
    'weyl_herglotz': 1e-10,
    'density': 1e-10,
    'schur': 1e-9,
    'stieltjes': 1e-4,
    'representation': 1e-6,
    'asymptotics': 1e-2,
    'drift_abort': 1e-6,
    'invariants': 1e-8,
    'riccati': 1e-3,
    'reflectionless': 1e-3,
    'lax': 1e-3,
    'trace': 1e-8,
    'skdv': 1e-5,
    'series_routes': 1e-3,
    'zone_confinement': 1e-8,
    'hermiticity': 1e-8,
    'boundedness': 1e-8,
}

# 坐标方向演化配置
FLOW_CONFIG = {
    'method': os.getenv('FINITE_BAND_FLOW_METHOD', 'rk4'),   # rk4 或 adaptive
    'relative_step': 1e-3,            # 默认步长 = relative_step * 边界跨度
    'adaptive_rtol': 1e-11,
    'adaptive_atol': 1e-13,
    'default_grid_count': 101,
    'default_grid_length': 1.0,
}

# KdV 级数配置
SERIES_CONFIG = {
    'multinomial_max_terms': 20000,   # 多项式展开组合数上限，超过则改用级数乘法
    'max_m_expansion_order': 4,
}

# 导出配置
EXPORT_CONFIG = {
    'output_dir': Path(os.getenv('FINITE_BAND_OUTPUT_DIR', str(BASE_DIR / 'output'))),
    'float_format': '%.17g',
    'schema_version': 1,
    'potential_file': 'potential.csv',
    'density_file': 'density.csv',
    'residuals_file': 'residuals.csv',
    'report_file': 'report.json',
    'trajectory_file': 'trajectory.json',
    'timing_file': 'timing.json',
}

# 运行默认值
RUN_CONFIG = {
    'rng_seed': int(os.getenv('FINITE_BAND_RNG_SEED', '0')),
    'boundary_eps': 1e-6,
    'z_probes': [1j, 2j, 3 + 1j],
}

# 日志配置
LOGGING_CONFIG = {
    'level': os.getenv('FINITE_BAND_LOG_LEVEL', 'INFO'),
    'format': '{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} | {message}',
    'rotation': '1 day',
    'retention': '7 days',
    'log_dir': BASE_DIR / 'logs',
}
