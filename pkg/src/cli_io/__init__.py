"""
运行配置、流水线编排与产物导出模块
"""

from src.cli_io.run_config import (
    CHECK_NAMES,
    RunConfig,
    build_config,
    default_lambda_probes,
    load_config,
    resolve_checks,
)
from src.cli_io.pipeline import Pipeline, PipelineResult, RunReport, run_pipeline
from src.cli_io.exporter import (
    density_frame,
    dump_trajectory,
    export,
    load_trajectory,
    potential_frame,
    residual_frame,
    trajectory_from_dict,
    trajectory_to_dict,
)

__all__ = [
    'CHECK_NAMES', 'RunConfig', 'build_config', 'default_lambda_probes', 'load_config', 'resolve_checks',
    'Pipeline', 'PipelineResult', 'RunReport', 'run_pipeline',
    'density_frame', 'dump_trajectory', 'export', 'load_trajectory', 'potential_frame', 'residual_frame',
    'trajectory_from_dict', 'trajectory_to_dict',
]
