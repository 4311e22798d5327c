"""
产物导出：势函数 CSV、谱密度 CSV、逐节点残差 CSV、报告与轨迹 JSON
"""

from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from config.settings import EXPORT_CONFIG
from src.band_domain.band_structure import BandStructure, new_band_structure
from src.coefficient_flow.flow_checks import NodeResiduals
from src.coefficient_flow.flow_state import FlowState, Trajectory
from src.operator_builder.weyl_evaluator import DensityResult
from src.utils.errors import ArtifactIoError
from src.utils.helpers import ensure_dir, load_json, matrix_to_pairs, pairs_to_matrix, save_json

if TYPE_CHECKING:
    from src.cli_io.pipeline import PipelineResult


def _entry_columns(prefix: str, size: int) -> List[str]:
    columns = []
    for i in range(1, size + 1):
        for j in range(1, size + 1):
            columns.extend([f're_{prefix}_{i}{j}', f'im_{prefix}_{i}{j}'])
    return columns


def _flatten(matrix: np.ndarray) -> List[float]:
    values = []
    for v in np.asarray(matrix, dtype=complex).ravel():
        values.extend([float(v.real), float(v.imag)])
    return values


def potential_frame(traj: Trajectory) -> pd.DataFrame:
    """每个网格节点一行：x, re_Q_11, im_Q_11, ..."""
    Q = traj.potentials()
    rows = [[float(x)] + _flatten(q) for x, q in zip(traj.grid, Q)]
    return pd.DataFrame(rows, columns=['x'] + _entry_columns('Q', traj.m))


def density_frame(density: Sequence[DensityResult]) -> pd.DataFrame:
    """每个 λ 探测点一行：lam, outside_bands, 2m×2m 矩阵各元素"""
    if not density:
        return pd.DataFrame(columns=['lam', 'outside_bands'])
    size = density[0].matrix.shape[0]
    rows = [[float(d.lam), int(d.outside_bands)] + _flatten(d.matrix) for d in density]
    return pd.DataFrame(rows, columns=['lam', 'outside_bands'] + _entry_columns('D', size))


def residual_frame(residuals: Sequence[NodeResiduals]) -> pd.DataFrame:
    """长表：check, x, value，每个检查每个节点一行"""
    rows = [[r.name, float(x), float(v)] for r in residuals for x, v in zip(r.x, r.values)]
    return pd.DataFrame(rows, columns=['check', 'x', 'value'])


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, float_format=EXPORT_CONFIG['float_format'])
    except OSError as e:
        raise ArtifactIoError(f"写入 {path} 失败: {e}")


def write_potential_csv(traj: Trajectory, path: Path) -> None:
    _write_csv(potential_frame(traj), Path(path))
    logger.info(f"势函数已写入 {path}（{len(traj)} 个节点）")


def write_density_csv(density: Sequence[DensityResult], path: Path) -> None:
    _write_csv(density_frame(density), Path(path))
    logger.info(f"谱密度已写入 {path}（{len(density)} 个探测点）")


def trajectory_to_dict(traj: Trajectory, bs: BandStructure) -> Dict[str, Any]:
    """轨迹序列化，复数以 [re, im] 表示"""
    return {
        'schema_version': EXPORT_CONFIG['schema_version'],
        'edges': [float(e) for e in bs.edges],
        'n': traj.n,
        'm': traj.m,
        'h': float(traj.h),
        'method': traj.method,
        'grid': [float(x) for x in traj.grid],
        'drift': [float(d) for d in traj.drift],
        'states': [
            {
                'x': float(s.x),
                'F': [matrix_to_pairs(c) for c in s.F],
                'G1': [matrix_to_pairs(c) for c in s.G1],
                'G2': [matrix_to_pairs(c) for c in s.G2],
                'H': [matrix_to_pairs(c) for c in s.H],
            }
            for s in traj.states
        ],
    }


def _stack(blocks: list, count: int, m: int) -> np.ndarray:
    if not blocks:
        return np.zeros((count, m, m), dtype=complex)
    return np.array([pairs_to_matrix(b) for b in blocks], dtype=complex)


def trajectory_from_dict(data: Dict[str, Any]):
    """反序列化轨迹，返回 (Trajectory, BandStructure)"""
    version = data.get('schema_version')
    if version != EXPORT_CONFIG['schema_version']:
        raise ArtifactIoError(f"轨迹文件版本 {version} 与当前版本 {EXPORT_CONFIG['schema_version']} 不符")
    try:
        n, m = int(data['n']), int(data['m'])
        states = [
            FlowState(
                x=float(s['x']),
                F=_stack(s['F'], n + 1, m),
                G1=_stack(s['G1'], n, m),
                G2=_stack(s['G2'], n, m),
                H=_stack(s['H'], n + 2, m),
            )
            for s in data['states']
        ]
        traj = Trajectory(np.array(data['grid'], dtype=float), states, float(data['h']),
                          [float(d) for d in data.get('drift', [])], data.get('method', 'rk4'))
        bs = new_band_structure(data['edges'])
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactIoError(f"轨迹文件格式错误: {e}")
    return traj, bs


def dump_trajectory(traj: Trajectory, bs: BandStructure, path: Path) -> None:
    try:
        save_json(trajectory_to_dict(traj, bs), str(path))
    except OSError as e:
        raise ArtifactIoError(f"写入轨迹 {path} 失败: {e}")
    logger.info(f"轨迹已写入 {path}")


def load_trajectory(path: Path):
    """读取轨迹文件，返回 (Trajectory, BandStructure)"""
    try:
        data = load_json(str(path))
    except (OSError, ValueError) as e:
        raise ArtifactIoError(f"读取轨迹 {path} 失败: {e}")
    traj, bs = trajectory_from_dict(data)
    logger.info(f"载入轨迹 {path}: {len(traj)} 个节点, n={traj.n}, m={traj.m}")
    return traj, bs


def export(result: 'PipelineResult', out_dir: Path) -> Dict[str, Path]:
    """
    写出全部产物

    report.json 不含计时信息，计时单独写入 timing.json。

    Returns:
        产物名称到路径的映射
    """
    out_dir = Path(out_dir)
    try:
        ensure_dir(str(out_dir))
    except OSError as e:
        raise ArtifactIoError(f"无法创建输出目录 {out_dir}: {e}")

    written: Dict[str, Path] = {}
    if result.trajectory is not None:
        written['potential'] = out_dir / EXPORT_CONFIG['potential_file']
        write_potential_csv(result.trajectory, written['potential'])
        if result.report.mode != 'verify':
            written['trajectory'] = out_dir / EXPORT_CONFIG['trajectory_file']
            dump_trajectory(result.trajectory, result.bs, written['trajectory'])
    if result.residuals:
        written['residuals'] = out_dir / EXPORT_CONFIG['residuals_file']
        _write_csv(residual_frame(result.residuals), written['residuals'])
    if result.density:
        written['density'] = out_dir / EXPORT_CONFIG['density_file']
        write_density_csv(result.density, written['density'])

    written['report'] = out_dir / EXPORT_CONFIG['report_file']
    written['timing'] = out_dir / EXPORT_CONFIG['timing_file']
    try:
        save_json(result.report.to_dict(), str(written['report']))
        save_json(result.report.timing, str(written['timing']))
    except (OSError, TypeError, ValueError) as e:
        raise ArtifactIoError(f"写入报告失败: {e}")
    logger.info(f"产物已写入 {out_dir}: {sorted(written)}")
    return written
