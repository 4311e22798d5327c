"""
运行配置的读取与校验
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import yaml
from loguru import logger

from config.settings import EXPORT_CONFIG, FLOW_CONFIG, NUMERIC_CONFIG, RUN_CONFIG, TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure, new_band_structure
from src.pencil_algebra.matrix_pencil import MatrixPencil
from src.utils.errors import BandStructureError, ConfigParseError, ConfigValidationError
from src.utils.helpers import complex_to_pair, pairs_to_matrix, parse_complex

# 可启用的检查，按流水线顺序排列
CHECK_NAMES = [
    'herglotz_seed', 'dirichlet', 'quadruple',
    'weyl_herglotz', 'density', 'schur', 'stieltjes', 'representation', 'asymptotics',
    'invariants', 'riccati', 'reflectionless', 'lax',
    'zone_confinement', 'hermiticity', 'boundedness',
    'trace', 'series_routes', 'skdv',
]

KNOWN_KEYS = {
    'schema_version', 'name', 'description', 'edges', 'm', 'seed', 'epsilons', 'x0', 'x_grid',
    'h', 'method', 'z_probes', 'lambda_probes', 'boundary_eps', 'K', 'tolerances', 'checks',
    'rng_seed', 'root_zone_probes',
}


@dataclass
class RunConfig:
    """经过校验、补齐默认值的运行配置"""

    edges: List[float]
    m: int
    seed: Dict[str, Any]
    x0: float
    x_grid: Dict[str, float]
    h: float
    method: str
    z_probes: List[complex]
    lambda_probes: List[float]
    boundary_eps: float
    K: int
    tolerances: Dict[str, float]
    checks: List[str]
    rng_seed: int
    root_zone_probes: int
    epsilons: Optional[List[int]] = None
    name: str = ''
    source: Optional[str] = None
    bs: Optional[BandStructure] = field(default=None, repr=False, compare=False)

    def band_structure(self) -> BandStructure:
        if self.bs is None:
            self.bs = new_band_structure(self.edges)
        return self.bs

    def grid(self) -> np.ndarray:
        return np.linspace(self.x_grid['start'], self.x_grid['stop'], int(self.x_grid['count']))

    def anchor_index(self) -> int:
        """x_0 在网格中的位置"""
        return int(np.argmin(np.abs(self.grid() - self.x0)))

    def seed_pencil(self) -> Optional[MatrixPencil]:
        """显式种子的矩阵束（对角种子返回 None）"""
        if self.seed['kind'] != 'explicit':
            return None
        return MatrixPencil(np.array([pairs_to_matrix(c) for c in self.seed['coefficients']]))

    def enabled(self, check: str) -> bool:
        return check in self.checks

    def to_dict(self) -> Dict[str, Any]:
        """可序列化的规范形式（复数写为 [re, im]）"""
        data = asdict(self)
        data.pop('bs')
        data.pop('source')
        data['z_probes'] = [complex_to_pair(z) for z in self.z_probes]
        return data

    def config_hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def _as_float(value: Any, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigParseError(f"需要实数，实际为 {value!r}", field=name)


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigParseError(f"需要整数，实际为 {value!r}", field=name)
    return int(value)


def _as_list(value: Any, name: str) -> list:
    if not isinstance(value, list):
        raise ConfigParseError(f"需要列表，实际为 {type(value).__name__}", field=name)
    return value


def _parse_seed(raw: Any, bs: BandStructure, m: int) -> Dict[str, Any]:
    if not isinstance(raw, dict) or 'kind' not in raw:
        raise ConfigParseError("seed 需要包含 kind 字段", field='seed')
    kind = raw['kind']
    if kind == 'diagonal':
        placement = _as_list(raw.get('placement'), 'seed.placement')
        if len(placement) != bs.n:
            raise ConfigValidationError(f"需要 {bs.n} 组能隙取值，实际 {len(placement)} 组", field='seed.placement')
        rows = []
        for j, values in enumerate(placement):
            values = _as_list(values, f'seed.placement[{j}]')
            if len(values) != m:
                raise ConfigValidationError(f"每组需要 {m} 个取值", field=f'seed.placement[{j}]')
            rows.append([_as_float(v, f'seed.placement[{j}]') for v in values])
        return {'kind': 'diagonal', 'placement': rows}
    if kind == 'explicit':
        coefficients = _as_list(raw.get('coefficients'), 'seed.coefficients')
        parsed = []
        for k, matrix in enumerate(coefficients):
            try:
                value = pairs_to_matrix(matrix)
            except (TypeError, ValueError) as e:
                raise ConfigParseError(f"无法解析系数矩阵: {e}", field=f'seed.coefficients[{k}]')
            if value.shape != (m, m):
                raise ConfigValidationError(f"系数矩阵形状 {value.shape} 与 m={m} 不符",
                                            field=f'seed.coefficients[{k}]')
            parsed.append([[complex_to_pair(v) for v in row] for row in value])
        if len(parsed) != bs.n + 1:
            raise ConfigValidationError(f"需要 {bs.n + 1} 个系数矩阵（升幂），实际 {len(parsed)} 个",
                                        field='seed.coefficients')
        return {'kind': 'explicit', 'coefficients': parsed}
    raise ConfigValidationError(f"未知的种子类型: {kind}", field='seed.kind')


def default_lambda_probes(bs: BandStructure) -> List[float]:
    """能带中点、E_2n + 1 与各有限能隙中点"""
    points = set(bs.band_midpoints()) | {bs.edges[-1] + 1.0} | set(bs.gap_midpoints())
    return sorted(float(p) for p in points)


def build_config(raw: Dict[str, Any], source: Optional[str] = None) -> RunConfig:
    """由解析后的字典构造 RunConfig，补齐默认值并校验"""
    if not isinstance(raw, dict):
        raise ConfigParseError("配置文件顶层必须为映射")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigParseError(f"未知字段: {sorted(unknown)}", field=sorted(unknown)[0])
    version = raw.get('schema_version', EXPORT_CONFIG['schema_version'])
    if version != EXPORT_CONFIG['schema_version']:
        raise ConfigValidationError(f"不支持的 schema_version: {version}", field='schema_version')

    for key in ('edges', 'm', 'seed'):
        if key not in raw:
            raise ConfigValidationError("缺少必填字段", field=key)
    edges = [_as_float(e, 'edges') for e in _as_list(raw['edges'], 'edges')]
    try:
        bs = new_band_structure(edges)
    except BandStructureError as e:
        raise ConfigValidationError(str(e), field='edges')
    m = _as_int(raw['m'], 'm')
    if m < 1:
        raise ConfigValidationError("m 必须为正整数", field='m')
    seed = _parse_seed(raw['seed'], bs, m)

    epsilons = None
    if raw.get('epsilons') is not None:
        epsilons = [_as_int(e, 'epsilons') for e in _as_list(raw['epsilons'], 'epsilons')]
        if any(e not in (1, -1) for e in epsilons):
            raise ConfigValidationError("ε_k 只能取 ±1", field='epsilons')

    x0 = _as_float(raw.get('x0', 0.0), 'x0')
    grid_raw = raw.get('x_grid') or {}
    if not isinstance(grid_raw, dict):
        raise ConfigParseError("x_grid 必须为映射", field='x_grid')
    x_grid = {
        'start': _as_float(grid_raw.get('start', x0), 'x_grid.start'),
        'stop': _as_float(grid_raw.get('stop', x0 + FLOW_CONFIG['default_grid_length']), 'x_grid.stop'),
        'count': _as_int(grid_raw.get('count', FLOW_CONFIG['default_grid_count']), 'x_grid.count'),
    }
    if x_grid['count'] < 5:
        raise ConfigValidationError("网格节点数必须不小于 5", field='x_grid.count')
    if not x_grid['start'] < x_grid['stop']:
        raise ConfigValidationError("x_grid.start 必须小于 x_grid.stop", field='x_grid')
    nodes = np.linspace(x_grid['start'], x_grid['stop'], x_grid['count'])
    if np.min(np.abs(nodes - x0)) > 1e-12 * max(1.0, abs(x0), x_grid['stop'] - x_grid['start']):
        raise ConfigValidationError("x0 必须是网格节点", field='x0')

    h = _as_float(raw.get('h', FLOW_CONFIG['relative_step'] * bs.span), 'h')
    if h <= 0:
        raise ConfigValidationError("步长必须为正", field='h')
    method = raw.get('method', FLOW_CONFIG['method'])
    if method not in ('rk4', 'adaptive'):
        raise ConfigValidationError(f"未知的积分方法: {method}", field='method')

    try:
        z_probes = [parse_complex(z) for z in _as_list(raw.get('z_probes', RUN_CONFIG['z_probes']), 'z_probes')]
    except ValueError as e:
        raise ConfigParseError(str(e), field='z_probes')
    if not z_probes or any(z.imag <= 0 for z in z_probes):
        raise ConfigValidationError("z 探测点必须位于上半平面", field='z_probes')
    if 'lambda_probes' in raw:
        lambda_probes = [_as_float(v, 'lambda_probes') for v in _as_list(raw['lambda_probes'], 'lambda_probes')]
    else:
        lambda_probes = default_lambda_probes(bs)
    if any(bs.classify(v)[0] == 'edge' for v in lambda_probes):
        raise ConfigValidationError("λ 探测点不能是能带边界", field='lambda_probes')

    boundary_eps = _as_float(raw.get('boundary_eps', RUN_CONFIG['boundary_eps']), 'boundary_eps')
    if boundary_eps <= 0:
        raise ConfigValidationError("boundary_eps 必须为正", field='boundary_eps')
    K = _as_int(raw.get('K', bs.n + 3), 'K')
    if K < max(2, bs.n + 1):
        raise ConfigValidationError(f"K 至少为 {max(2, bs.n + 1)}", field='K')

    tolerances = dict(TOLERANCE_CONFIG)
    overrides = raw.get('tolerances') or {}
    if not isinstance(overrides, dict):
        raise ConfigParseError("tolerances 必须为映射", field='tolerances')
    for key, value in overrides.items():
        if key not in TOLERANCE_CONFIG:
            raise ConfigValidationError(f"未知的容差名称: {key}", field='tolerances')
        tolerances[key] = _as_float(value, f'tolerances.{key}')
    for key, value in tolerances.items():
        if not value > 0:
            raise ConfigValidationError(f"容差必须为正: {value}", field=f'tolerances.{key}')

    checks = list(CHECK_NAMES)
    if raw.get('checks') is not None:
        checks = resolve_checks(_as_list(raw['checks'], 'checks'))

    rng_seed = _as_int(raw.get('rng_seed', RUN_CONFIG['rng_seed']), 'rng_seed')
    probes = _as_int(raw.get('root_zone_probes', NUMERIC_CONFIG['root_zone_probes']), 'root_zone_probes')
    if probes < 1:
        raise ConfigValidationError("root_zone_probes 必须为正", field='root_zone_probes')

    return RunConfig(
        edges=edges, m=m, seed=seed, x0=x0, x_grid=x_grid, h=h, method=method,
        z_probes=z_probes, lambda_probes=lambda_probes, boundary_eps=boundary_eps, K=K,
        tolerances=tolerances, checks=checks, rng_seed=rng_seed, root_zone_probes=probes,
        epsilons=epsilons, name=str(raw.get('name', '')), source=source, bs=bs,
    )


def resolve_checks(requested: List[str]) -> List[str]:
    """
    解析检查列表：普通名称表示只启用这些检查，以 '-' 开头的名称表示从全部检查中禁用
    """
    names = [str(c).strip() for c in requested if str(c).strip()]
    disabled = [c[1:] for c in names if c.startswith('-')]
    enabled = [c for c in names if not c.startswith('-')]
    for name in disabled + enabled:
        if name not in CHECK_NAMES:
            raise ConfigValidationError(f"未知的检查名称: {name}", field='checks')
    base = enabled if enabled else CHECK_NAMES
    return [c for c in CHECK_NAMES if c in base and c not in disabled]


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    读取 YAML 运行配置

    Raises:
        ConfigParseError: 文件不可读、YAML 语法错误或字段类型错误
        ConfigValidationError: 字段值违反约束
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigParseError(f"无法读取配置文件 {path}: {e}")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigParseError(f"YAML 解析失败: {getattr(e, 'problem', e)}", line=line)
    cfg = build_config(raw or {}, source=str(path))
    logger.info(f"加载运行配置: {path}，n={cfg.band_structure().n}, m={cfg.m}")
    return cfg
