"""
流水线编排：构造 → 校验 → 演化 → 不变量 → 报告
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from loguru import logger

from config.settings import EXPORT_CONFIG, NUMERIC_CONFIG
from src import __version__
from src.band_domain.band_structure import BandStructure
from src.band_domain.edge_series import EdgeSeries, edge_series
from src.cli_io.run_config import RunConfig
from src.coefficient_flow.flow_checks import (
    NodeResiduals,
    boundedness_check,
    hermiticity_check,
    invariant_residuals,
    lax_residual,
    reflectionless_check,
    riccati_residual,
    zone_confinement_check,
)
from src.coefficient_flow.flow_state import Trajectory, state_from_operator_data
from src.coefficient_flow.integrator import propagate
from src.dirichlet_data.dirichlet import extract_dirichlet
from src.dirichlet_data.seeds import default_seed, verify_herglotz_seed
from src.kdv_invariants.series import nonabelian_probe, skdv_residual, three_route_check
from src.kdv_invariants.trace_formulas import trace_check
from src.operator_builder.quadruple import OperatorData, build_quadruple, verify_quadruple
from src.operator_builder.weyl_evaluator import DensityResult, WeylEvaluator
from src.pencil_algebra.matrix_pencil import MatrixPencil
from src.pencil_algebra.root_zones import root_zones
from src.utils.errors import FiniteBandError, FlowError, GridTooCoarse, PipelineStageError
from src.utils.helpers import log_check


@dataclass
class RunReport:
    """检查结果、附加信息与来源元数据；计时单独保存"""

    mode: str
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    info: Dict[str, Any] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)
    stopped_at: Optional[str] = None
    timing: Dict[str, float] = field(default_factory=dict)

    @property
    def failures(self) -> List[str]:
        return [name for name, check in self.checks.items() if not check['passed']]

    @property
    def passed(self) -> bool:
        return not self.failures and self.stopped_at is None

    def add_check(self, name: str, value: float, tolerance: float, passed: Optional[bool] = None,
                  **details) -> None:
        if name in self.checks:
            raise ValueError(f"检查 {name} 重复记录")
        passed = bool(value <= tolerance) if passed is None else bool(passed)
        self.checks[name] = {'value': float(value), 'tolerance': float(tolerance), 'passed': passed, **details}
        log_check(name, value, tolerance, passed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': EXPORT_CONFIG['schema_version'],
            'mode': self.mode,
            'passed': self.passed,
            'failures': self.failures,
            'stopped_at': self.stopped_at,
            'checks': self.checks,
            'info': self.info,
            'provenance': self.provenance,
        }


@dataclass
class PipelineResult:
    """流水线产物"""

    report: RunReport
    bs: BandStructure
    od: Optional[OperatorData] = None
    trajectory: Optional[Trajectory] = None
    density: List[DensityResult] = field(default_factory=list)
    residuals: List[NodeResiduals] = field(default_factory=list)


class Pipeline:
    """按阶段执行构造与检查"""

    def __init__(self, cfg: RunConfig, mode: str = 'flow'):
        if mode not in ('build', 'flow', 'verify', 'export'):
            raise ValueError(f"未知的运行模式: {mode}")
        self.cfg = cfg
        self.mode = mode
        self.bs = cfg.band_structure()
        self.es: EdgeSeries = edge_series(self.bs, cfg.K)
        self.tol = cfg.tolerances
        self.residuals: List[NodeResiduals] = []
        self.report = RunReport(mode=mode, provenance={
            'config_hash': cfg.config_hash(),
            'version': __version__,
            'config_name': cfg.name,
        })
        logger.info(f"初始化流水线: 模式={mode}, 检查项 {len(cfg.checks)} 个")

    @contextmanager
    def stage(self, name: str):
        """计时并把模块错误包装为 PipelineStageError"""
        logger.info(f"开始阶段: {name}")
        start = time.perf_counter()
        try:
            yield
        except PipelineStageError:
            raise
        except (FiniteBandError, np.linalg.LinAlgError) as e:
            logger.error(f"阶段 {name} 失败: {e}")
            raise PipelineStageError(name, e) from e
        finally:
            self.report.timing[name] = time.perf_counter() - start
        logger.info(f"阶段完成: {name}")

    def _check(self, name: str, value: float, tolerance_key: str, passed: Optional[bool] = None, **details):
        if self.cfg.enabled(name):
            self.report.add_check(name, value, self.tol[tolerance_key], passed, **details)

    def _grid_check(self, name: str, fine: NodeResiduals, coarse: Optional[NodeResiduals],
                    scale: float = 1.0) -> None:
        """
        差分类检查

        细网格残差不超过容差即通过；否则与隔点抽取的粗网格比较，
        残差随 Δx 至少按 min_convergence_order 阶下降时视为离散误差，同样通过。
        """
        value = fine.max / scale
        passed = value <= self.tol[name]
        details: Dict[str, Any] = {'criterion': 'absolute', 'coarse_value': None, 'observed_order': None}
        if coarse is not None and len(coarse.values):
            common = np.isin(fine.x, coarse.x)
            fine_common = float(np.max(fine.values[common])) if np.any(common) else 0.0
            details['coarse_value'] = coarse.max / scale
            if fine_common > 0 and coarse.max > 0:
                order = float(np.log2(coarse.max / fine_common))
                details['observed_order'] = order
                if not passed and order >= NUMERIC_CONFIG['min_convergence_order']:
                    passed = True
                    details['criterion'] = 'convergence'
        self._check(name, value, name, passed, **details)

    @staticmethod
    def _coarse(compute: Callable[[Trajectory], NodeResiduals], traj: Trajectory) -> Optional[NodeResiduals]:
        """粗网格上的同一残差；节点不足时返回 None"""
        try:
            return compute(traj.coarsened())
        except (GridTooCoarse, ValueError, FlowError) as e:
            logger.debug(f"粗网格残差不可用: {e}")
            return None

    # ---------------- 各阶段 ----------------

    def build_seed(self) -> Optional[MatrixPencil]:
        cfg = self.cfg
        with self.stage('seed'):
            if cfg.seed['kind'] == 'diagonal':
                F = default_seed(self.bs, cfg.m, cfg.seed['placement'])
            else:
                F = cfg.seed_pencil()

        with self.stage('herglotz'):
            seed_report = verify_herglotz_seed(F, self.bs, tol=self.tol['herglotz'])
            self.report.info['seed_roots'] = seed_report.get('roots')
            self.report.info['strongly_hyperbolic'] = seed_report.get('strongly_hyperbolic')
            worst = seed_report['worst_eigenvalue']
            value = -worst if worst is not None else float('inf')
            self.report.add_check('herglotz_seed', max(value, 0.0), self.tol['herglotz'],
                                  seed_report['passed'], roots_in_gaps=seed_report.get('roots_in_gaps'))
            if not seed_report['passed']:
                self.report.stopped_at = 'herglotz'
                logger.warning("种子未通过 Herglotz 检验，停止后续阶段")
                return None
            zones = root_zones(F, probes=cfg.root_zone_probes, rng_seed=cfg.rng_seed)
            self.report.info['seed_hyperbolicity'] = zones.hyperbolicity
        return F

    def build_operator(self, F: MatrixPencil) -> OperatorData:
        cfg = self.cfg
        with self.stage('dirichlet'):
            ds = extract_dirichlet(F, self.bs, cfg.epsilons)
            flags = ds.validate(self.bs, self.tol['dirichlet'])
            worst = max((d.residue_residual for d in ds.data), default=0.0)
            self._check('dirichlet', worst, 'dirichlet', all(flags.values()), flags=flags)
            self.report.info['dirichlet'] = [
                {'mu': d.mu, 'rank': d.rank, 'epsilon': d.epsilon, 'multiplicity': d.multiplicity}
                for d in ds.data
            ]

        with self.stage('quadruple'):
            od = build_quadruple(F, ds, self.bs)
            quad = verify_quadruple(od, tol=self.tol['quadruple'])
            self._check('quadruple', quad['max_relative'], 'quadruple', quad['passed'],
                        degrees=quad['degrees'])
        return od

    def weyl_checks(self, od: OperatorData) -> List[DensityResult]:
        cfg, bs = self.cfg, self.bs
        with self.stage('weyl'):
            ev = WeylEvaluator(od, route_tol=self.tol['weyl_routes'])
            grid = bs.herglotz_grid(NUMERIC_CONFIG['herglotz_grid_size'], NUMERIC_CONFIG['herglotz_radii'])
            herglotz = ev.herglotz_check(list(grid) + list(cfg.z_probes), self.tol['weyl_herglotz'])
            self._check('weyl_herglotz', max(-herglotz['value'], 0.0), 'weyl_herglotz', herglotz['passed'])

            density = [ev.spectral_density(lam) for lam in cfg.lambda_probes]
            band = [d for d in density if not d.outside_bands]
            scale = od.coefficient_scale()
            worst_density = 0.0
            for d in band:
                eigs = np.linalg.eigvalsh(d.matrix)
                worst_density = max(worst_density, -float(eigs[0]) / scale)
            self._check('density', worst_density, 'density',
                        outside_band_probes=[d.lam for d in density if d.outside_bands])
            self._check('schur', max((ev.density_schur_check(d.lam) for d in band), default=0.0), 'schur')
            self._check('stieltjes', max((ev.stieltjes_check(d.lam, cfg.boundary_eps) for d in band),
                                         default=0.0), 'stieltjes')

            if cfg.enabled('representation'):
                z = cfg.z_probes[0]
                value = max(ev.representation_check(z, 1), ev.representation_check(z, -1))
                self._check('representation', value, 'representation')
            if cfg.enabled('asymptotics'):
                radii = [10 * bs.span, 100 * bs.span, 1000 * bs.span]
                # 扇形开角两种解读都要通过
                runs = [ev.asymptotics_check(radii, half_aperture=flag) for flag in (False, True)]
                value = max(run['errors'][-1] for run in runs)
                self._check('asymptotics', value, 'asymptotics',
                            all(run['decreasing'] for run in runs) and value <= self.tol['asymptotics'],
                            errors=runs[0]['errors'], half_aperture_errors=runs[1]['errors'])

            probes = list(cfg.z_probes) + [2j * bs.span]
            self.report.info['nonabelian_probe_F'] = nonabelian_probe(od.F, probes[0], probes[1])
            self.report.info['nonabelian_probe_M_plus'] = nonabelian_probe(
                lambda z: ev.half_line(z, 1), probes[0], probes[1])
        return density

    def run_flow(self, od: OperatorData) -> Trajectory:
        cfg = self.cfg
        with self.stage('flow'):
            s0 = state_from_operator_data(od, cfg.x0)
            grid = cfg.grid()
            i0 = cfg.anchor_index()
            grid[i0] = cfg.x0
            forward = propagate(s0, grid[i0:], self.bs, h=cfg.h, method=cfg.method,
                                drift_abort=self.tol['drift_abort'])
            if i0 > 0:
                backward = propagate(s0, grid[:i0 + 1][::-1], self.bs, h=cfg.h, method=cfg.method,
                                     drift_abort=self.tol['drift_abort'])
                traj = Trajectory.join(backward, forward)
            else:
                traj = forward
            self.report.info['max_drift'] = max(traj.drift)
        return traj

    def flow_checks(self, traj: Trajectory) -> None:
        cfg, bs = self.cfg, self.bs
        with self.stage('flow_checks'):
            if cfg.enabled('invariants'):
                worst = max(invariant_residuals(s, bs, cfg.z_probes)['max_relative'] for s in traj.states)
                self._check('invariants', worst, 'invariants')
            if cfg.enabled('riccati'):
                nodes = [riccati_residual(traj, bs, z) for z in cfg.z_probes]
                self.residuals.extend(nodes)
                self._grid_check('riccati', _merged('riccati', nodes),
                                 self._coarse(lambda t: _merged('riccati', [riccati_residual(t, bs, z)
                                                                           for z in cfg.z_probes]), traj))
            band = [lam for lam in cfg.lambda_probes if bs.in_band_interior(lam)]
            if cfg.enabled('reflectionless') and band:
                nodes = [reflectionless_check(traj, bs, lam, cfg.boundary_eps) for lam in band]
                self.residuals.extend(nodes)
                self._check('reflectionless', max(r.max for r in nodes), 'reflectionless')
            if cfg.enabled('lax'):
                lax = lax_residual(traj, cfg.z_probes)
                self.residuals.append(lax)
                self._grid_check('lax', lax, self._coarse(lambda t: lax_residual(t, cfg.z_probes), traj))
            if cfg.enabled('zone_confinement'):
                zone = zone_confinement_check(traj, bs, self.tol['zone_confinement'])
                self._check('zone_confinement', zone['value'], 'zone_confinement', zone['passed'])
            if cfg.enabled('hermiticity'):
                herm = hermiticity_check(traj, self.tol['hermiticity'])
                self._check('hermiticity', herm['value'], 'hermiticity', herm['passed'])
            if cfg.enabled('boundedness'):
                bound = boundedness_check(traj, bs, self.tol['boundedness'])
                self._check('boundedness', bound['value'], 'boundedness', bound['passed'], bound=bound['bound'])

    def kdv_checks(self, traj: Trajectory) -> None:
        cfg, bs = self.cfg, self.bs
        with self.stage('kdv'):
            if cfg.enabled('trace'):
                trace = trace_check(traj, bs, self.es, self.tol['trace'])
                self._check('trace', trace['value'], 'trace', trace['passed'],
                            zones_ok=trace['zones_ok'], zone_violation=trace['zone_violation'])
                self.report.info['trace_reversed_order_residual'] = trace['reversed_order_residual']
                self.report.info['trace_first_node'] = trace['first_node']
            if cfg.enabled('series_routes'):
                routes = _route_residuals(traj, self.es)
                self.residuals.append(routes)
                self._grid_check('series_routes', routes,
                                 self._coarse(lambda t: _route_residuals(t, self.es), traj))
            if cfg.enabled('skdv'):
                scale = max(1.0, float(np.max(np.abs(bs.edges)))) ** (bs.n + 2)
                skdv = skdv_residual(traj, self.es)
                self.residuals.append(skdv)
                self._grid_check('skdv', skdv, self._coarse(lambda t: skdv_residual(t, self.es), traj), scale)

    # ---------------- 入口 ----------------

    def run(self, trajectory: Optional[Trajectory] = None) -> PipelineResult:
        result = PipelineResult(report=self.report, bs=self.bs, residuals=self.residuals)
        if self.mode in ('verify', 'export') and trajectory is not None:
            result.trajectory = trajectory
            if self.mode == 'verify':
                self.flow_checks(trajectory)
                self.kdv_checks(trajectory)
            F = self.build_seed()
            if F is not None:
                result.od = self.build_operator(F)
                result.density = self.weyl_checks(result.od) if self.mode == 'export' else []
            return result

        F = self.build_seed()
        if F is None:
            return result
        result.od = self.build_operator(F)
        result.density = self.weyl_checks(result.od)
        if self.mode == 'build':
            return result
        result.trajectory = self.run_flow(result.od)
        self.flow_checks(result.trajectory)
        self.kdv_checks(result.trajectory)
        return result


def _merged(name: str, nodes: List[NodeResiduals]) -> NodeResiduals:
    """同一网格上多组残差的逐节点最大值"""
    return NodeResiduals(name, nodes[0].x, np.max([r.values for r in nodes], axis=0))


def _route_residuals(traj: Trajectory, es: EdgeSeries) -> NodeResiduals:
    routes = three_route_check(traj, es)
    # 两端各 3 个节点不参与比较
    return NodeResiduals('series_routes', traj.grid[3:-3].copy(), np.asarray(routes['per_node'][3:-3]))


def run_pipeline(cfg: RunConfig, mode: str = 'flow', out_dir: Optional[Path] = None,
                 trajectory: Optional[Trajectory] = None) -> PipelineResult:
    """
    执行流水线，给定 out_dir 时写出产物

    Args:
        cfg: 运行配置
        mode: build / flow / verify / export
        out_dir: 输出目录
        trajectory: verify / export 模式下重新载入的轨迹

    Returns:
        PipelineResult
    """
    from src.cli_io.exporter import export

    logger.info(f"运行流水线: {cfg.name or cfg.source or '未命名配置'}")
    result = Pipeline(cfg, mode).run(trajectory)
    report = result.report
    if out_dir is not None:
        export(result, Path(out_dir))
    if report.passed:
        logger.info(f"全部 {len(report.checks)} 项检查通过")
    else:
        logger.warning(f"未通过的检查: {report.failures}，停止阶段: {report.stopped_at}")
    return result
