"""
有限带矩阵势构造平台主入口文件
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

sys.path.append(str(Path(__file__).parent.parent))

from loguru import logger

from config.settings import EXPORT_CONFIG, LOGGING_CONFIG
from src.cli_io.exporter import load_trajectory
from src.cli_io.pipeline import run_pipeline
from src.cli_io.run_config import RunConfig, load_config, resolve_checks
from src.utils.errors import (
    ArtifactIoError,
    ConfigError,
    ConfigValidationError,
    FiniteBandError,
    NumericalAbort,
    PipelineStageError,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3


def setup_logging(quiet: bool = False):
    """设置日志配置"""
    logger.remove()
    LOGGING_CONFIG['log_dir'].mkdir(parents=True, exist_ok=True)
    logger.add(
        LOGGING_CONFIG['log_dir'] / 'finite_band.log',
        level=LOGGING_CONFIG['level'],
        format=LOGGING_CONFIG['format'],
        rotation=LOGGING_CONFIG['rotation'],
        retention=LOGGING_CONFIG['retention']
    )
    logger.add(sys.stderr, level='WARNING' if quiet else LOGGING_CONFIG['level'])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='finite-band', description='矩阵有限带势构造与校验')
    sub = parser.add_subparsers(dest='command', required=True)
    helps = {
        'build': '由种子构造算子数据并校验 Weyl 函数',
        'flow': '构造后沿 x 演化并校验不变量',
        'verify': '对已保存的轨迹重新执行检查',
        'export': '由已保存的轨迹重新写出产物',
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument('--config', required=True, help='YAML 运行配置文件')
        p.add_argument('--out', default=None, help='输出目录')
        p.add_argument('--checks', default=None, help='逗号分隔的检查列表，"-名称" 表示禁用')
        p.add_argument('--h', type=float, default=None, help='覆盖积分步长')
        p.add_argument('--quiet', action='store_true', help='只输出警告与错误')
        p.add_argument('--trajectory', default=None, help='已保存的 trajectory.json')
    return parser


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    """命令行参数覆盖配置文件"""
    if args.checks is not None:
        cfg.checks = resolve_checks(args.checks.split(','))
    if args.h is not None:
        if args.h <= 0:
            raise ConfigValidationError(f"步长必须为正: {args.h}", field='h')
        cfg.h = float(args.h)
    return cfg


def run(argv: Optional[List[str]] = None) -> int:
    """执行命令并返回退出码"""
    args = build_parser().parse_args(argv)
    setup_logging(args.quiet)
    logger.info(f"启动有限带势构造平台: {args.command}")

    try:
        cfg = apply_overrides(load_config(args.config), args)
        trajectory = None
        if args.command in ('verify', 'export'):
            path = Path(args.trajectory) if args.trajectory else Path(args.out or '.') / EXPORT_CONFIG['trajectory_file']
            trajectory, bs = load_trajectory(path)
            if tuple(bs.edges) != tuple(cfg.band_structure().edges) or trajectory.m != cfg.m:
                raise ConfigValidationError("轨迹文件的能带边界或维数与配置不符", field='trajectory')
        out_dir = Path(args.out) if args.out else EXPORT_CONFIG['output_dir']
        result = run_pipeline(cfg, args.command, out_dir, trajectory)
    except ConfigError as e:
        logger.error(f"配置错误: {e}")
        return EXIT_CONFIG
    except ArtifactIoError as e:
        logger.error(f"产物读写失败: {e}")
        return EXIT_CONFIG
    except PipelineStageError as e:
        if isinstance(e.cause, NumericalAbort):
            logger.error(f"数值计算中止: {e}")
            return EXIT_ABORT
        logger.error(f"运行失败: {e}")
        return EXIT_FAILED
    except FiniteBandError as e:
        logger.error(f"运行失败: {e}")
        return EXIT_FAILED

    report = result.report
    if report.passed:
        logger.info(f"完成: 全部 {len(report.checks)} 项检查通过")
        return EXIT_OK
    logger.warning(f"完成: {len(report.failures)} 项检查未通过 {report.failures}")
    return EXIT_FAILED


def main():
    """主函数"""
    sys.exit(run())


if __name__ == "__main__":
    main()
