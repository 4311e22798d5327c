"""
种子矩阵束的生成与 Herglotz 条件检验
"""

from typing import Any, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from config.settings import NUMERIC_CONFIG, TOLERANCE_CONFIG
from src.band_domain.band_structure import BandStructure
from src.pencil_algebra.matrix_pencil import MatrixPencil, det_roots, is_selfadjoint
from src.pencil_algebra.root_zones import check_strong_hyperbolicity
from src.utils.errors import PlacementOutsideGap, PencilError
from src.utils.helpers import imaginary_part


def default_seed(bs: BandStructure, m: int, placement: Sequence[Sequence[float]]) -> MatrixPencil:
    """
    对角首一种子 F(z) = diag(∏_j (z - μ_{j,r}))

    Args:
        bs: 能带结构
        m: 矩阵维数
        placement: 每个有限能隙一组 m 个实数

    Returns:
        次数为 n 的对角矩阵束
    """
    if len(placement) != bs.n:
        raise PlacementOutsideGap(f"需要 {bs.n} 组能隙取值，实际 {len(placement)} 组")
    for j, (values, (left, right)) in enumerate(zip(placement, bs.interior_gaps), start=1):
        if len(values) != m:
            raise PlacementOutsideGap(f"第 {j} 个能隙需要 {m} 个取值，实际 {len(values)} 个")
        for value in values:
            if not left <= value <= right:
                raise PlacementOutsideGap(f"取值 {value} 不在第 {j} 个能隙 [{left}, {right}] 内")

    coeffs = np.zeros((bs.n + 1, m, m), dtype=complex)
    for r in range(m):
        poly = np.poly([placement[j][r] for j in range(bs.n)])
        coeffs[:, r, r] = poly[::-1]
    seed = MatrixPencil(coeffs)
    logger.info(f"生成对角种子: m={m}, n={bs.n}, 取值={[list(v) for v in placement]}")
    return seed


def verify_herglotz_seed(F: MatrixPencil, bs: BandStructure,
                         samples: Optional[Sequence[complex]] = None,
                         tol: Optional[float] = None) -> Dict[str, Any]:
    """
    检验 Im((i/2) R^{-1/2}(z) F(z)) ⪰ 0 且 det F 的根全部位于能隙闭包

    Returns:
        报告字典: passed, worst_eigenvalue, worst_z, roots, roots_in_gaps, strongly_hyperbolic
    """
    tol = tol if tol is not None else TOLERANCE_CONFIG['herglotz']
    if samples is None:
        samples = bs.herglotz_grid(NUMERIC_CONFIG['herglotz_grid_size'], NUMERIC_CONFIG['herglotz_radii'])

    report: Dict[str, Any] = {'passed': False, 'worst_eigenvalue': None, 'worst_z': None}
    if F.degree != bs.n or not F.is_monic(1e-10):
        report['reason'] = f"种子必须为 {bs.n} 次首一矩阵束"
        logger.warning(report['reason'])
        return report
    if not is_selfadjoint(F, NUMERIC_CONFIG['hermitian_tol'] * max(1.0, F.norm())):
        report['reason'] = "种子不是自伴矩阵束"
        logger.warning(report['reason'])
        return report

    worst, worst_z, worst_scaled = np.inf, None, np.inf
    for z in samples:
        value = (0.5j / bs.sqrt_R(z)) * F(z)
        eig_min = float(np.linalg.eigvalsh(imaginary_part(value))[0])
        scaled = eig_min / max(1.0, float(np.linalg.norm(value, 2)))
        if scaled < worst_scaled:
            worst, worst_z, worst_scaled = eig_min, complex(z), scaled

    roots = det_roots(F, scale=bs.span)
    root_tol = NUMERIC_CONFIG['cluster_rel_tol'] * bs.span
    roots_in_gaps = all(
        abs(r.imag) <= root_tol and bs.in_gap_closure(r.real, root_tol) for r, _ in roots
    )
    try:
        strongly, certificate = check_strong_hyperbolicity(F, bs.separators(F.degree))
    except PencilError as e:
        strongly, certificate = False, {'error': str(e)}

    report.update({
        'passed': bool(worst_scaled >= -tol and roots_in_gaps),
        'worst_eigenvalue': worst,
        'worst_z': worst_z,
        'roots': [(float(r.real), k) for r, k in roots],
        'roots_in_gaps': roots_in_gaps,
        'strongly_hyperbolic': strongly,
        'certificate': certificate,
    })
    if report['passed']:
        logger.info(f"种子 Herglotz 检验通过，最小特征值 {worst:.3e}")
    else:
        logger.warning(f"种子 Herglotz 检验未通过: 最小特征值 {worst:.3e}, 根位于能隙={roots_in_gaps}")
    return report
