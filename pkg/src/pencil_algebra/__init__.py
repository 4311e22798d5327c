"""
矩阵束代数模块
"""

from src.pencil_algebra.matrix_pencil import (
    MatrixPencil,
    eval_pencil,
    eval_pencil_at_matrix,
    is_selfadjoint,
    det_roots,
    companion_eig,
)
from src.pencil_algebra.root_zones import RootZoneReport, root_zones, check_strong_hyperbolicity
from src.pencil_algebra.factorization import (
    spectral_root,
    divide_right,
    factorize,
    vandermonde,
    elementary_block_sums,
)

__all__ = [
    'MatrixPencil', 'eval_pencil', 'eval_pencil_at_matrix', 'is_selfadjoint', 'det_roots',
    'companion_eig', 'RootZoneReport', 'root_zones', 'check_strong_hyperbolicity',
    'spectral_root', 'divide_right', 'factorize', 'vandermonde', 'elementary_block_sums',
]
