"""
能带结构模块
"""

from src.band_domain.band_structure import BandStructure, new_band_structure, eval_R, eval_sqrtR
from src.band_domain.edge_series import EdgeSeries, edge_series

__all__ = ['BandStructure', 'new_band_structure', 'eval_R', 'eval_sqrtR', 'EdgeSeries', 'edge_series']
