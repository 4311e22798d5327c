"""
Dirichlet 谱数据模块
"""

from src.dirichlet_data.seeds import default_seed, verify_herglotz_seed
from src.dirichlet_data.dirichlet import DirichletDatum, DirichletSet, extract_dirichlet, compute_gamma0

__all__ = ['default_seed', 'verify_herglotz_seed', 'DirichletDatum', 'DirichletSet',
           'extract_dirichlet', 'compute_gamma0']
