"""有限带矩阵 Schrödinger 势构造平台核心模块"""

__version__ = "1.0.0"
