"""Scattering and global-optimization workbench for inverse problems."""

__version__ = "0.1.0"
