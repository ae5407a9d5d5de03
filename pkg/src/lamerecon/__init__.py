"""Lamé parameter reconstruction from internal elastography data."""

__version__ = "0.3.0"
__author__ = "lamerecon developers"
