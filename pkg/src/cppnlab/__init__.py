"""Workbench for CPPN image generation and two-point correlation analysis."""

__version__ = "0.1.0"
