"""Dual-rail cavity qubit simulation: dense density-matrix dynamics, logical
channels, measurement and gate protocols as exact outcome trees, and
closed-form error budgets."""
from .core import DensityMatrix, HilbertLayout, Ket, Operator
from .dynamics import DeviceParams, evolve_lindblad, evolve_unitary
from .errors import ConfigError, DimensionError, DualRailError, IntegrationError, NullBranchError

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix", "HilbertLayout", "Ket", "Operator",
    "DeviceParams", "evolve_lindblad", "evolve_unitary",
    "ConfigError", "DimensionError", "DualRailError", "IntegrationError", "NullBranchError",
]
