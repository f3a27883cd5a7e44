"""ellreg: explicit-constants interior regularity toolkit for almost-linear
uniformly elliptic equations on 2-D grids."""

from .constants import (
    ConstantsReport,
    EllipticityBounds,
    ExternalConstants,
    HolderPair,
    build_report,
)
from .grid import Grid2, GridFunction, load_grid, save_grid
from .operators import OperatorSpec

__version__ = "0.1.0"

__all__ = [
    "ConstantsReport",
    "EllipticityBounds",
    "ExternalConstants",
    "Grid2",
    "GridFunction",
    "HolderPair",
    "OperatorSpec",
    "build_report",
    "load_grid",
    "save_grid",
    "__version__",
]
