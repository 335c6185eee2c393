"""Spatial field snapshots carried through the solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec

MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"
MODES = (MULTIPLICATIVE, ADDITIVE)


@dataclass(frozen=True)
class FieldState:
    """A field on the spatial lattice at one absolute time."""

    grid: GridSpec
    t_abs: float
    values: np.ndarray
    mode: str = MULTIPLICATIVE

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.nx,):
            raise ValueError(f"field shape {v.shape} does not match grid nx={self.grid.nx}")
        object.__setattr__(self, "values", v)
