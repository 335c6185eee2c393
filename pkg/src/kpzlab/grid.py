"""Space-time grid descriptor for the periodic solver domain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Required ratio of domain width to sqrt(t_end).  At this width the periodic
#: image of a heat kernel centred in the domain contributes exp(-50) ~ 2e-22
#: at the origin by terminal time, far below every statistical tolerance.
BOUNDARY_GUARD_RATIO = 10.0


class BoundaryGuardError(ValueError):
    """Domain too narrow for the requested time horizon."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time discretisation of ``[x_min, x_max] x [t_start, t_end]``.

    Space is treated as periodic with ``nx`` cells of width ``dx``; time has
    ``nt`` steps of length ``dt``.
    """

    x_min: float
    x_max: float
    nx: int
    t_start: float
    t_end: float
    nt: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.nt

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        """Cell coordinates (left edges; the periodic lattice)."""
        return self.x_min + self.dx * np.arange(self.nx)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.nt + 1)

    def origin_index(self) -> int:
        """Index of the lattice point at x = 0; error if 0 is off-lattice."""
        i = round((0.0 - self.x_min) / self.dx)
        if not (0 <= i < self.nx) or abs(self.x_min + i * self.dx) > 1e-9 * max(self.dx, 1.0):
            raise ValueError("x = 0 is not a lattice point of this grid")
        return int(i)

    def time_steps(self, interval: float, name: str = "interval") -> int:
        """Express a duration as an exact number of time steps.

        Durations that are not integer multiples of ``dt`` (to within float
        round-off) are a hard error: silently snapping would corrupt the
        eps^(1/4) scalings this package exists to measure.
        """
        ratio = interval / self.dt
        n = round(ratio)
        if abs(ratio - n) > 1e-8 * max(abs(ratio), 1.0):
            raise ValueError(
                f"{name} = {interval!r} is not an integer multiple of dt = {self.dt!r}"
            )
        return int(n)


def make_grid(
    x_min: float,
    x_max: float,
    nx: int,
    t_start: float,
    t_end: float,
    nt: int,
    override_boundary_guard: bool = False,
) -> GridSpec:
    """Validated grid constructor.

    Rejects non-finite bounds, empty meshes and domains narrower than
    ``BOUNDARY_GUARD_RATIO * sqrt(t_end)``.  ``override_boundary_guard=True``
    disables the width guard and also permits degenerate single-cell grids.
    """
    for name, v in (("x_min", x_min), ("x_max", x_max), ("t_start", t_start), ("t_end", t_end)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")
    if x_max <= x_min:
        raise ValueError(f"need x_max > x_min, got [{x_min}, {x_max}]")
    if t_end <= t_start:
        raise ValueError(f"need t_end > t_start, got [{t_start}, {t_end}]")
    if t_start < 0:
        raise ValueError(f"t_start must be >= 0, got {t_start}")
    if nt < 1:
        raise ValueError(f"nt must be >= 1, got {nt}")
    min_nx = 1 if override_boundary_guard else 2
    if nx < min_nx:
        raise ValueError(f"nx must be >= {min_nx}, got {nx}")
    width = x_max - x_min
    required = BOUNDARY_GUARD_RATIO * math.sqrt(t_end)
    if width < required and not override_boundary_guard:
        raise BoundaryGuardError(
            f"domain width {width:g} < {BOUNDARY_GUARD_RATIO:g}*sqrt(t_end) = {required:g}; "
            "widen the domain or pass override_boundary_guard=True"
        )
    return GridSpec(float(x_min), float(x_max), int(nx), float(t_start), float(t_end), int(nt))
