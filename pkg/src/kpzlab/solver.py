"""Time-stepping of the multiplicative and additive noise heat equations.

One step of the splitting scheme is an exact spectral heat step followed by a
pointwise noise stage:

* multiplicative: ``Z <- heat_step(Z, dt) * exp(dW/dx - dt/(2 dx))``,
* additive:       ``V <- heat_step(V, dt) + dW/dx``.

The lognormal multiplier has conditional mean exactly 1 (the ``-dt/(2 dx)``
drift), never depends on the field, and is strictly positive, so the scheme
preserves positivity, is exactly linear in the initial condition and has the
semigroup mean: ``E[Z(t, .)] = heat_step(initial field, t)`` to machine
precision.  When a multiplicative field exceeds ``e^300`` the evolution
switches to log space, which is exact for this scheme.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import ADDITIVE, MODES, MULTIPLICATIVE, FieldState
from .grid import GridSpec
from .heat import heat_step_values
from .initial_data import InitialDatum, make_initial_field
from .noise import NoiseRealization
from .path import Path

LOG_SPACE_SWITCH = math.exp(300)


@dataclass(frozen=True)
class Trajectory:
    """One replica: the temporal path at x = 0 plus optional field snapshots.

    ``origin_is_log`` is set when the multiplicative run grew past the
    ``e^300`` switch: the origin path then stores log Z (Z itself is not
    representable in float64), and ``cole_hopf`` readers should use the
    values directly.
    """

    grid: GridSpec
    ic: InitialDatum | None
    mode: str
    seed: int
    stream_id: int
    origin_path: Path
    snapshots: list[FieldState] = dc_field(default_factory=list)
    origin_is_log: bool = False


class SolverOverflowError(FloatingPointError):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


def _check_finite(values: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(values)):
        raise SolverOverflowError(step, "field overflowed or became NaN")


def solve(
    grid: GridSpec,
    ic: InitialDatum | None,
    noise: NoiseRealization,
    mode: str = MULTIPLICATIVE,
    snapshot_times: tuple[float, ...] = (),
) -> Trajectory:
    """Run one replica over the full grid horizon.

    ``noise`` must live on the same grid.  Additive mode starts from the zero
    field and must be called with ``ic=None``; multiplicative mode requires an
    initial datum.  ``snapshot_times`` are absolute times and must be lattice
    times.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if noise.grid != grid:
        raise ValueError("noise was sampled on a different grid")
    if mode == ADDITIVE:
        if ic is not None:
            raise ValueError("additive mode forces a zero initial field; pass ic=None")
        t_abs = grid.t_start
        values = np.zeros(grid.nx)
    else:
        if ic is None:
            raise ValueError("multiplicative mode requires an initial datum")
        f0 = make_initial_field(grid, ic)
        t_abs = f0.t_abs
        values = f0.values.copy()
    return _solve_field(grid, ic, values, t_abs, noise, mode, snapshot_times)


def _solve_field(
    grid: GridSpec,
    ic: InitialDatum | None,
    values: np.ndarray,
    t_abs0: float,
    noise: NoiseRealization,
    mode: str,
    snapshot_times: tuple[float, ...] = (),
) -> Trajectory:
    dx, dt = grid.dx, grid.dt
    i0 = grid.origin_index()
    n_steps = noise.increments.shape[0]
    drift = dt / (2.0 * dx)

    snap_steps: dict[int, float] = {}
    for t_snap in snapshot_times:
        n = round((t_snap - t_abs0) / dt)
        if abs((t_snap - t_abs0) / dt - n) > 1e-8 or not (0 <= n <= n_steps):
            raise ValueError(f"snapshot time {t_snap!r} is not a lattice time of this run")
        snap_steps[int(n)] = t_snap

    origin = np.empty(n_steps + 1)
    origin[0] = values[i0]
    snapshots: list[FieldState] = []
    log_space = False

    def record(step: int, v: np.ndarray) -> None:
        if step in snap_steps:
            out = np.exp(v) if log_space else v.copy()
            snapshots.append(
                FieldState(grid=grid, t_abs=t_abs0 + step * dt, values=out, mode=mode)
            )

    _check_finite(values, 0)
    record(0, values)
    for n in range(n_steps):
        kick = noise.increments[n] / dx
        if mode == ADDITIVE:
            values = heat_step_values(values, dx, dt)
            values += kick
        elif not log_space:
            values = heat_step_values(values, dx, dt)
            values *= np.exp(kick - drift)
            if np.max(values) > LOG_SPACE_SWITCH:
                # convert the whole record once; exact for the scheme
                with np.errstate(divide="ignore"):
                    values = np.log(values)
                    origin[: n + 1] = np.log(origin[: n + 1])
                log_space = True
        else:
            # shift so the heat step runs on O(1) numbers; exact for the scheme
            m = float(np.max(values))
            w = heat_step_values(np.exp(values - m), dx, dt)
            with np.errstate(divide="ignore"):
                values = np.log(np.maximum(w, 0.0)) + m
            values += kick - drift
        if not log_space:
            _check_finite(values, n + 1)
        origin[n + 1] = values[i0]
        record(n + 1, values)

    path = Path(t0=t_abs0, dt=dt, values=origin)
    return Trajectory(
        grid=grid,
        ic=ic,
        mode=mode,
        seed=noise.seed,
        stream_id=noise.stream_id,
        origin_path=path,
        snapshots=snapshots,
        origin_is_log=log_space,
    )


def cole_hopf(path: Path) -> Path:
    """Pointwise natural log of a positive-valued path."""
    bad = np.nonzero(~(path.values > 0))[0]
    if bad.size:
        raise ValueError(f"cole_hopf: value at index {int(bad[0])} is not > 0")
    return Path(t0=path.t0, dt=path.dt, values=np.log(path.values), times=path.times)


def scaled_height(traj: Trajectory, t: float, alpha: float = 1.0, x: float = 0.0) -> float:
    """Height under the 1:2:3 scaling: ``[log Z(alpha t, t^{2/3} x) + alpha t / 24] / t^{1/3}``.

    ``x = 0`` reads the stored origin path; other x read the snapshot at time
    ``alpha t`` at the nearest lattice point.
    """
    from .initial_data import NARROW_WEDGE

    if traj.ic is None or traj.ic.kind != NARROW_WEDGE:
        raise ValueError("scaled height is defined for narrow-wedge trajectories")
    if t <= 0:
        raise ValueError("need t > 0")
    t_read = alpha * t
    p = traj.origin_path
    if not (p.t0 <= t_read <= p.t_end + 1e-12):
        raise ValueError(f"alpha*t = {t_read:g} outside trajectory horizon [{p.t0:g}, {p.t_end:g}]")
    if x == 0.0:
        z = p.values[p.index_of(t_read, "alpha*t")]
    else:
        snap = next((s for s in traj.snapshots if abs(s.t_abs - t_read) <= 1e-9), None)
        if snap is None:
            raise ValueError(f"no snapshot stored at time {t_read:g} for off-origin readout")
        xi = np.argmin(np.abs(traj.grid.x - t ** (2.0 / 3.0) * x))
        z = snap.values[int(xi)]
    if not z > 0:
        raise ValueError("Z value is not positive; cannot take log")
    return (math.log(z) + alpha * t / 24.0) / t ** (1.0 / 3.0)


def stationarity_transform(field: FieldState) -> FieldState:
    """Multiply a narrow-wedge field at time s by ``exp(y^2 / (2 s))``.

    Computed in log space so the parabolic weight does not overflow where the
    field itself has decayed; non-positive entries map to 0.
    """
    s = field.t_abs
    if s <= 0:
        raise ValueError("stationarity transform requires absolute time > 0")
    if field.mode != MULTIPLICATIVE:
        raise ValueError("stationarity transform applies to multiplicative fields")
    y = field.grid.x
    with np.errstate(divide="ignore"):
        logv = np.where(field.values > 0, np.log(np.maximum(field.values, 1e-300)), -np.inf)
    out = np.exp(logv + y * y / (2.0 * s))
    return FieldState(grid=field.grid, t_abs=s, values=out, mode=field.mode)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_trajectory(traj: Trajectory, filename: str) -> None:
    """Binary container: grid/ic/seed header, origin path, snapshots."""
    g = traj.grid
    header = {
        "grid": [g.x_min, g.x_max, g.nx, g.t_start, g.t_end, g.nt],
        "mode": traj.mode,
        "seed": traj.seed,
        "stream_id": traj.stream_id,
        "ic": None
        if traj.ic is None
        else {"kind": traj.ic.kind, "expr": traj.ic.expr, "seed": traj.ic.seed, "t0": traj.ic.t0},
        "path_t0": traj.origin_path.t0,
        "path_dt": traj.origin_path.dt,
        "snapshot_times": [s.t_abs for s in traj.snapshots],
    }
    arrays = {"origin": traj.origin_path.values}
    if traj.ic is not None and traj.ic.table is not None:
        arrays["ic_table"] = traj.ic.table
    for i, s in enumerate(traj.snapshots):
        arrays[f"snapshot_{i}"] = s.values
    np.savez(filename, header=json.dumps(header), **arrays)


def load_trajectory(filename: str) -> Trajectory:
    with np.load(filename, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        gx = header["grid"]
        grid = GridSpec(gx[0], gx[1], int(gx[2]), gx[3], gx[4], int(gx[5]))
        ic = None
        if header["ic"] is not None:
            h = header["ic"]
            table = data["ic_table"] if "ic_table" in data else None
            ic = InitialDatum(kind=h["kind"], expr=h["expr"], table=table, seed=h["seed"], t0=h["t0"])
        path = Path(t0=header["path_t0"], dt=header["path_dt"], values=data["origin"])
        snaps = [
            FieldState(grid=grid, t_abs=t, values=data[f"snapshot_{i}"], mode=header["mode"])
            for i, t in enumerate(header["snapshot_times"])
        ]
    return Trajectory(
        grid=grid,
        ic=ic,
        mode=header["mode"],
        seed=int(header["seed"]),
        stream_id=int(header["stream_id"]),
        origin_path=path,
        snapshots=snaps,
    )

