"""Batched multi-replica evolution for Monte Carlo runs.

Replicas are partitioned into fixed-size blocks (a code constant, never a
function of the worker count) and each block is evolved as one ``(B, nx)``
array: one batched FFT pair and one fused noise stage per time step.  Replica
``r`` consumes its own noise stream ``(seed, stream_id = r)`` row-by-row, so
the values entering the arithmetic are exactly those of
:func:`kpzlab.noise.sample_noise`, and the output is a pure function of
``(grid, ic, mode, seed, n_replicas)`` regardless of thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .fields import ADDITIVE, MODES, MULTIPLICATIVE
from .grid import GridSpec
from .heat import _decay_factors
from .initial_data import InitialDatum, make_initial_field
from .noise import DOMAIN_NOISE, stream_generator
from .path import Path
from .solver import LOG_SPACE_SWITCH, SolverOverflowError

#: rows per block; fixed so that results do not depend on the worker count
BLOCK_ROWS = 64
#: noise rows buffered per generator pull
CHUNK_STEPS = 64
#: full-field finite check cadence (origin column is checked every step)
CHECK_EVERY = 32


@dataclass(frozen=True)
class EnsembleResult:
    """Origin paths for all replicas, plus an optional common-time snapshot."""

    grid: GridSpec
    mode: str
    seed: int
    t0_abs: float
    origin: np.ndarray  # (n_replicas, nt+1)
    snapshot_time: float | None = None
    snapshot: np.ndarray | None = None  # (n_replicas, nx)

    @property
    def n_replicas(self) -> int:
        return int(self.origin.shape[0])

    def paths(self) -> list[Path]:
        dt = self.grid.dt
        return [Path(t0=self.t0_abs, dt=dt, values=row) for row in self.origin]


def run_ensemble(
    grid: GridSpec,
    ic: InitialDatum | None,
    mode: str,
    seed: int,
    n_replicas: int,
    snapshot_time: float | None = None,
    threads: int = 1,
) -> EnsembleResult:
    """Evolve ``n_replicas`` independent replicas (streams ``0..n-1``).

    The initial field is built once from ``ic`` and shared by every replica;
    the ensemble is over the driving noise.  ``snapshot_time`` (absolute,
    lattice-aligned) stores the full field of every replica at that time.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if n_replicas < 1:
        raise ValueError("n_replicas must be >= 1")
    if mode == ADDITIVE:
        if ic is not None:
            raise ValueError("additive mode forces a zero initial field; pass ic=None")
        init = np.zeros(grid.nx)
        t0_abs = grid.t_start
    else:
        if ic is None:
            raise ValueError("multiplicative mode requires an initial datum")
        f0 = make_initial_field(grid, ic)
        init = f0.values
        t0_abs = f0.t_abs

    n_steps = grid.nt
    snap_step = None
    if snapshot_time is not None:
        ratio = (snapshot_time - t0_abs) / grid.dt
        snap_step = round(ratio)
        if abs(ratio - snap_step) > 1e-8 or not (0 <= snap_step <= n_steps):
            raise ValueError(f"snapshot time {snapshot_time!r} is not a lattice time")

    origin = np.empty((n_replicas, n_steps + 1))
    snapshot = np.empty((n_replicas, grid.nx)) if snap_step is not None else None

    blocks = [(b, min(b + BLOCK_ROWS, n_replicas)) for b in range(0, n_replicas, BLOCK_ROWS)]

    def run_block(span: tuple[int, int]) -> None:
        lo, hi = span
        _evolve_block(
            grid, init, mode, seed, lo, hi, n_steps, snap_step,
            origin[lo:hi], None if snapshot is None else snapshot[lo:hi],
        )

    if threads <= 1 or len(blocks) == 1:
        for span in blocks:
            run_block(span)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, blocks))

    return EnsembleResult(
        grid=grid,
        mode=mode,
        seed=int(seed),
        t0_abs=t0_abs,
        origin=origin,
        snapshot_time=snapshot_time,
        snapshot=snapshot,
    )


def _evolve_block(
    grid: GridSpec,
    init: np.ndarray,
    mode: str,
    seed: int,
    lo: int,
    hi: int,
    n_steps: int,
    snap_step: int | None,
    origin_out: np.ndarray,
    snapshot_out: np.ndarray | None,
) -> None:
    nb = hi - lo
    nx, dx, dt = grid.nx, grid.dx, grid.dt
    i0 = grid.origin_index()
    s = math.sqrt(dt / dx)  # std of dW/dx per cell
    drift = dt / (2.0 * dx)
    decay = _decay_factors(nx, dx, dt)
    gens = [stream_generator(seed, r, DOMAIN_NOISE) for r in range(lo, hi)]

    fields = np.tile(init, (nb, 1))
    origin_out[:, 0] = fields[:, i0]
    if snap_step == 0 and snapshot_out is not None:
        snapshot_out[:] = fields
    chunk = np.empty((CHUNK_STEPS, nb, nx))

    for n in range(n_steps):
        j = n % CHUNK_STEPS
        if j == 0:
            rows = min(CHUNK_STEPS, n_steps - n)
            for r, g in enumerate(gens):
                chunk[:rows, r, :] = g.standard_normal(rows * nx).reshape(rows, nx)
        z = chunk[j]

        if mode == MULTIPLICATIVE:
            spec = sfft.rfft(fields, axis=-1)
            spec *= decay
            fields = sfft.irfft(spec, n=nx, axis=-1)
            np.multiply(z, s, out=z)
            np.subtract(z, drift, out=z)
            np.exp(z, out=z)
            np.multiply(fields, z, out=fields)
            if np.max(fields) > LOG_SPACE_SWITCH:
                # batched runs target O(1) statistics data; the log-space
                # evolution for huge fields lives in solver.solve()
                raise SolverOverflowError(
                    n + 1, "field exceeded the log-space threshold; use solve() per replica"
                )
        else:
            spec = sfft.rfft(fields, axis=-1)
            spec *= decay
            fields = sfft.irfft(spec, n=nx, axis=-1)
            np.multiply(z, s, out=z)
            fields += z

        origin_out[:, n + 1] = fields[:, i0]
        if not np.all(np.isfinite(origin_out[:, n + 1])) or (
            (n + 1) % CHECK_EVERY == 0 and not np.all(np.isfinite(fields))
        ):
            bad = int(np.argmax(~np.isfinite(fields).all(axis=-1)))
            raise SolverOverflowError(n + 1, f"replica {lo + bad} overflowed or became NaN")
        if snap_step == n + 1 and snapshot_out is not None:
            snapshot_out[:] = fields
