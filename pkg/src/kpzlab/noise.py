"""Reproducible discrete space-time white noise.

Every noise cell ``dW[n, i]`` is Gaussian with mean 0 and variance ``dt*dx``
(the white-noise measure of the cell), independent across cells.  A replica's
whole array is a pure function of ``(grid, seed, stream_id)``: each replica
owns a counter-based Philox stream keyed by ``(seed, stream_id)`` and consumed
in row-major order, so distinct replicas can be generated on any schedule --
thread pools, processes, one at a time -- with bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isnan, sqrt

import numpy as np
from numpy.random import Generator, Philox

from .grid import GridSpec

# Key-domain tags keep the solver noise, Brownian initial data and fBm draws
# on disjoint Philox streams even if the user reuses one integer seed.
DOMAIN_NOISE = 0
DOMAIN_INITIAL_DATA = 1
DOMAIN_FBM = 2

_DOMAIN_SALT = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, odd

MAX_SEED = 2**64 - 1


def philox_key(seed: int, stream_id: int, domain: int) -> np.ndarray:
    """128-bit Philox key for one (seed, stream, domain) triple."""
    if not (0 <= seed <= MAX_SEED):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    if not (0 <= stream_id <= MAX_SEED):
        raise ValueError(f"stream_id must be a 64-bit unsigned integer, got {stream_id!r}")
    hi = (stream_id ^ (domain * _DOMAIN_SALT)) % 2**64
    return np.array([seed, hi], dtype=np.uint64)


def stream_generator(seed: int, stream_id: int, domain: int = DOMAIN_NOISE) -> Generator:
    """Fresh Generator positioned at the start of the (seed, stream) stream."""
    return Generator(Philox(key=philox_key(seed, stream_id, domain)))


@dataclass(frozen=True)
class NoiseRealization:
    """One replica of discrete space-time white noise on a grid."""

    grid: GridSpec
    seed: int
    stream_id: int
    increments: np.ndarray  # shape (nt, nx), cell variance dt*dx


def sample_noise(grid: GridSpec, seed: int, stream_id: int = 0) -> NoiseRealization:
    """Draw the full ``nt x nx`` noise array for one replica.

    Identical ``(grid, seed, stream_id)`` always produces a bit-identical
    array; the values equal those produced by consuming the same stream in
    row chunks (the solver's streaming path).
    """
    g = stream_generator(seed, stream_id, DOMAIN_NOISE)
    z = g.standard_normal(grid.nt * grid.nx)
    dw = z.reshape(grid.nt, grid.nx)
    dw *= sqrt(grid.dt * grid.dx)
    return NoiseRealization(grid=grid, seed=int(seed), stream_id=int(stream_id), increments=dw)


@dataclass(frozen=True)
class NoiseStats:
    mean: float
    variance: float
    lag1_space: float
    lag1_time: float
    correlation_defined: bool


def _sample_corr(a: np.ndarray, b: np.ndarray) -> float:
    a = a.ravel()
    b = b.ravel()
    a = a - a.mean()
    b = b - b.mean()
    denom = sqrt(float(a @ a) * float(b @ b))
    if denom == 0.0:
        return float("nan")
    return float(a @ b) / denom


def noise_statistics(noise: NoiseRealization) -> NoiseStats:
    """Exact sample statistics of a realization (test support)."""
    dw = noise.increments
    mean = float(dw.mean())
    variance = float(dw.var())
    cs = _sample_corr(dw[:, :-1], dw[:, 1:]) if dw.shape[1] > 1 else float("nan")
    ct = _sample_corr(dw[:-1, :], dw[1:, :]) if dw.shape[0] > 1 else float("nan")
    defined = not (isnan(cs) or isnan(ct))
    return NoiseStats(mean, variance, cs, ct, defined)
