"""Exact fractional Brownian motion generators and the KPZ normalisation.

Two exact-in-distribution samplers: dense Cholesky factorisation of the
covariance (arbitrary time sets, cost-capped), and circulant embedding of the
increment covariance (uniform dyadic grids up to 2^26 points, near-linear
cost).  Both are deterministic in ``(seed, stream_id)`` and are cross-checked
against each other distributionally in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .noise import DOMAIN_FBM, stream_generator
from .path import Path

#: multiplies an fBm(1/4) path to match the KPZ temporal normalisation
KPZ_SCALE = (2.0 / math.pi) ** 0.25

CHOLESKY_MAX_TIMES = 8192
CIRCULANT_MAX_N = 2**26


@dataclass(frozen=True)
class FbmSpec:
    """Sampling request: Hurst parameter, time set, method and stream."""

    hurst: float
    times: np.ndarray
    method: str = "cholesky"
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        _check_hurst(self.hurst)
        ts = np.asarray(self.times, dtype=np.float64)
        if ts.ndim != 1 or ts.size < 1:
            raise ValueError("times must be a nonempty 1-D array")
        if ts[0] < 0 or np.any(np.diff(ts) <= 0):
            raise ValueError("times must be strictly increasing and >= 0")
        if self.method not in ("cholesky", "circulant"):
            raise ValueError("method must be 'cholesky' or 'circulant'")
        object.__setattr__(self, "times", ts)


def _check_hurst(H: float) -> None:
    if not (0.0 < H < 1.0):
        raise ValueError(f"Hurst parameter must lie in (0, 1), got {H!r}")


def fbm_covariance(H: float, s: float, t: float) -> float:
    """``Cov(X_s, X_t) = (s^2H + t^2H - |t-s|^2H) / 2`` for fBm pinned at 0."""
    _check_hurst(H)
    if s < 0 or t < 0:
        raise ValueError("times must be >= 0")
    return 0.5 * (s ** (2 * H) + t ** (2 * H) - abs(t - s) ** (2 * H))


def fbm_increment_covariance(H: float, t1: float, t2: float, eps: float) -> float:
    """Covariance of the increments over ``[t1, t1+eps]`` and ``[t2, t2+eps]``."""
    _check_hurst(H)
    d = abs(t2 - t1)
    return 0.5 * ((d + eps) ** (2 * H) + abs(d - eps) ** (2 * H) - 2 * d ** (2 * H))


def covariance_matrix(H: float, times: np.ndarray) -> np.ndarray:
    ts = np.asarray(times, dtype=np.float64)
    p = ts ** (2 * H)
    return 0.5 * (p[:, None] + p[None, :] - np.abs(ts[:, None] - ts[None, :]) ** (2 * H))


def _cholesky_factor(H: float, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor of the covariance on the nonzero times; zero times carry X = 0."""
    nonzero = times > 0
    c = covariance_matrix(H, times[nonzero])
    try:
        L = np.linalg.cholesky(c)
    except np.linalg.LinAlgError as err:
        raise ValueError(
            "covariance matrix is numerically non-positive "
            "(times too close for float64)"
        ) from err
    return L, nonzero


def sample_fbm_cholesky(spec: FbmSpec) -> Path:
    """One exact Gaussian sample with the fBm covariance on ``spec.times``."""
    times = spec.times
    if times.size > CHOLESKY_MAX_TIMES:
        raise ValueError(f"cholesky sampler is capped at {CHOLESKY_MAX_TIMES} times")
    L, nonzero = _cholesky_factor(spec.hurst, times)
    g = stream_generator(spec.seed, spec.stream_id, DOMAIN_FBM)
    z = g.standard_normal(int(nonzero.sum()))
    x = np.zeros(times.size)
    x[nonzero] = L @ z
    return _path_from_times(times, x)


def sample_fbm_cholesky_batch(spec: FbmSpec, n_samples: int) -> np.ndarray:
    """``(n_samples, len(times))`` exact samples from one stream (row-major draws)."""
    times = spec.times
    if times.size > CHOLESKY_MAX_TIMES:
        raise ValueError(f"cholesky sampler is capped at {CHOLESKY_MAX_TIMES} times")
    L, nonzero = _cholesky_factor(spec.hurst, times)
    g = stream_generator(spec.seed, spec.stream_id, DOMAIN_FBM)
    z = g.standard_normal((n_samples, int(nonzero.sum())))
    out = np.zeros((n_samples, times.size))
    out[:, nonzero] = z @ L.T
    return out


def _path_from_times(times: np.ndarray, values: np.ndarray) -> Path:
    if times.size >= 2:
        gaps = np.diff(times)
        if np.allclose(gaps, gaps[0], rtol=1e-12, atol=0):
            return Path(t0=float(times[0]), dt=float(gaps[0]), values=values)
    return Path(t0=float(times[0]), dt=0.0, values=values, times=times)


@lru_cache(maxsize=8)
def _circulant_sqrt_eigs(H: float, n: int) -> np.ndarray:
    """sqrt of the circulant-embedding eigenvalues for unit-spacing fGn."""
    j = np.arange(n + 1, dtype=np.float64)
    gamma = 0.5 * ((j + 1) ** (2 * H) - 2 * j ** (2 * H) + np.abs(j - 1) ** (2 * H))
    row = np.concatenate([gamma, gamma[-2:0:-1]])  # length 2n
    eigs = np.fft.fft(row).real
    tol = 1e-12 * float(np.max(eigs))
    if np.min(eigs) < -tol:
        raise ValueError(
            f"negative circulant embedding eigenvalue ({np.min(eigs):g}); "
            "invalid increment covariance"
        )
    eigs = np.maximum(eigs, 0.0)
    out = np.sqrt(eigs)
    out.setflags(write=False)
    return out


def sample_fbm_circulant(H: float, n: int, dt: float, seed: int, stream_id: int = 0) -> Path:
    """Exact stationary-increment fBm sample of length ``n+1`` starting at 0.

    ``n`` must be a power of two (capped at 2^26).  Draw layout from the
    stream: ``z[0], z[1]`` are the two real spectral components, then n-1
    real parts and n-1 imaginary parts.
    """
    _check_hurst(H)
    if n < 1 or (n & (n - 1)) != 0 or n > CIRCULANT_MAX_N:
        raise ValueError(f"n must be a power of two <= {CIRCULANT_MAX_N}, got {n}")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    sqrt_eigs = _circulant_sqrt_eigs(float(H), int(n))
    g = stream_generator(seed, stream_id, DOMAIN_FBM)
    z = g.standard_normal(2 * n)
    spec = np.empty(2 * n, dtype=np.complex128)
    spec[0] = z[0]
    spec[n] = z[1]
    half = (z[2 : n + 1] + 1j * z[n + 1 : 2 * n]) / math.sqrt(2.0)
    spec[1:n] = half
    spec[n + 1 :] = np.conj(half[::-1])
    spec *= sqrt_eigs
    fgn = math.sqrt(2 * n) * np.fft.ifft(spec).real[:n]
    fgn *= dt**H
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(fgn, out=values[1:])
    return Path(t0=0.0, dt=float(dt), values=values)


def sample_fbm(spec: FbmSpec) -> Path:
    """Dispatch on ``spec.method`` (circulant needs a uniform dyadic grid)."""
    if spec.method == "cholesky":
        return sample_fbm_cholesky(spec)
    times = spec.times
    if times.size < 2 or times[0] != 0.0:
        raise ValueError("circulant method needs uniform times starting at 0")
    gaps = np.diff(times)
    if not np.allclose(gaps, gaps[0], rtol=1e-12, atol=0):
        raise ValueError("circulant method requires uniform spacing")
    return sample_fbm_circulant(spec.hurst, times.size - 1, float(gaps[0]), spec.seed, spec.stream_id)


def rescale_to_kpz(path: Path) -> Path:
    """Scale an fBm(1/4) path by ``(2/pi)^(1/4)``, the KPZ temporal factor."""
    return Path(t0=path.t0, dt=path.dt, values=path.values * KPZ_SCALE, times=path.times)


def shifted(path: Path, t0: float) -> Path:
    """Relabel a uniform path to start at ``t0``.

    For stationary-increment processes (all fBm samples) the increments of
    the relabeled path have exactly the law of the original's, which is what
    the increment-based estimators consume.
    """
    path.require_uniform()
    return Path(t0=float(t0), dt=path.dt, values=path.values)
