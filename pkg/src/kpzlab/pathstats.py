"""Sample-path estimators: variation, increments, LIL/MOC profiles, fractals.

All logarithms are natural.  Scale parameters must be exact multiples of the
path's sampling step; anything else is a hard error rather than a silent
snap, because the eps^(1/4) scalings under study are corrupted by snapping.
The LIL and MOC profiles additionally enforce a resolution floor of
``16 * dt`` on scheme-generated (uniform) paths; exact-generator tests may
relax it with ``allow_fine_scales=True`` since their increments carry no
discretisation bias at any lag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _kernels
from .path import Path

#: limit of the quartic variation of the KPZ temporal path per unit time
QUARTIC_VARIATION_RATE = 6.0 / math.pi
#: shared constant of the iterated-logarithm law and the modulus of continuity
MOC_LIL_CONSTANT = (8.0 / math.pi) ** 0.25
#: standardisation prefactor turning temporal increments into unit normals
INCREMENT_STANDARDIZER = (math.pi / 2.0) ** 0.25

#: resolution floor (in dt units) for profile scales on uniform paths
PROFILE_MIN_DT_MULTIPLE = 16


def _ceil_tol(x: float, tol: float = 1e-9) -> int:
    return int(math.ceil(x - tol))


def _floor_tol(x: float, tol: float = 1e-9) -> int:
    return int(math.floor(x + tol))


# ---------------------------------------------------------------------------
# variation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VariationResult:
    alpha: float
    epsilon: float
    interval: tuple[float, float]
    value: float
    n_increments: int


def alpha_variation(path: Path, alpha: float, epsilon: float, interval: tuple[float, float]) -> VariationResult:
    """Grid sum ``sum_{u in [s+eps, t] cap eps Z} |g(u) - g(u-eps)|^alpha``.

    ``u`` runs over absolute multiples of eps, so the path lattice must be
    anchored on the eps lattice (true for all solver and fBm paths here).
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    s, t = float(interval[0]), float(interval[1])
    path.require_uniform()
    k = path.steps_of(epsilon)
    if k < 1:
        raise ValueError("epsilon must be at least one time step")
    if epsilon > t - s:
        raise ValueError("epsilon exceeds the interval length")
    if s < path.t0 - 1e-12 or t > path.t_end + 1e-12:
        raise ValueError(f"interval [{s}, {t}] is not covered by the path")
    j0r = path.t0 / path.dt
    j0 = round(j0r)
    if abs(j0r - j0) > 1e-6:
        raise ValueError("path origin is not aligned with the epsilon lattice")
    m_min = _ceil_tol(s / epsilon) + 1
    m_max = _floor_tol(t / epsilon)
    if m_max < m_min:
        return VariationResult(alpha, epsilon, (s, t), 0.0, 0)
    m = np.arange(m_min, m_max + 1)
    iu = m * k - j0
    if iu[0] - k < 0 or iu[-1] >= len(path):
        raise ValueError("variation mesh escapes the path (interval/epsilon mismatch)")
    inc = np.abs(path.values[iu] - path.values[iu - k])
    value = float(np.sum(inc**alpha))
    return VariationResult(float(alpha), float(epsilon), (s, t), value, int(m.size))


def standardized_increments(paths: list[Path], t: float, epsilon: float) -> np.ndarray:
    """Per path: ``(pi/2)^(1/4) eps^(-1/4) (g(t+eps) - g(t))``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    out = np.empty(len(paths))
    for i, p in enumerate(paths):
        if p.uniform:
            ia = p.index_of(t, "t")
            ib = ia + p.steps_of(epsilon)
            if ib >= len(p):
                raise ValueError("t + epsilon is outside the path")
        else:
            ia = p.index_of(t, "t")
            ib = p.index_of(t + epsilon, "t+epsilon")
        out[i] = p.values[ib] - p.values[ia]
    return INCREMENT_STANDARDIZER * epsilon**-0.25 * out


# ---------------------------------------------------------------------------
# KS test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KsResult:
    statistic: float
    threshold: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold


def ks_normality(samples: np.ndarray) -> KsResult:
    """One-sample KS distance to the standard normal; 1% threshold ``1.63/sqrt(N)``."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < 50:
        raise ValueError(f"need at least 50 samples, got {n}")
    cdf = ndtr(x)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return KsResult(float(max(d_plus, d_minus)), 1.63 / math.sqrt(n), n)


def ks_two_sample(a: np.ndarray, b: np.ndarray, significance_coeff: float = 1.63) -> KsResult:
    """Two-sample KS distance with threshold ``c sqrt((n+m)/(n m))``."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / a.size
    cdf_b = np.searchsorted(b, allv, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    thr = significance_coeff * math.sqrt((a.size + b.size) / (a.size * b.size))
    return KsResult(d, thr, a.size + b.size)


# ---------------------------------------------------------------------------
# LIL and MOC profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingProfile:
    """Per-level scaling statistics.

    For LIL profiles ``statistics[J]`` is the running max over levels up to J
    (the finite-scale limsup surrogate) and ``level_values`` holds the raw
    per-level normalized increments, whose decay/growth is the readable
    diagnostic.  MOC profiles have independent levels, so the two coincide.
    """

    kind: str  # "LIL" or "MOC"
    depths: np.ndarray
    epsilons: np.ndarray
    statistics: np.ndarray
    target: float
    level_values: np.ndarray | None = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.depths) <= 0):
            raise ValueError("depths must be strictly increasing")
        if self.level_values is None:
            object.__setattr__(self, "level_values", self.statistics)

    @property
    def final(self) -> float:
        return float(self.statistics[-1])


def _profile_scale_check(path: Path, eps: float, allow_fine_scales: bool) -> int:
    k = path.steps_of(eps)
    floor = 1 if allow_fine_scales else PROFILE_MIN_DT_MULTIPLE
    if k < floor:
        raise ValueError(
            f"scale {eps:g} is below {floor} time steps; refine the path grid "
            "(exact-generator paths may pass allow_fine_scales=True)"
        )
    return k


def lil_profile(path: Path, t: float, max_depth: int, allow_fine_scales: bool = False) -> ScalingProfile:
    """Running max of ``(g(t+2^-j) - g(t)) / (eps^(1/4) sqrt(log log(1/eps)))``.

    Levels with ``log log(1/eps) <= 0`` (j < 2) are excluded; the statistic
    at level J is the max over levels up to J, so the profile is monotone by
    construction and its drift across the deepest levels is the directional
    convergence diagnostic.
    """
    if max_depth < 2:
        raise ValueError("max_depth must be at least 2")
    depths = np.arange(2, max_depth + 1)
    stats = np.empty(depths.size)
    levels = np.empty(depths.size)
    eps = 0.5 ** depths.astype(np.float64)
    i_t = path.index_of(t, "t")
    running = -np.inf
    for idx, j in enumerate(depths):
        e = eps[idx]
        if path.uniform:
            k = _profile_scale_check(path, e, allow_fine_scales)
            ib = i_t + k
            if ib >= len(path):
                raise ValueError(f"depth {j} escapes the path horizon")
            inc = path.values[ib] - path.values[i_t]
        else:
            inc = path.values[path.index_of(t + e, "t+eps")] - path.values[i_t]
        denom = e**0.25 * math.sqrt(math.log(math.log(1.0 / e)))
        levels[idx] = inc / denom
        running = max(running, levels[idx])
        stats[idx] = running
    return ScalingProfile("LIL", depths, eps, stats, MOC_LIL_CONSTANT, level_values=levels)


def moc_profile(
    path: Path,
    depths: list[int] | np.ndarray,
    interval: tuple[float, float] = (1.0, 2.0),
    allow_fine_scales: bool = False,
) -> ScalingProfile:
    """Per level: ``sup_{s<t in interval, |t-s| <= eps} |dg| / (eps^(1/4) sqrt(log(1/eps)))``.

    The sup runs over all lattice pairs and is computed with the sliding
    window range kernel (O(n) per level).
    """
    path.require_uniform()
    a, b = float(interval[0]), float(interval[1])
    ia = path.index_of(a, "interval start")
    ib = path.index_of(b, "interval end")
    if ib <= ia:
        raise ValueError("empty interval")
    depths = np.asarray(sorted(int(d) for d in depths))
    seg = path.values[ia : ib + 1]
    eps = 0.5 ** depths.astype(np.float64)
    stats = np.empty(depths.size)
    for idx in range(depths.size):
        e = eps[idx]
        if math.log(1.0 / e) <= 0:
            raise ValueError("MOC scales must satisfy log(1/eps) > 0")
        w = _profile_scale_check(path, e, allow_fine_scales)
        sup = _kernels.window_range_sup(seg, w)
        stats[idx] = sup / (e**0.25 * math.sqrt(math.log(1.0 / e)))
    return ScalingProfile("MOC", depths, eps, stats, MOC_LIL_CONSTANT)


# ---------------------------------------------------------------------------
# Hoelder coefficient
# ---------------------------------------------------------------------------

HOLDER_MAX_POINTS = 2**13


def holder_coefficient(path: Path, beta: float, interval: tuple[float, float]) -> float:
    """Exact ``sup |g(x)-g(y)| / |x-y|^beta`` over lattice pairs in the interval.

    Intervals longer than 2^13 points are strided down to at most 2^13 before
    the quadratic scan (the documented subsampling rule), which makes the
    result a lower bound at full resolution.
    """
    if not (0 < beta <= 1):
        raise ValueError("beta must lie in (0, 1]")
    path.require_uniform()
    ia = path.index_of(interval[0], "interval start")
    ib = path.index_of(interval[1], "interval end")
    if ib <= ia:
        raise ValueError("empty interval")
    seg = path.values[ia : ib + 1]
    stride = 1
    if seg.size > HOLDER_MAX_POINTS:
        stride = -(-seg.size // HOLDER_MAX_POINTS)
        seg = seg[::stride]
    return _kernels.holder_sup(seg, path.dt * stride, beta)


# ---------------------------------------------------------------------------
# exceptional sets and box dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExceptionalSet:
    alpha: float
    resolution: int
    interval: tuple[float, float]
    indices: np.ndarray  # offsets into the interval lattice
    times: np.ndarray
    lattice_dt: float
    n_lattice: int


def exceptional_set(
    path: Path,
    alpha: float,
    resolution: int,
    interval: tuple[float, float] = (1.0, 2.0),
) -> ExceptionalSet:
    """Finite-scale surrogate of the large-increment time set.

    ``t`` is kept when ``max over dyadic delta in [2^-j, 2^-ceil(j/2)]`` of
    ``|g(t+delta) - g(t)| / (delta^(1/4) sqrt(log(1/delta)))`` reaches
    ``alpha * (8/pi)^(1/4)``.  The probe window mirrors how limsup sets look
    at resolution j: a single delta is too noisy, the full range overcounts.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    path.require_uniform()
    a, b = float(interval[0]), float(interval[1])
    ia = path.index_of(a, "interval start")
    ib = path.index_of(b, "interval end")
    m_vals = range(-(-resolution // 2), resolution + 1)  # ceil(j/2) .. j
    deltas = [0.5**m for m in m_vals]
    max_delta_steps = path.steps_of(max(deltas))
    if ib + max_delta_steps >= len(path):
        raise ValueError(
            f"path must extend {max(deltas):g} beyond the interval for the membership probes"
        )
    n_lattice = ib - ia + 1
    member = np.zeros(n_lattice, dtype=bool)
    v = path.values
    for d in deltas:
        w = path.steps_of(d)
        thresh = alpha * MOC_LIL_CONSTANT * d**0.25 * math.sqrt(math.log(1.0 / d))
        inc = np.abs(v[ia + w : ib + 1 + w] - v[ia : ib + 1])
        member |= inc >= thresh
    idx = np.nonzero(member)[0]
    return ExceptionalSet(
        alpha=float(alpha),
        resolution=int(resolution),
        interval=(a, b),
        indices=idx,
        times=a + idx * path.dt,
        lattice_dt=path.dt,
        n_lattice=n_lattice,
    )


@dataclass(frozen=True)
class BoxCountResult:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    fit_residual: float
    empty: bool
    alpha: float | None = None


def box_dimension(
    times: np.ndarray,
    scales: list[float] | np.ndarray,
    interval: tuple[float, float] = (1.0, 2.0),
    alpha: float | None = None,
) -> BoxCountResult:
    """Box-count slope of ``log N(b)`` against ``log(1/b)``.

    Requires at least 4 scales spanning at least two decades.  The empty set
    reports slope 0 with ``empty=True``.
    """
    scales = np.sort(np.asarray(scales, dtype=np.float64))[::-1]
    if scales.size < 4:
        raise ValueError("need at least 4 box scales")
    if scales[0] / scales[-1] < 100.0:
        raise ValueError("box scales must span at least two decades")
    ts = np.asarray(times, dtype=np.float64)
    if ts.size == 0:
        return BoxCountResult(scales, np.zeros(scales.size, dtype=np.int64), 0.0, 0.0, True, alpha)
    a, b_end = float(interval[0]), float(interval[1])
    counts = np.empty(scales.size, dtype=np.int64)
    for i, b in enumerate(scales):
        idx = np.floor((ts - a) / b).astype(np.int64)
        # the interval endpoint belongs to the last covering box
        n_boxes = int(math.ceil((b_end - a) / b))
        counts[i] = np.unique(np.minimum(idx, n_boxes - 1)).size
    logx = np.log(1.0 / scales)
    logy = np.log(counts.astype(np.float64))
    slope, intercept = np.polyfit(logx, logy, 1)
    resid = float(np.sqrt(np.mean((logy - (slope * logx + intercept)) ** 2)))
    return BoxCountResult(scales, counts, float(slope), resid, False, alpha)
