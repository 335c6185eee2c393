"""Oracle-backed cross-checks tying simulation output to the limit laws.

Each check compares a Monte Carlo measurement against an exact or asymptotic
oracle and returns a :class:`CheckReport`.  Tolerances are standard-error
based where the oracle is exact and fractional bands where continuum-vs-grid
bias enters; every report is reproducible bit-for-bit from (config, seed).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec
from .heat import heat_step_values, linear_increment_variance
from .initial_data import InitialDatum, make_initial_field
from .noise import NoiseRealization
from .path import Path
from .pathstats import KsResult, ks_normality, standardized_increments


@dataclass(frozen=True)
class CheckReport:
    name: str
    target: float
    measured: float
    se: float
    tolerance: float
    passed: bool
    n_replicas: int
    runtime_s: float
    note: str = ""

    @staticmethod
    def build(
        name: str,
        target: float,
        measured: float,
        se: float,
        tolerance: float,
        n_replicas: int,
        started: float,
        note: str = "",
    ) -> "CheckReport":
        return CheckReport(
            name=name,
            target=float(target),
            measured=float(measured),
            se=float(se),
            tolerance=float(tolerance),
            passed=bool(abs(measured - target) <= tolerance),
            n_replicas=int(n_replicas),
            runtime_s=time.perf_counter() - started,
            note=note,
        )


def _variance_and_se(x: np.ndarray) -> tuple[float, float]:
    """Sample variance and its moment-based standard error."""
    n = x.size
    v = float(np.var(x, ddof=1))
    m4 = float(np.mean((x - x.mean()) ** 4))
    se = math.sqrt(max(m4 - v * v, 0.0) / n)
    return v, se


def increment_variance_ratio(
    paths: list[Path],
    t: float,
    epsilon: float,
    normalizer: str = "linear_oracle",
    path_kind: str = "V",
    tol_se: float | None = 3.0,
    tol_rel: float | None = None,
    name: str | None = None,
) -> CheckReport:
    """Sample increment variance divided by its predicted value.

    ``linear_oracle`` divides by the exact closed-form variance of the
    additive-equation increment; ``asymptotic`` divides by
    ``sqrt(2/pi) sqrt(eps)`` times the sample mean of ``Z_t^2`` for Z paths
    (1 for already-logarithmic H paths).
    """
    started = time.perf_counter()
    if len(paths) < 200:
        raise ValueError(f"need at least 200 paths, got {len(paths)}")
    if normalizer not in ("linear_oracle", "asymptotic"):
        raise ValueError("normalizer must be 'linear_oracle' or 'asymptotic'")
    vals_t = np.empty(len(paths))
    vals_te = np.empty(len(paths))
    for i, p in enumerate(paths):
        ia = p.index_of(t, "t")
        ib = ia + p.steps_of(epsilon) if p.uniform else p.index_of(t + epsilon, "t+eps")
        vals_t[i] = p.values[ia]
        vals_te[i] = p.values[ib]
    var, se = _variance_and_se(vals_te - vals_t)
    if normalizer == "linear_oracle":
        denom = linear_increment_variance(t, epsilon)
        note = f"oracle variance {denom:.7g}"
    else:
        denom = math.sqrt(2.0 / math.pi) * math.sqrt(epsilon)
        if path_kind == "Z":
            denom *= float(np.mean(vals_t**2))
        note = f"asymptotic normalizer {denom:.7g} ({path_kind} paths)"
    ratio = var / denom
    se_ratio = se / denom
    tolerance = tol_rel if tol_rel is not None else tol_se * se_ratio
    return CheckReport.build(
        name or f"increment_variance_ratio(t={t:g}, eps={epsilon:g}, {normalizer})",
        1.0,
        ratio,
        se_ratio,
        tolerance,
        len(paths),
        started,
        note,
    )


def linearity_check(
    grid: GridSpec,
    noise: NoiseRealization,
    ic1: InitialDatum,
    ic2: InitialDatum,
    tolerance: float = 1e-10,
) -> CheckReport:
    """Superposition under shared noise: ``Z^{g1+g2} = Z^{g1} + Z^{g2}``.

    The scheme's noise stage never depends on the field, so the deviation is
    pure floating-point round-off; measured as the max over all lattice
    points and steps of ``|Z12 - Z1 - Z2|`` relative to the max of
    ``|Z1 + Z2|`` at that step.
    """
    started = time.perf_counter()
    f1 = make_initial_field(grid, ic1)
    f2 = make_initial_field(grid, ic2)
    if abs(f1.t_abs - f2.t_abs) > 1e-12:
        raise ValueError("initial data start at different absolute times")
    dx, dt = grid.dx, grid.dt
    drift = dt / (2.0 * dx)
    v1 = f1.values.copy()
    v2 = f2.values.copy()
    v12 = v1 + v2
    worst = 0.0
    for n in range(grid.nt):
        mult = np.exp(noise.increments[n] / dx - drift)
        v1 = heat_step_values(v1, dx, dt) * mult
        v2 = heat_step_values(v2, dx, dt) * mult
        v12 = heat_step_values(v12, dx, dt) * mult
        dev = float(np.max(np.abs(v12 - v1 - v2)))
        scale = float(np.max(np.abs(v1 + v2)))
        if scale > 0:
            worst = max(worst, dev / scale)
    return CheckReport.build(
        "solver_linearity", 0.0, worst, 0.0, tolerance, 1, started,
        f"{grid.nt} steps on nx={grid.nx}",
    )


@dataclass(frozen=True)
class GaussianLimitReport:
    times: tuple[float, ...]
    epsilon: float
    correlations: np.ndarray  # (k, k)
    ks_results: list[KsResult]
    max_abs_correlation: float
    corr_tolerance: float
    passed: bool
    n_replicas: int
    runtime_s: float

    def to_check_report(self) -> CheckReport:
        return CheckReport(
            name=f"gaussian_limit(times={self.times}, eps={self.epsilon:g})",
            target=0.0,
            measured=self.max_abs_correlation,
            se=1.0 / math.sqrt(self.n_replicas),
            tolerance=self.corr_tolerance,
            passed=self.passed,
            n_replicas=self.n_replicas,
            runtime_s=self.runtime_s,
            note="; ".join(f"KS={k.statistic:.4f}<{k.threshold:.4f}" for k in self.ks_results),
        )


def gaussian_limit_check(
    paths: list[Path],
    times: list[float],
    epsilon: float,
    corr_tolerance: float = 0.1,
) -> GaussianLimitReport:
    """Joint-normality probe: decorrelation plus marginal KS at distinct times."""
    started = time.perf_counter()
    if len(paths) < 500:
        raise ValueError(f"need at least 500 paths, got {len(paths)}")
    ts = sorted(float(t) for t in times)
    if len(set(ts)) != len(ts):
        raise ValueError("times must be pairwise distinct")
    for a, b in zip(ts, ts[1:]):
        if a + epsilon > b:
            raise ValueError(f"increments at {a:g} and {b:g} overlap for eps={epsilon:g}")
    cols = [standardized_increments(paths, t, epsilon) for t in ts]
    mat = np.column_stack(cols)
    if np.any(np.std(mat, axis=0) == 0.0):
        # duplicated path objects or constant inputs: degenerate sample
        corr = np.ones((len(ts), len(ts)))
        max_abs = 1.0
    else:
        corr = np.corrcoef(mat, rowvar=False)
        off = corr[~np.eye(len(ts), dtype=bool)]
        max_abs = float(np.max(np.abs(off))) if off.size else 0.0
    ks = [ks_normality(c) for c in cols]
    passed = max_abs <= corr_tolerance and all(k.passed for k in ks)
    return GaussianLimitReport(
        times=tuple(ts),
        epsilon=float(epsilon),
        correlations=corr,
        ks_results=ks,
        max_abs_correlation=max_abs,
        corr_tolerance=float(corr_tolerance),
        passed=passed,
        n_replicas=len(paths),
        runtime_s=time.perf_counter() - started,
    )


def normalizer_consistency(t: float, epsilon: float) -> float:
    """Ratio of the exact linear oracle to its small-eps asymptote (pure function)."""
    return linear_increment_variance(t, epsilon) / (math.sqrt(2.0 / math.pi) * math.sqrt(epsilon))
