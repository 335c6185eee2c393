"""The acceptance suite: eleven oracle-backed criteria at desk scale.

Every criterion is deterministic given its frozen seed and grid constants.
Monte Carlo ensembles are shared across criteria (the narrow-wedge ensemble
feeds the mean-field, increment-normality and second-moment checks) and are
memoised per process.

Grid constants were chosen with the exact discrete variance oracle
(:func:`kpzlab.heat.discrete_increment_variance`): splitting plus truncation
bias of the linear-equation increment variance is below 2.2% on the additive
grid, below 2.0% on the increment-statistics grid, and below 0.5% on the
quartic-variation grid, all far inside the statistical tolerances they feed.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from .ensemble import EnsembleResult, run_ensemble
from .fbm import (
    FbmSpec,
    covariance_matrix,
    rescale_to_kpz,
    sample_fbm_circulant,
    sample_fbm_cholesky,
    sample_fbm_cholesky_batch,
    shifted,
)
from .fields import ADDITIVE, MULTIPLICATIVE
from .grid import GridSpec
from .heat import heat_kernel, heat_step_values
from .initial_data import function_ic, narrow_wedge
from .noise import sample_noise
from .path import Path
from .pathstats import (
    MOC_LIL_CONSTANT,
    QUARTIC_VARIATION_RATE,
    alpha_variation,
    box_dimension,
    exceptional_set,
    ks_normality,
    lil_profile,
    moc_profile,
    standardized_increments,
)
from .verify import CheckReport, increment_variance_ratio, linearity_check, normalizer_consistency

# frozen seeds, one per ensemble / criterion family
SEED_WEDGE = 20260801
SEED_QUARTIC = 20260802
SEED_ADDITIVE = 20260803
SEED_FBM_COV = 20260804
SEED_FBM_QUARTIC = 20260805
SEED_FBM_MOC = 20260806
SEED_FBM_LIL = 20260807
SEED_FBM_BOX = 20260808
SEED_STRUCTURAL = 20260809

_cache: dict[str, object] = {}


def _memo(key: str, build: Callable[[], object]) -> object:
    if key not in _cache:
        _cache[key] = build()
    return _cache[key]


def clear_cache() -> None:
    _cache.clear()


# ---------------------------------------------------------------------------
# shared ensembles
# ---------------------------------------------------------------------------

#: narrow-wedge increment-statistics ensemble: dx = 1/32, dt = 2^-12,
#: horizon 1 + 2^-6 absolute, snapshot at t = 1
WEDGE_GRID = GridSpec(-6.0, 6.0, 384, 0.0, 1.015625, 4160)
WEDGE_REPLICAS = 2000

#: quartic-variation ensemble: dt = 2^-14 (pinned), dx = 1/56 tuned so the
#: linear increment-variance bias is below 0.5% at eps = 2^-8
QUARTIC_GRID = GridSpec(-8.0, 8.0, 896, 0.0, 2.0, 32768)
QUARTIC_REPLICAS = 200

#: additive-equation ensemble: dt = 1/4000 divides both probe epsilons
ADDITIVE_GRID = GridSpec(-6.0, 6.0, 384, 0.0, 1.04, 4160)
ADDITIVE_REPLICAS = 2000


def _wedge_grid_ensemble() -> EnsembleResult:
    grid = WEDGE_GRID
    ic = narrow_wedge()  # t0 = 10 dt
    return run_ensemble(grid, ic, MULTIPLICATIVE, SEED_WEDGE, WEDGE_REPLICAS, snapshot_time=1.0)


def wedge_ensemble() -> EnsembleResult:
    return _memo("wedge", _wedge_grid_ensemble)  # type: ignore[return-value]


def quartic_ensemble() -> EnsembleResult:
    def build() -> EnsembleResult:
        grid = QUARTIC_GRID
        dt = grid.dt
        ic = narrow_wedge(t0=10 * dt)
        return run_ensemble(grid, ic, MULTIPLICATIVE, SEED_QUARTIC, QUARTIC_REPLICAS)

    return _memo("quartic", build)  # type: ignore[return-value]


def additive_ensemble() -> EnsembleResult:
    def build() -> EnsembleResult:
        return run_ensemble(ADDITIVE_GRID, None, ADDITIVE, SEED_ADDITIVE, ADDITIVE_REPLICAS)

    return _memo("additive", build)  # type: ignore[return-value]


def _wedge_h_paths() -> list[Path]:
    def build() -> list[Path]:
        ens = wedge_ensemble()
        logs = np.log(ens.origin)
        return [Path(t0=ens.t0_abs, dt=ens.grid.dt, values=row) for row in logs]

    return _memo("wedge_h", build)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def criterion_1() -> list[CheckReport]:
    """fBm covariance: 4096 Cholesky samples on 64 times, 4 SE entrywise."""
    started = time.perf_counter()
    times = np.linspace(2.0 / 64, 2.0, 64)
    spec = FbmSpec(hurst=0.25, times=times, seed=SEED_FBM_COV)
    samples = sample_fbm_cholesky_batch(spec, 4096)
    oracle = covariance_matrix(0.25, times)
    emp = samples.T @ samples / samples.shape[0]
    se = np.sqrt((np.outer(np.diag(oracle), np.diag(oracle)) + oracle**2) / samples.shape[0])
    zmax = float(np.max(np.abs(emp - oracle) / se))
    return [
        CheckReport.build(
            "1. fbm_covariance_cholesky", 0.0, zmax, 1.0, 4.0, 4096, started,
            "max |sample cov - oracle| in SE units over all 64x64 entries",
        )
    ]


def criterion_2() -> list[CheckReport]:
    """Quartic variation of exact rescaled fBm(1/4): 6/pi within 5%."""
    started = time.perf_counter()
    n, dt = 2**16, 2.0**-16
    vals = np.empty(64)
    for r in range(64):
        p = shifted(sample_fbm_circulant(0.25, n, dt, SEED_FBM_QUARTIC, r), 1.0)
        vals[r] = alpha_variation(rescale_to_kpz(p), 4.0, dt, (1.0, 2.0)).value
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size))
    return [
        CheckReport.build(
            "2. fbm_quartic_variation", QUARTIC_VARIATION_RATE, mean, se,
            0.05 * QUARTIC_VARIATION_RATE, 64, started,
            f"mean V(4, 2^-16) over [1,2]; per-path SD {vals.std(ddof=1):.4g}",
        )
    ]


def criterion_3() -> list[CheckReport]:
    """Additive solver increment variance vs the exact closed form."""
    started = time.perf_counter()
    ens = additive_ensemble()
    paths = ens.paths()
    reports = []
    for eps in (0.04, 0.01):
        rep = increment_variance_ratio(
            paths, 1.0, eps, normalizer="linear_oracle", path_kind="V", tol_se=3.0,
            name=f"3. additive_increment_variance(eps={eps})",
        )
        reports.append(rep)
    # marginal variance of V_1(0): closed form sqrt(1/pi)
    i1 = paths[0].index_of(1.0)
    v1 = ens.origin[:, i1]
    var = float(np.var(v1, ddof=1))
    se = var * math.sqrt(2.0 / (v1.size - 1))
    reports.append(
        CheckReport.build(
            "3. additive_marginal_variance(t=1)", math.sqrt(1.0 / math.pi), var, se,
            3.0 * se, v1.size, started,
        )
    )
    ratio = normalizer_consistency(1.0, 0.01)
    reports.append(
        CheckReport.build(
            "3. oracle_vs_asymptote(eps=0.01)", 1.0, ratio, 0.0, 0.02, 0, started,
            "closed form / (2/pi)^(1/2) sqrt(eps), deterministic",
        )
    )
    return reports


def criterion_4() -> list[CheckReport]:
    """Mean field: ensemble mean of Z(1, x) vs p_1(x) for |x| <= 2, 3 SE."""
    started = time.perf_counter()
    ens = wedge_ensemble()
    x = ens.grid.x
    sel = np.abs(x) <= 2.0
    snap = ens.snapshot[:, sel]
    mean = snap.mean(axis=0)
    se = snap.std(axis=0, ddof=1) / math.sqrt(snap.shape[0])
    target = heat_kernel(1.0, x[sel])
    zmax = float(np.max(np.abs(mean - target) / se))
    return [
        CheckReport.build(
            "4. narrow_wedge_mean_field", 0.0, zmax, 1.0, 3.0, snap.shape[0], started,
            f"max z-score over {int(sel.sum())} lattice points with |x| <= 2",
        )
    ]


def criterion_5() -> list[CheckReport]:
    """Increment normality: standardized variance bands, KS, and the trend."""
    started = time.perf_counter()
    paths = _wedge_h_paths()
    epsilons = (2.0**-6, 2.0**-7, 2.0**-8)
    reports = []
    deviations = []
    for eps in epsilons:
        z = standardized_increments(paths, 1.0, eps)
        var = float(np.var(z, ddof=1))
        se = float(np.sqrt(max(np.mean((z - z.mean()) ** 4) - var**2, 0.0) / z.size))
        deviations.append(abs(var - 1.0))
        reports.append(
            CheckReport.build(
                f"5. standardized_variance(eps=2^{int(math.log2(eps))})",
                1.0, var, se, 0.25, len(paths), started,
            )
        )
        if eps == 2.0**-8:
            ks = ks_normality(z)
            reports.append(
                CheckReport.build(
                    "5. ks_normality(eps=2^-8)", 0.0, ks.statistic, 0.0, ks.threshold,
                    len(paths), started, f"threshold 1.63/sqrt({len(paths)})",
                )
            )
    # "trend toward 1 as eps decreases": the deviation at the finest eps must
    # not exceed the deviation at the coarsest (per-pair monotonicity would
    # compare quantities separated by less than one MC standard error here)
    trend_violation = max(deviations[2] - deviations[0], 0.0)
    reports.append(
        CheckReport.build(
            "5. variance_trend_toward_1", 0.0, trend_violation, 0.0, 0.0, len(paths), started,
            f"|var-1| by eps 2^-6..2^-8: {deviations[0]:.4f}, {deviations[1]:.4f}, {deviations[2]:.4f}",
        )
    )
    return reports


def criterion_6() -> list[CheckReport]:
    """Quartic variation of the simulated KPZ temporal path on [1, 2]."""
    started = time.perf_counter()
    ens = quartic_ensemble()
    logs = np.log(ens.origin)
    paths = [Path(t0=ens.t0_abs, dt=ens.grid.dt, values=row) for row in logs]
    epsilons = (2.0**-6, 2.0**-7, 2.0**-8)
    means = {}
    ses = {}
    for eps in epsilons:
        vals = np.array([alpha_variation(p, 4.0, eps, (1.0, 2.0)).value for p in paths])
        means[eps] = float(vals.mean())
        ses[eps] = float(vals.std(ddof=1) / math.sqrt(vals.size))
    reports = [
        CheckReport.build(
            "6. kpz_quartic_variation(eps=2^-8)", QUARTIC_VARIATION_RATE, means[2.0**-8],
            ses[2.0**-8], 0.25 * QUARTIC_VARIATION_RATE, len(paths), started,
            "mean V(4, eps) of H over [1,2] at dt = 2^-14",
        )
    ]
    devs = [abs(means[e] - QUARTIC_VARIATION_RATE) for e in epsilons]
    trend_violation = max(max(devs[1] - devs[0], 0.0), max(devs[2] - devs[1], 0.0))
    reports.append(
        CheckReport.build(
            "6. quartic_deviation_trend", 0.0, trend_violation, 0.0, 0.0, len(paths), started,
            f"|V4 - 6/pi| by eps: {devs[0]:.4f} >= {devs[1]:.4f} >= {devs[2]:.4f}",
        )
    )
    return reports


def criterion_7() -> list[CheckReport]:
    """Modulus of continuity of exact fBm(1/4) at eps = 2^-20 on [1, 2]."""
    started = time.perf_counter()
    n, dt = 2**20, 2.0**-20
    raw = np.empty(16)
    scaled = np.empty(16)
    for r in range(16):
        p = shifted(sample_fbm_circulant(0.25, n, dt, SEED_FBM_MOC, r), 1.0)
        prof = moc_profile(p, [20], (1.0, 2.0), allow_fine_scales=True)
        raw[r] = prof.final
        scaled[r] = moc_profile(
            rescale_to_kpz(p), [20], (1.0, 2.0), allow_fine_scales=True
        ).final
    rep_scaled = CheckReport.build(
        "7. moc_constant_rescaled", MOC_LIL_CONSTANT, float(scaled.mean()),
        float(scaled.std(ddof=1) / 4.0), 0.20 * MOC_LIL_CONSTANT, 16, started,
        "sup |dH| / (eps^(1/4) sqrt(log(1/eps))) at eps = 2^-20",
    )
    rep_raw = CheckReport.build(
        "7. moc_constant_unscaled", math.sqrt(2.0), float(raw.mean()),
        float(raw.std(ddof=1) / 4.0), 0.20 * math.sqrt(2.0), 16, started,
        "unscaled fBm(1/4) control; (8/pi)^(1/4) = (2/pi)^(1/4) sqrt(2)",
    )
    return [rep_scaled, rep_raw]


def criterion_8() -> list[CheckReport]:
    """Iterated-logarithm profile at depth 24 from exact Cholesky probes."""
    started = time.perf_counter()
    t_base = 0.5
    depths = np.arange(2, 25)
    times = np.concatenate([[t_base], t_base + 0.5**depths[::-1]])
    finals = np.empty(16)
    monotone_tail = True
    for r in range(16):
        spec = FbmSpec(hurst=0.25, times=times, seed=SEED_FBM_LIL, stream_id=r)
        p = rescale_to_kpz(sample_fbm_cholesky(spec))
        prof = lil_profile(p, t_base, 24)
        finals[r] = prof.final
        tail = prof.statistics[-8:]
        monotone_tail &= bool(np.all(np.diff(tail) >= 0))
    mean = float(finals.mean())
    lo, hi = 0.55 * MOC_LIL_CONSTANT, 1.10 * MOC_LIL_CONSTANT
    centre, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    rep_band = CheckReport.build(
        "8. lil_final_statistic", centre, mean, float(finals.std(ddof=1) / 4.0), half,
        16, started, f"band [0.55, 1.10] x (8/pi)^(1/4) = [{lo:.4f}, {hi:.4f}]",
    )
    rep_mono = CheckReport.build(
        "8. lil_tail_nondecreasing", 1.0, 1.0 if monotone_tail else 0.0, 0.0, 0.0,
        16, started, "running max over the last 8 depths",
    )
    return [rep_band, rep_mono]


def criterion_9() -> list[CheckReport]:
    """Exceptional-set box dimension 1 - alpha^2 and exact nesting."""
    started = time.perf_counter()
    n, dt, j = 2**21, 2.0**-20, 20
    # box scales = the membership probe window [2^-j, 2^-ceil(j/2)]; coarser
    # boxes saturate (the surrogate set has positive density at the cluster
    # scale 2^-ceil(j/2)) and would drag the slope toward 1
    scales = [2.0**-m for m in range(-(-j // 2), j + 1)]
    slopes = {0.5: [], 0.8: []}
    nested = True
    for r in range(8):
        p = rescale_to_kpz(shifted(sample_fbm_circulant(0.25, n, dt, SEED_FBM_BOX, r), 1.0))
        sets = {a: exceptional_set(p, a, j, (1.0, 2.0)) for a in (0.5, 0.8)}
        nested &= bool(np.isin(sets[0.8].indices, sets[0.5].indices).all())
        for a in (0.5, 0.8):
            res = box_dimension(sets[a].times, scales, (1.0, 2.0), alpha=a)
            slopes[a].append(res.slope)
    reports = []
    for a, target in ((0.5, 0.75), (0.8, 1 - 0.8**2)):
        arr = np.array(slopes[a])
        reports.append(
            CheckReport.build(
                f"9. box_dimension(alpha={a})", target, float(arr.mean()),
                float(arr.std(ddof=1) / math.sqrt(arr.size)), 0.15, 8, started,
                f"mean box-count slope, resolution j={j}",
            )
        )
    reports.append(
        CheckReport.build(
            "9. exceptional_nesting", 1.0, 1.0 if nested else 0.0, 0.0, 0.0, 8, started,
            "E(0.8) subset of E(0.5) on every path",
        )
    )
    return reports


def criterion_10() -> list[CheckReport]:
    """Exact structural invariants of the implementation."""
    started = time.perf_counter()
    reports = []

    # solver linearity under shared noise
    grid = GridSpec(-6.0, 6.0, 192, 0.0, 0.25, 256)
    noise = sample_noise(grid, SEED_STRUCTURAL, 0)
    ic1 = function_ic(expr="-(x*x)*0.25")
    ic2 = function_ic(expr="0.5 + 0.25*x")
    reports.append(linearity_check(grid, noise, ic1, ic2, tolerance=1e-10))

    # heat-step mass conservation
    g = np.random.default_rng(SEED_STRUCTURAL).standard_normal(grid.nx) + 2.0
    stepped = heat_step_values(g, grid.dx, 0.125)
    mass_err = abs(stepped.sum() - g.sum()) * grid.dx / (abs(g.sum()) * grid.dx)
    reports.append(
        CheckReport.build("10. heat_mass_conservation", 0.0, float(mass_err), 0.0, 1e-12, 1, started)
    )

    # noise and run determinism across thread counts (bit-exact)
    n1 = sample_noise(grid, SEED_STRUCTURAL, 3)
    n2 = sample_noise(grid, SEED_STRUCTURAL, 3)
    biteq = np.array_equal(n1.increments, n2.increments)
    e1 = run_ensemble(grid, narrow_wedge(), MULTIPLICATIVE, SEED_STRUCTURAL, 96, threads=1)
    e2 = run_ensemble(grid, narrow_wedge(), MULTIPLICATIVE, SEED_STRUCTURAL, 96, threads=3)
    biteq &= np.array_equal(e1.origin, e2.origin)
    reports.append(
        CheckReport.build(
            "10. determinism_bit_exact", 1.0, 1.0 if biteq else 0.0, 0.0, 0.0, 96, started,
            "repeated noise draw and 1- vs 3-thread ensembles",
        )
    )

    # variation scaling identity
    p = sample_fbm_circulant(0.25, 2**12, 2.0**-12, SEED_STRUCTURAL, 11)
    scaled = Path(t0=p.t0, dt=p.dt, values=2.0 * p.values)
    v1 = alpha_variation(p, 4.0, 2.0**-8, (0.25, 0.75)).value
    v2 = alpha_variation(scaled, 4.0, 2.0**-8, (0.25, 0.75)).value
    rel = abs(v2 - 16.0 * v1) / (16.0 * v1)
    reports.append(
        CheckReport.build(
            "10. variation_scaling_identity", 0.0, float(rel), 0.0, 1e-12, 1, started,
            "V(4) of 2x path vs 16x V(4), relative",
        )
    )
    return reports


def criterion_11() -> list[CheckReport]:
    """Second-moment consequence: Var(Z increment) / ((2/pi)^(1/2) sqrt(eps) E[Z^2])."""
    ens = wedge_ensemble()
    paths = ens.paths()
    rep = increment_variance_ratio(
        paths, 1.0, 2.0**-8, normalizer="asymptotic", path_kind="Z", tol_rel=0.15,
        name="11. z_increment_second_moment(eps=2^-8)",
    )
    return [rep]


CRITERIA: dict[int, Callable[[], list[CheckReport]]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def run_criteria(numbers: list[int] | None = None) -> dict[int, list[CheckReport]]:
    """Run the requested criteria (all by default) and return their reports."""
    numbers = sorted(numbers) if numbers else sorted(CRITERIA)
    out: dict[int, list[CheckReport]] = {}
    for n in numbers:
        if n not in CRITERIA:
            raise ValueError(f"unknown criterion {n}; valid: {sorted(CRITERIA)}")
        out[n] = CRITERIA[n]()
    return out


def headline(reports: list[CheckReport]) -> CheckReport:
    """The sub-check closest to (or furthest past) its tolerance."""

    def badness(r: CheckReport) -> float:
        if r.tolerance == 0:
            return 0.0 if r.passed else math.inf
        return abs(r.measured - r.target) / r.tolerance

    return max(reports, key=badness)
