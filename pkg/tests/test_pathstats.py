import math

import numpy as np
import pytest

from kpzlab.fbm import rescale_to_kpz, sample_fbm_circulant, shifted
from kpzlab.noise import stream_generator
from kpzlab.path import Path
from kpzlab.pathstats import (
    MOC_LIL_CONSTANT,
    QUARTIC_VARIATION_RATE,
    alpha_variation,
    box_dimension,
    exceptional_set,
    holder_coefficient,
    ks_normality,
    lil_profile,
    moc_profile,
    standardized_increments,
)


def linear_path(t0=0.0, dt=2.0**-8, n=256, slope=1.0):
    return Path(t0=t0, dt=dt, values=slope * (t0 + dt * np.arange(n + 1)))


@pytest.fixture(scope="module")
def kpz_fbm():
    # rescaled fBm(1/4) on [1, 2] at dt = 2^-16
    p = sample_fbm_circulant(0.25, 2**16, 2.0**-16, seed=6060)
    return rescale_to_kpz(shifted(p, 1.0))


# ---------------------------------------------------------------------------
# alpha variation
# ---------------------------------------------------------------------------


def test_variation_constant_path_zero():
    p = Path(t0=0.0, dt=0.125, values=np.full(9, 2.5))
    res = alpha_variation(p, 3.0, 0.25, (0.0, 1.0))
    assert res.value == 0.0


def test_variation_linear_path_counts_mesh():
    # g(u) = u on [0,1], alpha 1, eps 1/4: four increments of 1/4
    p = linear_path(dt=0.25, n=4)
    res = alpha_variation(p, 1.0, 0.25, (0.0, 1.0))
    assert res.value == pytest.approx(1.0)
    assert res.n_increments == 4


def test_variation_quartic_fbm_small(kpz_fbm):
    # one long path already concentrates near 6/pi
    res = alpha_variation(kpz_fbm, 4.0, 2.0**-12, (1.0, 2.0))
    assert res.value == pytest.approx(QUARTIC_VARIATION_RATE, rel=0.2)
    assert res.n_increments == 2**12


def test_variation_scaling_identity(kpz_fbm):
    scaled = Path(t0=kpz_fbm.t0, dt=kpz_fbm.dt, values=3.0 * kpz_fbm.values)
    v1 = alpha_variation(kpz_fbm, 2.5, 2.0**-10, (1.0, 2.0)).value
    v2 = alpha_variation(scaled, 2.5, 2.0**-10, (1.0, 2.0)).value
    assert v2 == pytest.approx(3.0**2.5 * v1, rel=1e-12)


def test_variation_absolute_eps_lattice():
    # u runs over absolute multiples of eps: on [0.5, 1.5] with eps = 0.25 the
    # mesh is u in {0.75, 1.0, 1.25, 1.5}
    p = linear_path(dt=0.25, n=8)
    res = alpha_variation(p, 1.0, 0.25, (0.5, 1.5))
    assert res.n_increments == 4
    assert res.value == pytest.approx(1.0)


def test_variation_dichotomy_directional():
    # V(5) shrinks and V(3) grows as eps decreases (quartic criticality)
    p = sample_fbm_circulant(0.25, 2**19, 2.0**-19, seed=41)
    v5 = [alpha_variation(p, 5.0, e, (0.0, 1.0)).value for e in (2.0**-14, 2.0**-18)]
    v3 = [alpha_variation(p, 3.0, e, (0.0, 1.0)).value for e in (2.0**-14, 2.0**-18)]
    assert v5[1] < v5[0]
    assert v3[1] > v3[0]


def test_variation_errors():
    p = linear_path(dt=0.25, n=8)
    with pytest.raises(ValueError):
        alpha_variation(p, 1.0, 0.3, (0.0, 1.0))  # eps not multiple of dt
    with pytest.raises(ValueError):
        alpha_variation(p, 1.0, 0.25, (0.0, 3.0))  # interval escapes path
    with pytest.raises(ValueError):
        alpha_variation(p, 1.0, 0.5, (0.0, 0.25))  # eps > interval
    with pytest.raises(ValueError):
        alpha_variation(p, 0.0, 0.25, (0.0, 1.0))
    off = Path(t0=0.1, dt=0.25, values=np.zeros(9))  # origin off the eps lattice
    with pytest.raises(ValueError):
        alpha_variation(off, 1.0, 0.25, (0.35, 1.1))


# ---------------------------------------------------------------------------
# standardized increments & KS
# ---------------------------------------------------------------------------


def test_standardized_increments_unit_variance():
    eps = 2.0**-10
    paths = [
        rescale_to_kpz(sample_fbm_circulant(0.25, 2**10, eps, seed=70, stream_id=s))
        for s in range(800)
    ]
    z = standardized_increments(paths, 0.5, eps)
    assert np.var(z, ddof=1) == pytest.approx(1.0, abs=3 * math.sqrt(2 / 799))


def test_standardized_increments_constant_paths():
    paths = [Path(t0=0.0, dt=0.25, values=np.full(9, 3.0)) for _ in range(4)]
    z = standardized_increments(paths, 1.0, 0.25)
    assert np.all(z == 0.0)


def test_ks_accepts_standard_normal():
    z = stream_generator(123, 0).standard_normal(1000)
    res = ks_normality(z)
    assert res.threshold == pytest.approx(1.63 / math.sqrt(1000))
    assert res.passed


def test_ks_rejects_wrong_variance():
    z = 2.0 * stream_generator(124, 0).standard_normal(1000)
    assert not ks_normality(z).passed


def test_ks_degenerate_constant_sample():
    res = ks_normality(np.zeros(100))
    assert res.statistic == pytest.approx(0.5)
    assert not res.passed


def test_ks_needs_samples():
    with pytest.raises(ValueError):
        ks_normality(np.zeros(10))


# ---------------------------------------------------------------------------
# LIL profile
# ---------------------------------------------------------------------------


def test_lil_smooth_path_levels_decay():
    p = linear_path(dt=2.0**-16, n=2**16)
    prof = lil_profile(p, 0.25, 12, allow_fine_scales=True)
    # per-level normalized increments are O(eps^(3/4)) for a smooth path
    assert prof.level_values[-1] < 0.02
    assert prof.level_values[-1] < prof.level_values[0]
    # the limsup surrogate is the (early) running max
    assert prof.final == pytest.approx(np.max(prof.level_values))


def test_lil_zero_path():
    p = Path(t0=0.0, dt=2.0**-8, values=np.zeros(2**8 + 1))
    prof = lil_profile(p, 0.25, 6, allow_fine_scales=True)
    assert np.all(prof.statistics == 0.0)


def test_lil_running_max_monotone(kpz_fbm):
    prof = lil_profile(kpz_fbm, 1.25, 14, allow_fine_scales=True)
    assert np.all(np.diff(prof.statistics) >= 0)
    assert prof.depths[0] == 2
    assert prof.target == MOC_LIL_CONSTANT


def test_lil_resolution_floor_enforced(kpz_fbm):
    with pytest.raises(ValueError, match="below 16 time steps"):
        lil_profile(kpz_fbm, 1.25, 16)
    prof = lil_profile(kpz_fbm, 1.25, 12)  # 2^-12 = 16 dt is allowed
    assert prof.depths[-1] == 12


def test_lil_depth_exceeding_grid(kpz_fbm):
    with pytest.raises(ValueError):
        lil_profile(kpz_fbm, 1.25, 18, allow_fine_scales=True)


# ---------------------------------------------------------------------------
# MOC profile
# ---------------------------------------------------------------------------


def test_moc_lipschitz_path_decays():
    p = linear_path(dt=2.0**-16, n=2**16, slope=1.0)
    prof = moc_profile(p, [4, 8, 12], (0.0, 1.0), allow_fine_scales=True)
    assert prof.statistics[-1] < prof.statistics[0]
    assert prof.statistics[-1] < 0.01


def test_moc_fbm_near_constant(kpz_fbm):
    prof = moc_profile(kpz_fbm, [16], (1.0, 2.0), allow_fine_scales=True)
    assert prof.final == pytest.approx(MOC_LIL_CONSTANT, rel=0.2)


def test_moc_unscaled_consistency(kpz_fbm):
    # unscaled fBm MOC constant sqrt(2) = (8/pi)^(1/4) / (2/pi)^(1/4)
    raw = Path(t0=kpz_fbm.t0, dt=kpz_fbm.dt, values=kpz_fbm.values / (2 / math.pi) ** 0.25)
    prof = moc_profile(raw, [16], (1.0, 2.0), allow_fine_scales=True)
    assert prof.final == pytest.approx(math.sqrt(2), rel=0.2)


def test_moc_shift_invariance(kpz_fbm):
    shifted_vals = Path(t0=kpz_fbm.t0, dt=kpz_fbm.dt, values=kpz_fbm.values + 7.25)
    a = moc_profile(kpz_fbm, [10, 12], (1.0, 2.0), allow_fine_scales=True)
    b = moc_profile(shifted_vals, [10, 12], (1.0, 2.0), allow_fine_scales=True)
    assert np.allclose(a.statistics, b.statistics, rtol=1e-12)


def test_moc_interval_not_covered(kpz_fbm):
    with pytest.raises(ValueError):
        moc_profile(kpz_fbm, [10], (1.0, 2.5), allow_fine_scales=True)


# ---------------------------------------------------------------------------
# Hoelder coefficient
# ---------------------------------------------------------------------------


def test_holder_constant_zero():
    p = Path(t0=0.0, dt=0.25, values=np.full(9, 1.0))
    assert holder_coefficient(p, 0.5, (0.0, 2.0)) == 0.0


def test_holder_linear_unit():
    p = linear_path(dt=2.0**-8, n=256)
    assert holder_coefficient(p, 0.5, (0.0, 1.0)) == pytest.approx(1.0)


def test_holder_shift_invariant(kpz_fbm):
    p2 = Path(t0=kpz_fbm.t0, dt=kpz_fbm.dt, values=kpz_fbm.values - 3.0)
    a = holder_coefficient(kpz_fbm, 0.25, (1.0, 1.0625))
    b = holder_coefficient(p2, 0.25, (1.0, 1.0625))
    assert a == pytest.approx(b, rel=1e-12)


def test_holder_nonincreasing_in_beta_unit_lipschitz():
    # slope-1 path over span 2: coefficient is 2^(1-beta), decreasing in beta
    p = linear_path(dt=2.0**-6, n=128)
    vals = [holder_coefficient(p, b, (0.0, 2.0)) for b in (0.25, 0.5, 0.75, 1.0)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(2.0**0.75)


def test_holder_subsamples_long_intervals(kpz_fbm):
    # 2^16 points: strided down to <= 2^13, still returns a finite sup
    v = holder_coefficient(kpz_fbm, 0.2, (1.0, 2.0))
    assert np.isfinite(v) and v > 0


def test_holder_rejects_bad_args(kpz_fbm):
    with pytest.raises(ValueError):
        holder_coefficient(kpz_fbm, 1.5, (1.0, 1.5))
    with pytest.raises(ValueError):
        holder_coefficient(kpz_fbm, 0.5, (1.5, 1.5))


# ---------------------------------------------------------------------------
# exceptional sets and box dimension
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def box_fbm():
    # covers [1, 3): membership probes reach past 2
    p = sample_fbm_circulant(0.25, 2**17, 2.0**-16, seed=9090)
    return rescale_to_kpz(shifted(p, 1.0))


def test_exceptional_alpha_tiny_includes_everything(box_fbm):
    es = exceptional_set(box_fbm, 1e-9, 16, (1.0, 2.0))
    assert es.indices.size == es.n_lattice


def test_exceptional_smooth_path_empty():
    p = linear_path(dt=2.0**-16, n=2**17, slope=0.5)
    es = exceptional_set(p, 1.2, 16, (0.0, 1.0))
    assert es.indices.size == 0


def test_exceptional_nesting_exact(box_fbm):
    e_lo = exceptional_set(box_fbm, 0.3, 16, (1.0, 2.0))
    e_mid = exceptional_set(box_fbm, 0.5, 16, (1.0, 2.0))
    e_hi = exceptional_set(box_fbm, 0.8, 16, (1.0, 2.0))
    assert np.isin(e_mid.indices, e_lo.indices).all()
    assert np.isin(e_hi.indices, e_mid.indices).all()
    assert e_hi.indices.size < e_mid.indices.size < e_lo.indices.size
    assert e_mid.indices.size > 0


def test_exceptional_needs_probe_extension(box_fbm):
    with pytest.raises(ValueError):
        exceptional_set(box_fbm, 0.5, 16, (1.0, 3.0))


def test_box_dimension_full_interval():
    times = 1.0 + 2.0**-12 * np.arange(2**12 + 1)
    scales = [2.0**-m for m in range(2, 10)]
    res = box_dimension(times, scales, (1.0, 2.0))
    assert res.slope == pytest.approx(1.0, abs=0.02)
    assert not res.empty


def test_box_dimension_single_point():
    scales = [2.0**-m for m in range(2, 10)]
    res = box_dimension(np.array([1.5]), scales, (1.0, 2.0))
    assert res.slope == pytest.approx(0.0, abs=0.02)


def test_box_dimension_empty_flagged():
    scales = [2.0**-m for m in range(2, 10)]
    res = box_dimension(np.array([]), scales, (1.0, 2.0))
    assert res.empty and res.slope == 0.0


def test_box_dimension_counts_nonincreasing(box_fbm):
    es = exceptional_set(box_fbm, 0.5, 16, (1.0, 2.0))
    scales = [2.0**-m for m in range(8, 17)]
    res = box_dimension(es.times, scales, (1.0, 2.0), alpha=0.5)
    assert np.all(np.diff(res.counts) >= 0)  # scales stored descending
    assert res.alpha == 0.5
    assert res.fit_residual >= 0


def test_box_dimension_requires_scale_span():
    with pytest.raises(ValueError):
        box_dimension(np.array([1.5]), [0.5, 0.25, 0.125, 0.0625], (1.0, 2.0))
    with pytest.raises(ValueError):
        box_dimension(np.array([1.5]), [0.5, 0.001], (1.0, 2.0))
