import math

import numpy as np
import pytest

from kpzlab.ensemble import run_ensemble
from kpzlab.fields import ADDITIVE, MULTIPLICATIVE, FieldState
from kpzlab.grid import make_grid
from kpzlab.heat import (
    discrete_increment_variance,
    discrete_marginal_variance,
    heat_kernel,
    heat_step_values,
)
from kpzlab.initial_data import brownian_ic, function_ic, narrow_wedge
from kpzlab.noise import NoiseRealization, sample_noise, stream_generator
from kpzlab.path import Path
from kpzlab.solver import (
    SolverOverflowError,
    cole_hopf,
    load_trajectory,
    save_trajectory,
    scaled_height,
    solve,
    stationarity_transform,
)


@pytest.fixture(scope="module")
def grid():
    # small but honest: dx = 1/16, dt = 2^-10, horizon 0.5
    return make_grid(-4, 4, 128, 0, 0.5, 512)


@pytest.fixture(scope="module")
def noise(grid):
    return sample_noise(grid, seed=2718, stream_id=0)


def zero_noise(grid):
    return NoiseRealization(grid=grid, seed=0, stream_id=0, increments=np.zeros((grid.nt, grid.nx)))


# ---------------------------------------------------------------------------
# scheme mechanics
# ---------------------------------------------------------------------------


def test_zero_noise_closed_form(grid):
    # with dW = 0 each step multiplies by exp(-dt/(2 dx)): Z(t) = exp(-t/(2 dx))
    traj = solve(grid, function_ic("0"), zero_noise(grid), MULTIPLICATIVE)
    t = grid.t_end
    expected = math.exp(-t / (2 * grid.dx))
    assert traj.origin_path.values[-1] == pytest.approx(expected, rel=1e-12)
    assert traj.origin_path.values[0] == 1.0


def test_multiplier_unit_conditional_mean(grid):
    # sample mean of exp(dW/dx - dt/(2 dx)) over 1e6 draws -> 1 within 4 SE
    g = stream_generator(555, 0)
    s = math.sqrt(grid.dt / grid.dx)
    z = g.standard_normal(1_000_000)
    mult = np.exp(s * z - s * s / 2)
    se = mult.std(ddof=1) / 1000.0
    assert abs(mult.mean() - 1.0) < 4 * se


def test_positivity_strictly_positive_data(grid, noise):
    traj = solve(grid, function_ic("-(x*x)*0.125"), noise, MULTIPLICATIVE, snapshot_times=(0.25, 0.5))
    assert all(np.all(s.values > 0) for s in traj.snapshots)
    assert np.all(traj.origin_path.values > 0)


def test_mode_ic_mismatch(grid, noise):
    with pytest.raises(ValueError):
        solve(grid, function_ic("0"), noise, ADDITIVE)
    with pytest.raises(ValueError):
        solve(grid, None, noise, MULTIPLICATIVE)
    with pytest.raises(ValueError):
        solve(grid, function_ic("0"), noise, "nope")


def test_noise_grid_mismatch(grid):
    other = make_grid(-4, 4, 64, 0, 0.5, 512)
    with pytest.raises(ValueError):
        solve(grid, function_ic("0"), sample_noise(other, 1, 0), MULTIPLICATIVE)


def test_snapshot_times_validated(grid, noise):
    with pytest.raises(ValueError):
        solve(grid, function_ic("0"), noise, MULTIPLICATIVE, snapshot_times=(0.2501,))
    traj = solve(grid, function_ic("0"), noise, MULTIPLICATIVE, snapshot_times=(0.25,))
    assert len(traj.snapshots) == 1
    assert traj.snapshots[0].t_abs == pytest.approx(0.25)


def test_linearity_exact_superposition(grid, noise):
    # shared noise: solve(g1 + g2) = solve(g1) + solve(g2) to 1e-10 relative
    f1 = function_ic("exp(-(x*x))")
    f2 = function_ic("0.5")
    t1 = solve(grid, f1, noise, MULTIPLICATIVE)
    t2 = solve(grid, f2, noise, MULTIPLICATIVE)
    from kpzlab.initial_data import make_initial_field
    from kpzlab.solver import _solve_field

    both = make_initial_field(grid, f1).values + make_initial_field(grid, f2).values
    t12 = _solve_field(grid, None, both, 0.0, noise, MULTIPLICATIVE)
    a = t12.origin_path.values
    b = t1.origin_path.values + t2.origin_path.values
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))


def test_homogeneity_exact(grid, noise):
    base = solve(grid, function_ic("0"), noise, MULTIPLICATIVE)
    from kpzlab.initial_data import make_initial_field
    from kpzlab.solver import _solve_field

    tripled = _solve_field(grid, None, 3.0 * np.ones(grid.nx), 0.0, noise, MULTIPLICATIVE)
    assert np.allclose(tripled.origin_path.values, 3.0 * base.origin_path.values, rtol=1e-12)


def test_overflow_reports_step_index(grid):
    bad = np.zeros((grid.nt, grid.nx))
    bad[7, 3] = np.nan
    with pytest.raises(SolverOverflowError) as err:
        solve(grid, function_ic("0"), NoiseRealization(grid=grid, seed=0, stream_id=0, increments=bad), MULTIPLICATIVE)
    assert err.value.step == 8


def test_log_space_switch_consistency(grid, noise):
    # large constant data crosses e^300 immediately; homogeneity still exact:
    # Z^{c g} = c Z^{g} with c = e^600 relative to the small-data run
    from kpzlab.initial_data import make_initial_field
    from kpzlab.solver import _solve_field

    small = solve(grid, function_ic("0"), noise, MULTIPLICATIVE)
    big = _solve_field(grid, None, np.full(grid.nx, np.exp(301.0)), 0.0, noise, MULTIPLICATIVE)
    assert big.origin_is_log
    logs = big.origin_path.values - 301.0
    assert np.allclose(logs, np.log(small.origin_path.values), atol=1e-9)


# ---------------------------------------------------------------------------
# statistics of the additive mode (exact oracles)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def additive_ens(grid):
    return run_ensemble(grid, None, ADDITIVE, 424242, 1500)


def test_additive_marginal_variance(grid, additive_ens):
    # discrete oracle is exact for the scheme; continuum within its small bias
    v_end = additive_ens.origin[:, -1]
    var = v_end.var(ddof=1)
    exact = discrete_marginal_variance(grid, grid.nt)
    se = var * math.sqrt(2 / (v_end.size - 1))
    assert abs(var - exact) < 3 * se
    cont = math.sqrt(grid.t_end / math.pi)
    assert abs(exact - cont) < 0.05 * cont


def test_additive_increment_variance_matches_discrete_oracle(grid, additive_ens):
    n_t, n_eps = 256, 64
    inc = additive_ens.origin[:, n_t + n_eps] - additive_ens.origin[:, n_t]
    var = inc.var(ddof=1)
    exact = discrete_increment_variance(grid, n_t, n_eps)
    se = var * math.sqrt(2 / (inc.size - 1))
    assert abs(var - exact) < 3 * se


def test_additive_mean_zero(grid, additive_ens):
    v_end = additive_ens.origin[:, -1]
    assert abs(v_end.mean()) < 4 * v_end.std(ddof=1) / math.sqrt(v_end.size)


# ---------------------------------------------------------------------------
# mean field (multiplicative)
# ---------------------------------------------------------------------------


def test_mean_field_matches_heat_semigroup(grid):
    # E[Z(t, .)] equals the heat flow of the initial field, all data kinds
    for ic in (narrow_wedge(t0=10 * grid.dt), function_ic("exp(-(x*x))"), brownian_ic(seed=7)):
        ens = run_ensemble(grid, ic, MULTIPLICATIVE, 777, 600, snapshot_time=0.5)
        from kpzlab.initial_data import make_initial_field

        f0 = make_initial_field(grid, ic)
        elapsed = 0.5 - f0.t_abs
        target = heat_step_values(f0.values, grid.dx, elapsed) if elapsed > 0 else f0.values
        mean = ens.snapshot.mean(axis=0)
        se = ens.snapshot.std(axis=0, ddof=1) / math.sqrt(ens.n_replicas)
        sel = se > 0
        assert np.max(np.abs(mean[sel] - target[sel]) / se[sel]) < 4.0


def test_narrow_wedge_mean_is_heat_kernel(grid):
    ens = run_ensemble(grid, narrow_wedge(t0=10 * grid.dt), MULTIPLICATIVE, 888, 800, snapshot_time=0.5)
    x = grid.x
    sel = np.abs(x) <= 1.5
    mean = ens.snapshot[:, sel].mean(axis=0)
    se = ens.snapshot[:, sel].std(axis=0, ddof=1) / math.sqrt(ens.n_replicas)
    target = heat_kernel(0.5, x[sel])
    assert np.max(np.abs(mean - target) / se) < 4.0


# ---------------------------------------------------------------------------
# ensemble vs single-replica equivalence and determinism
# ---------------------------------------------------------------------------


def test_ensemble_matches_solve(grid):
    ens = run_ensemble(grid, function_ic("0"), MULTIPLICATIVE, 1234, 3)
    for r in range(3):
        traj = solve(grid, function_ic("0"), sample_noise(grid, 1234, r), MULTIPLICATIVE)
        assert np.allclose(ens.origin[r], traj.origin_path.values, rtol=1e-10, atol=1e-13)


def test_ensemble_thread_count_bit_determinism(grid):
    a = run_ensemble(grid, function_ic("0"), MULTIPLICATIVE, 55, 130, threads=1)
    b = run_ensemble(grid, function_ic("0"), MULTIPLICATIVE, 55, 130, threads=4)
    assert np.array_equal(a.origin, b.origin)


def test_ensemble_rejects_bad_args(grid):
    with pytest.raises(ValueError):
        run_ensemble(grid, None, MULTIPLICATIVE, 1, 4)
    with pytest.raises(ValueError):
        run_ensemble(grid, function_ic("0"), ADDITIVE, 1, 4)
    with pytest.raises(ValueError):
        run_ensemble(grid, function_ic("0"), MULTIPLICATIVE, 1, 0)
    with pytest.raises(ValueError):
        run_ensemble(grid, function_ic("0"), MULTIPLICATIVE, 1, 4, snapshot_time=0.2501)


# ---------------------------------------------------------------------------
# cole_hopf, scaled height, stationarity transform
# ---------------------------------------------------------------------------


def test_cole_hopf_basics():
    p = Path(t0=0.0, dt=0.5, values=np.array([1.0, math.e, math.e**2]))
    h = cole_hopf(p)
    assert np.allclose(h.values, [0.0, 1.0, 2.0])


def test_cole_hopf_rejects_zero_entry():
    p = Path(t0=0.0, dt=0.5, values=np.array([1.0, 0.0, 2.0]))
    with pytest.raises(ValueError, match="index 1"):
        cole_hopf(p)


def test_scaled_height_synthetic_unit_path(grid):
    # Z = 1 path: h_t(0) = t^(2/3)/24 under alpha = 1
    from kpzlab.solver import Trajectory

    p = Path(t0=0.0, dt=grid.dt, values=np.ones(grid.nt + 1))
    traj = Trajectory(grid=grid, ic=narrow_wedge(t0=0.01), mode=MULTIPLICATIVE, seed=0, stream_id=0, origin_path=p)
    t = 0.40625  # 416 lattice steps
    assert scaled_height(traj, t, 1.0) == pytest.approx(t ** (2 / 3) / 24)
    with pytest.raises(ValueError):
        scaled_height(traj, t, 2.0)  # horizon 0.5 < 0.8125


def test_scaled_height_requires_narrow_wedge(grid, noise):
    traj = solve(grid, function_ic("0"), noise, MULTIPLICATIVE)
    with pytest.raises(ValueError):
        scaled_height(traj, 0.25, 1.0)


def test_stationarity_transform_deterministic_kernel(grid):
    # p_s(y) exp(y^2/(2s)) is the constant (2 pi s)^(-1/2)
    s = 0.25
    f = FieldState(grid=grid, t_abs=s, values=heat_kernel(s, grid.x))
    out = stationarity_transform(f)
    c = (2 * math.pi * s) ** -0.5
    assert np.allclose(out.values, c, rtol=1e-12)


def test_stationarity_transform_ensemble_moments(grid):
    # mean of the transformed field is flat; variance matches across y
    ens = run_ensemble(grid, narrow_wedge(t0=10 * grid.dt), MULTIPLICATIVE, 999, 800, snapshot_time=0.25)
    fields = np.empty_like(ens.snapshot)
    for r in range(ens.n_replicas):
        f = FieldState(grid=grid, t_abs=0.25, values=ens.snapshot[r])
        fields[r] = stationarity_transform(f).values
    x = grid.x
    i0 = grid.origin_index()
    i1 = int(np.argmin(np.abs(x - 1.0)))
    c = (2 * math.pi * 0.25) ** -0.5
    mean = fields.mean(axis=0)
    se = fields.std(axis=0, ddof=1) / math.sqrt(ens.n_replicas)
    sel = np.abs(x) <= 1.5
    assert np.max(np.abs(mean[sel] - c) / se[sel]) < 4.0
    v0 = fields[:, i0].var(ddof=1)
    v1 = fields[:, i1].var(ddof=1)
    se_var = v0 * math.sqrt(2 / (ens.n_replicas - 1))
    assert abs(v0 - v1) < 4 * math.sqrt(2) * se_var


def test_stationarity_transform_rejects_bad_fields(grid):
    f = FieldState(grid=grid, t_abs=0.0, values=np.ones(grid.nx))
    with pytest.raises(ValueError):
        stationarity_transform(f)
    f2 = FieldState(grid=grid, t_abs=0.5, values=np.ones(grid.nx), mode=ADDITIVE)
    with pytest.raises(ValueError):
        stationarity_transform(f2)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def test_trajectory_round_trip(tmp_path, grid, noise):
    traj = solve(grid, narrow_wedge(t0=0.01), noise, MULTIPLICATIVE, snapshot_times=(0.26, 0.51))
    fn = str(tmp_path / "traj.npz")
    save_trajectory(traj, fn)
    back = load_trajectory(fn)
    assert np.array_equal(back.origin_path.values, traj.origin_path.values)
    assert back.grid == traj.grid
    assert back.ic.kind == "narrow_wedge" and back.ic.t0 == 0.01
    assert len(back.snapshots) == 2
    assert np.array_equal(back.snapshots[1].values, traj.snapshots[1].values)
    assert back.seed == noise.seed and back.stream_id == noise.stream_id
