import numpy as np
import pytest

from kpzlab.grid import make_grid
from kpzlab.noise import (
    NoiseRealization,
    noise_statistics,
    philox_key,
    sample_noise,
    stream_generator,
)
from kpzlab.pathstats import ks_normality


@pytest.fixture(scope="module")
def big_noise():
    # 2048 x 512 > 1e6 cells
    grid = make_grid(-8, 8, 512, 0, 2, 2048)
    return sample_noise(grid, seed=314159, stream_id=0)


def test_determinism_bit_exact(big_noise):
    again = sample_noise(big_noise.grid, 314159, 0)
    assert np.array_equal(big_noise.increments, again.increments)


def test_distinct_streams_differ(big_noise):
    other = sample_noise(big_noise.grid, 314159, 1)
    assert not np.array_equal(big_noise.increments, other.increments)


def test_empirical_mean(big_noise):
    g = big_noise.grid
    n = g.nt * g.nx
    cell_var = g.dt * g.dx
    assert abs(big_noise.increments.mean()) < 4 * np.sqrt(cell_var / n)


def test_empirical_variance_within_1pct(big_noise):
    g = big_noise.grid
    v = big_noise.increments.var()
    assert abs(v / (g.dt * g.dx) - 1) < 0.01


def test_lag1_correlations_bounded(big_noise):
    g = big_noise.grid
    st = noise_statistics(big_noise)
    bound = 4 / np.sqrt(g.nt * g.nx)
    assert st.correlation_defined
    assert abs(st.lag1_space) < bound
    assert abs(st.lag1_time) < bound


def test_cell_distribution_ks(big_noise):
    g = big_noise.grid
    z = big_noise.increments.ravel()[:100_000] / np.sqrt(g.dt * g.dx)
    res = ks_normality(z)
    assert res.passed, f"KS {res.statistic} >= {res.threshold}"


def test_zeroed_array_statistics_flagged():
    grid = make_grid(-6, 6, 16, 0, 1, 8)
    zeroed = NoiseRealization(grid=grid, seed=0, stream_id=0, increments=np.zeros((8, 16)))
    st = noise_statistics(zeroed)
    assert st.mean == 0.0
    assert st.variance == 0.0
    assert not st.correlation_defined


def test_scaling_variance():
    grid = make_grid(-6, 6, 64, 0, 1, 256)
    nz = sample_noise(grid, 7, 0)
    doubled = NoiseRealization(grid=grid, seed=7, stream_id=0, increments=2 * nz.increments)
    st2 = noise_statistics(doubled)
    st1 = noise_statistics(nz)
    assert st2.variance == pytest.approx(4 * st1.variance)


def test_stream_consumption_order_matches_oneshot():
    # the ensemble pulls row chunks; values must equal the one-shot array
    grid = make_grid(-6, 6, 32, 0, 1, 64)
    full = sample_noise(grid, 99, 5).increments
    g = stream_generator(99, 5)
    rows = []
    for start in range(0, 64, 16):
        z = g.standard_normal(16 * 32).reshape(16, 32)
        rows.append(z * np.sqrt(grid.dt * grid.dx))
    assert np.array_equal(full, np.vstack(rows))


def test_philox_key_domain_separation():
    a = philox_key(1, 2, 0)
    b = philox_key(1, 2, 1)
    assert not np.array_equal(a, b)
    with pytest.raises(ValueError):
        philox_key(-1, 0, 0)
    with pytest.raises(ValueError):
        philox_key(0, 2**64, 0)
