import math

import numpy as np
import pytest

from kpzlab.grid import BoundaryGuardError, GridSpec, make_grid


def test_make_grid_derived_steps():
    g = make_grid(-8, 8, 512, 0, 2, 2048)
    assert g.dx == 0.03125
    assert g.dt == pytest.approx(2 / 2048)
    assert g.width == 16
    assert len(g.x) == 512
    assert len(g.times) == 2049


def test_degenerate_single_cell_requires_override():
    with pytest.raises(ValueError):
        make_grid(0, 1, 1, 0, 1, 1)
    g = make_grid(0, 1, 1, 0, 1, 1, override_boundary_guard=True)
    assert g.dx == 1.0
    assert g.dt == 1.0


def test_boundary_guard_rejects_narrow_domain():
    # width 2 < 10 sqrt(2)
    with pytest.raises(BoundaryGuardError):
        make_grid(-1, 1, 64, 0, 2, 100)
    g = make_grid(-1, 1, 64, 0, 2, 100, override_boundary_guard=True)
    assert g.nx == 64


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(x_min=0, x_max=0, nx=4, t_start=0, t_end=1, nt=4),
        dict(x_min=0, x_max=12, nx=4, t_start=1, t_end=1, nt=4),
        dict(x_min=0, x_max=12, nx=0, t_start=0, t_end=1, nt=4),
        dict(x_min=0, x_max=12, nx=4, t_start=0, t_end=1, nt=0),
        dict(x_min=0, x_max=math.inf, nx=4, t_start=0, t_end=1, nt=4),
        dict(x_min=0, x_max=12, nx=4, t_start=-1, t_end=1, nt=4),
    ],
)
def test_make_grid_rejects_bad_input(kwargs):
    with pytest.raises(ValueError):
        make_grid(**kwargs)


def test_origin_index():
    g = make_grid(-6, 6, 384, 0, 1, 64)
    i = g.origin_index()
    assert g.x[i] == 0.0
    g2 = GridSpec(0.015, 12.015, 384, 0.0, 1.0, 64)
    with pytest.raises(ValueError):
        g2.origin_index()


def test_time_steps_divisibility():
    g = make_grid(-6, 6, 384, 0, 1, 1000)
    assert g.time_steps(0.003) == 3
    assert g.time_steps(0.25) == 250
    with pytest.raises(ValueError):
        g.time_steps(0.0035)


def test_grid_x_covers_domain():
    g = make_grid(-6, 6, 384, 0, 1, 64)
    assert g.x[0] == -6.0
    assert np.isclose(g.x[-1], 6.0 - g.dx)
