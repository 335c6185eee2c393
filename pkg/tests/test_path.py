import io

import numpy as np
import pytest

from kpzlab.path import Path, read_paths_csv, write_paths_csv


def test_uniform_path_basics():
    p = Path(t0=1.0, dt=0.25, values=np.array([0.0, 1.0, 4.0]))
    assert p.uniform
    assert len(p) == 3
    assert p.t_end == 1.5
    assert np.allclose(p.sample_times(), [1.0, 1.25, 1.5])
    assert p.index_of(1.25) == 1
    assert p.steps_of(0.5) == 2


def test_index_and_steps_reject_off_lattice():
    p = Path(t0=0.0, dt=0.1, values=np.zeros(11))
    with pytest.raises(ValueError):
        p.index_of(0.15)
    with pytest.raises(ValueError):
        p.index_of(2.0)
    with pytest.raises(ValueError):
        p.steps_of(0.35)
    assert p.steps_of(0.3) == 3


def test_nonuniform_path():
    times = np.array([0.0, 0.1, 0.5, 2.0])
    p = Path(t0=0.0, dt=0.0, values=np.arange(4.0), times=times)
    assert not p.uniform
    assert p.index_of(0.5) == 2
    with pytest.raises(ValueError):
        p.steps_of(0.1)
    with pytest.raises(ValueError):
        p.require_uniform()
    with pytest.raises(ValueError):
        Path(t0=0.0, dt=0.0, values=np.zeros(3), times=np.array([0.0, 1.0, 1.0]))


def test_csv_round_trip():
    paths = [
        Path(t0=0.0, dt=0.5, values=np.array([1.0, 2.0, -3.0])),
        Path(t0=1.0, dt=0.5, values=np.array([0.25, 0.125, 17.0])),
    ]
    buf = io.StringIO()
    write_paths_csv(paths, buf)
    buf.seek(0)
    back = read_paths_csv(buf)
    assert len(back) == 2
    for a, b in zip(paths, back):
        assert np.array_equal(a.values, b.values)
        assert a.t0 == b.t0 and a.dt == b.dt


def test_csv_rejects_garbage():
    with pytest.raises(ValueError):
        read_paths_csv(io.StringIO("a,b\n1,2\n"))
