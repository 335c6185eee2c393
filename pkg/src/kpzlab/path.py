"""Uniformly sampled scalar time series and the shared CSV export."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Path:
    """A scalar path sampled at ``t0 + i*dt``.

    Generators that sample at arbitrary (non-uniform) times set ``times``
    explicitly and leave ``dt = 0``; estimators that need uniform sampling
    reject such paths.
    """

    t0: float
    dt: float
    values: np.ndarray
    times: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if self.times is not None:
            ts = np.asarray(self.times, dtype=np.float64)
            if ts.shape != v.shape:
                raise ValueError("times and values must have the same length")
            if np.any(np.diff(ts) <= 0):
                raise ValueError("times must be strictly increasing")
            object.__setattr__(self, "times", ts)

    @property
    def uniform(self) -> bool:
        return self.times is None

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def t_end(self) -> float:
        if self.times is not None:
            return float(self.times[-1])
        return self.t0 + self.dt * (len(self) - 1)

    def sample_times(self) -> np.ndarray:
        if self.times is not None:
            return self.times
        return self.t0 + self.dt * np.arange(len(self))

    def require_uniform(self) -> None:
        if not self.uniform:
            raise ValueError("this operation requires a uniformly sampled path")

    def index_of(self, t: float, name: str = "t") -> int:
        """Exact lattice index of an absolute time; off-lattice is an error."""
        if self.times is not None:
            hits = np.nonzero(np.abs(self.times - t) <= 1e-12 * max(abs(t), 1.0))[0]
            if hits.size != 1:
                raise ValueError(f"{name} = {t!r} is not a sample time of this path")
            return int(hits[0])
        ratio = (t - self.t0) / self.dt
        i = round(ratio)
        if abs(ratio - i) > 1e-8 or not (0 <= i < len(self)):
            raise ValueError(f"{name} = {t!r} is not on the path lattice")
        return int(i)

    def steps_of(self, interval: float, name: str = "epsilon") -> int:
        """An interval as an exact number of dt steps (hard error otherwise)."""
        self.require_uniform()
        ratio = interval / self.dt
        n = round(ratio)
        if abs(ratio - n) > 1e-8 * max(abs(ratio), 1.0):
            raise ValueError(
                f"{name} = {interval!r} is not an integer multiple of dt = {self.dt!r}"
            )
        return int(n)


def write_paths_csv(paths: Sequence[Path] | Iterable[Path], fp: IO[str]) -> None:
    """Write paths as CSV rows ``(replica, t, value)``."""
    w = csv.writer(fp)
    w.writerow(["replica", "t", "value"])
    for r, p in enumerate(paths):
        ts = p.sample_times()
        for t, v in zip(ts, p.values):
            w.writerow([r, repr(float(t)), repr(float(v))])


def read_paths_csv(fp: IO[str]) -> list[Path]:
    """Inverse of :func:`write_paths_csv` (uniform grids are reconstructed)."""
    rows = list(csv.reader(fp))
    if not rows or rows[0] != ["replica", "t", "value"]:
        raise ValueError("not a paths CSV (expected header replica,t,value)")
    by_rep: dict[int, list[tuple[float, float]]] = {}
    for rep, t, v in rows[1:]:
        by_rep.setdefault(int(rep), []).append((float(t), float(v)))
    paths = []
    for rep in sorted(by_rep):
        ts = np.array([t for t, _ in by_rep[rep]])
        vs = np.array([v for _, v in by_rep[rep]])
        if ts.size >= 2:
            dts = np.diff(ts)
            if np.allclose(dts, dts[0], rtol=1e-9, atol=0):
                paths.append(Path(t0=float(ts[0]), dt=float(dts[0]), values=vs))
                continue
        paths.append(Path(t0=float(ts[0]), dt=0.0, values=vs, times=ts))
    return paths
