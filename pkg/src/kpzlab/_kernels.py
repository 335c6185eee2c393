"""Hot inner loops with numba and pure-numpy twin implementations.

Three kernels dominate the runtime of the path statistics and of the solver's
pointwise noise stage:

* ``window_range_sup`` -- sup of ``|v[i] - v[j]|`` over all index pairs with
  ``|i - j| <= w`` (modulus-of-continuity scans over multi-million point
  grids),
* ``holder_sup`` -- sup of ``|v[i] - v[j]| / (|i - j| dt)^beta`` over all
  pairs (quadratic cost),
* ``lognormal_kick`` -- fused in-place ``field *= exp(s z - drift)``.

Each has a numpy implementation and, when numba is importable and not
disabled via ``KPZLAB_NO_NUMBA=1``, an ``@njit`` twin.  The max/min kernels
return bit-identical values on both backends; ``benchmarks/bench_kernels.py``
times one against the other.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, numba_enabled

# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _sliding_extreme(values: np.ndarray, width: int, kind: str) -> np.ndarray:
    """Per-start extreme of windows ``[i, i+width-1]`` clipped to the array.

    van Herk / Gil-Werman two-pass scheme: O(n) regardless of window width.
    """
    if kind == "max":
        op, pad = np.maximum, -np.inf
    else:
        op, pad = np.minimum, np.inf
    n = values.size
    nblocks = -(-n // width)
    padded = np.full(nblocks * width, pad)
    padded[:n] = values
    blocks = padded.reshape(nblocks, width)
    prefix = op.accumulate(blocks, axis=1).ravel()
    suffix = op.accumulate(blocks[:, ::-1], axis=1)[:, ::-1].ravel()
    end = np.minimum(np.arange(n) + width - 1, nblocks * width - 1)
    return op(suffix[:n], prefix[end])


def _window_range_sup_np(values: np.ndarray, w: int) -> float:
    smax = _sliding_extreme(values, w + 1, "max")
    smin = _sliding_extreme(values, w + 1, "min")
    return float(np.max(smax - smin))


def _window_min_array_np(values: np.ndarray, width: int) -> np.ndarray:
    n = values.size
    if width > n:
        raise ValueError(f"window of {width} points exceeds array length {n}")
    return _sliding_extreme(values, width, "min")[: n - width + 1]


def _holder_sup_np(values: np.ndarray, dt: float, beta: float) -> float:
    n = values.size
    best = 0.0
    for d in range(1, n):
        m = float(np.max(np.abs(values[d:] - values[:-d])))
        r = m / (d * dt) ** beta
        if r > best:
            best = r
    return best


def _lognormal_kick_np(field: np.ndarray, z: np.ndarray, s: float, drift: float) -> None:
    # clobbers z; all operations in place
    np.multiply(z, s, out=z)
    np.subtract(z, drift, out=z)
    np.exp(z, out=z)
    np.multiply(field, z, out=field)


# ---------------------------------------------------------------------------
# numba twins (compiled lazily on first use)
# ---------------------------------------------------------------------------

_nb_cache: dict[str, object] = {}


def _compile_numba() -> None:
    from numba import njit

    @njit(cache=True)
    def window_range_sup_nb(v, w):  # pragma: no cover - compiled
        n = v.size
        qmax = np.empty(n, np.int64)
        qmin = np.empty(n, np.int64)
        hmax = tmax = hmin = tmin = 0
        best = 0.0
        for i in range(n):
            lo = i - w
            while tmax > hmax and qmax[hmax] < lo:
                hmax += 1
            while tmin > hmin and qmin[hmin] < lo:
                hmin += 1
            x = v[i]
            while tmax > hmax and v[qmax[tmax - 1]] <= x:
                tmax -= 1
            qmax[tmax] = i
            tmax += 1
            while tmin > hmin and v[qmin[tmin - 1]] >= x:
                tmin -= 1
            qmin[tmin] = i
            tmin += 1
            r = v[qmax[hmax]] - v[qmin[hmin]]
            if r > best:
                best = r
        return best

    @njit(cache=True)
    def window_min_array_nb(v, width):  # pragma: no cover - compiled
        n = v.size
        out = np.empty(n - width + 1, np.float64)
        q = np.empty(n, np.int64)
        h = t = 0
        for i in range(n):
            lo = i - width + 1
            while t > h and q[h] < lo:
                h += 1
            x = v[i]
            while t > h and v[q[t - 1]] >= x:
                t -= 1
            q[t] = i
            t += 1
            if i >= width - 1:
                out[i - width + 1] = v[q[h]]
        return out

    @njit(cache=True)
    def holder_sup_nb(v, dt, beta):  # pragma: no cover - compiled
        n = v.size
        best = 0.0
        for d in range(1, n):
            md = 0.0
            for i in range(n - d):
                x = abs(v[i + d] - v[i])
                if x > md:
                    md = x
            r = md / (d * dt) ** beta
            if r > best:
                best = r
        return best

    @njit(cache=True)
    def lognormal_kick_nb(field, z, s, drift):  # pragma: no cover - compiled
        for i in range(field.size):
            field[i] *= np.exp(s * z[i] - drift)

    _nb_cache["window_range_sup"] = window_range_sup_nb
    _nb_cache["window_min_array"] = window_min_array_nb
    _nb_cache["holder_sup"] = holder_sup_nb
    _nb_cache["lognormal_kick"] = lognormal_kick_nb


def _nb(name: str):
    if not _nb_cache:
        _compile_numba()
    return _nb_cache[name]


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------


def window_range_sup(values: np.ndarray, w: int) -> float:
    """sup of |v[i]-v[j]| over all pairs with |i-j| <= w."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if w < 1 or v.size < 2:
        return 0.0
    if numba_enabled():
        return float(_nb("window_range_sup")(v, w))
    return _window_range_sup_np(v, w)


def window_min_array(values: np.ndarray, width: int) -> np.ndarray:
    """Minimum over every full window of `width` consecutive points."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if numba_enabled():
        if width > v.size:
            raise ValueError(f"window of {width} points exceeds array length {v.size}")
        return _nb("window_min_array")(v, width)
    return _window_min_array_np(v, width)


def holder_sup(values: np.ndarray, dt: float, beta: float) -> float:
    """sup of |v[i]-v[j]| / (|i-j| dt)^beta over all index pairs."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    if numba_enabled():
        return float(_nb("holder_sup")(v, dt, beta))
    return _holder_sup_np(v, dt, beta)


def lognormal_kick(field: np.ndarray, z: np.ndarray, s: float, drift: float) -> None:
    """In-place ``field *= exp(s z - drift)``.  Clobbers ``z``."""
    if numba_enabled():
        _nb("lognormal_kick")(field.reshape(-1), z.reshape(-1), s, drift)
    else:
        _lognormal_kick_np(field.reshape(-1), z.reshape(-1), s, drift)


__all__ = [
    "window_range_sup",
    "window_min_array",
    "holder_sup",
    "lognormal_kick",
    "HAVE_NUMBA",
    "numba_enabled",
]
