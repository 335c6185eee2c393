"""Initial-data classes for the solver: narrow wedge, Brownian, and functions.

Functional data are given either as a closed-form expression in a small
grammar (constants, ``x``, ``|x|``/``abs``, powers, ``+``, ``-``, ``*``,
``exp``, negation, parentheses, and the literal ``-inf``) or as a two-column
sample table interpolated linearly.  ``-inf`` encodes zero mass
(``e^f = 0``).  Growth and floor admissibility checks are probe-based on a
finite set; reports carry the probe parameters so failures reproduce.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .fields import MULTIPLICATIVE, FieldState
from .grid import GridSpec
from .heat import heat_kernel
from .noise import DOMAIN_INITIAL_DATA, stream_generator

NARROW_WEDGE = "narrow_wedge"
BROWNIAN = "brownian"
FUNCTION = "function"
KINDS = (NARROW_WEDGE, BROWNIAN, FUNCTION)

#: default narrow-wedge smoothing time, in units of grid dt
DEFAULT_T0_STEPS = 10

_EXP_OVERFLOW = 709.0  # log of the largest float64


@dataclass(frozen=True)
class HypParams:
    """Admissibility parameters (theta, delta, lambda, kappa, M)."""

    theta: float
    delta: float
    lam: float
    kappa: float
    M: float

    def __post_init__(self) -> None:
        for name in ("theta", "delta", "lam", "kappa", "M"):
            if getattr(self, name) <= 0:
                raise ValueError(f"HypParams.{name} must be > 0")


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>inf|x|abs|exp)"
    r"|(?P<op>\*\*|[-+*^()|]))"
)


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad character in expression at {text[pos:]!r}")
        out.append(m.group(m.lastgroup))
        pos = m.end()
    return out


class _ExprParser:
    """Recursive descent with precedence  + -  <  *  <  unary -  <  ^."""

    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise ValueError(f"expected {expect!r}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.sum_()
        if self.peek() is not None:
            raise ValueError(f"trailing tokens starting at {self.peek()!r}")
        return node

    def sum_(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == "*":
            self.take()
            node = ("mul", node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() in ("^", "**"):
            self.take()
            return ("pow", base, self.unary())
        return base

    def atom(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            node = self.sum_()
            self.take(")")
            return node
        if tok == "|":
            self.take()
            node = self.sum_()
            self.take("|")
            return ("abs", node)
        if tok in ("abs", "exp"):
            fn = self.take()
            self.take("(")
            node = self.sum_()
            self.take(")")
            return (fn, node)
        if tok == "x":
            self.take()
            return ("x",)
        if tok == "inf":
            self.take()
            return ("const", math.inf)
        if tok is None:
            raise ValueError("unexpected end of expression")
        self.take()
        return ("const", float(tok))


def _eval_node(node, x: np.ndarray) -> np.ndarray:
    op = node[0]
    if op == "const":
        return np.full_like(x, node[1])
    if op == "x":
        return x.copy()
    if op == "neg":
        return -_eval_node(node[1], x)
    if op == "abs":
        return np.abs(_eval_node(node[1], x))
    if op == "exp":
        return np.exp(_eval_node(node[1], x))
    a = _eval_node(node[1], x)
    b = _eval_node(node[2], x)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return np.power(a, b)
    raise AssertionError(f"unknown node {op}")


def parse_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression string to a vectorized function of x."""
    node = _ExprParser(_tokenize(text)).parse()

    def fn(x: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            out = _eval_node(node, np.asarray(x, dtype=np.float64))
        if np.any(np.isnan(out)):
            raise ValueError(f"expression {text!r} is not real-valued everywhere on the probes")
        return out

    return fn


def table_function(table: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Linear interpolant of a two-column (x, f) sample table."""
    tab = np.asarray(table, dtype=np.float64)
    if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
        raise ValueError("table must have shape (n, 2) with n >= 2")
    xs, fs = tab[:, 0], tab[:, 1]
    if np.any(np.diff(xs) <= 0):
        raise ValueError("table x-values must be strictly increasing")

    def fn(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < xs[0]) or np.any(x > xs[-1]):
            raise ValueError("table does not cover the requested points")
        return np.interp(x, xs, fs)

    return fn


# ---------------------------------------------------------------------------
# initial datum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitialDatum:
    """Initial condition descriptor.

    kind ``narrow_wedge``: delta mass at the origin, realised on the lattice
    as the exact heat-kernel profile at smoothing time ``t0`` (default
    ``10*dt``); downstream times are absolute (``t0 + elapsed``).
    kind ``brownian``: two-sided random walk exponential with its own seed.
    kind ``function``: ``exp(f)`` for an expression or table descriptor,
    with ``f = -inf`` meaning zero mass.
    """

    kind: str
    expr: str | None = None
    table: np.ndarray | None = None
    seed: int | None = None
    t0: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == FUNCTION and (self.expr is None) == (self.table is None):
            raise ValueError("function initial data needs exactly one of expr or table")
        if self.kind == BROWNIAN and self.seed is None:
            raise ValueError("brownian initial data needs its own seed")
        if self.kind == NARROW_WEDGE and self.t0 is not None and self.t0 <= 0:
            raise ValueError("narrow wedge t0 must be > 0")

    def function(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.kind != FUNCTION:
            raise ValueError(f"{self.kind} initial data is not a function descriptor")
        if self.expr is not None:
            return parse_expression(self.expr)
        return table_function(self.table)


def narrow_wedge(t0: float | None = None) -> InitialDatum:
    return InitialDatum(kind=NARROW_WEDGE, t0=t0)


def brownian_ic(seed: int) -> InitialDatum:
    return InitialDatum(kind=BROWNIAN, seed=seed)


def function_ic(expr: str | None = None, table: np.ndarray | None = None) -> InitialDatum:
    return InitialDatum(kind=FUNCTION, expr=expr, table=table)


# ---------------------------------------------------------------------------
# admissibility checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypReport:
    growth_ok: bool
    floor_ok: bool
    probe_extent: float
    n_probes: int
    growth_violation_x: float | None = None
    floor_witness: tuple[float, float] | None = None

    @property
    def passed(self) -> bool:
        return self.growth_ok and self.floor_ok


def validate_hyp(
    ic: InitialDatum,
    params: HypParams,
    probe_extent: float,
    n_probes: int = 4097,
) -> HypReport:
    """Probe-based admissibility check of a functional initial datum.

    Growth: ``f(x) <= lam (1 + |x|^(2-delta))`` on a dense probe set of
    ``[-probe_extent, probe_extent]``.  Floor: some subinterval of
    ``[-M, M]`` of length theta has ``f >= -kappa`` throughout (scanned on a
    dense grid with the sliding-window minimum kernel).
    """
    if ic.kind != FUNCTION:
        raise ValueError("validate_hyp applies to function initial data")
    if probe_extent < params.M:
        raise ValueError("probe_extent must cover [-M, M]")
    f = ic.function()

    xs = np.linspace(-probe_extent, probe_extent, n_probes)
    vals = f(xs)
    bound = params.lam * (1.0 + np.abs(xs) ** (2.0 - params.delta))
    bad = vals > bound
    growth_ok = not bool(np.any(bad))
    violation = float(xs[np.argmax(bad)]) if not growth_ok else None

    # floor scan: window of length theta sliding over [-M, M]
    per_theta = 65
    h = params.theta / (per_theta - 1)
    n_scan = int(math.floor(2 * params.M / h)) + 1
    scan_x = -params.M + h * np.arange(n_scan)
    scan_v = f(scan_x)
    floor_ok = False
    witness = None
    if n_scan >= per_theta:
        wmins = _kernels.window_min_array(scan_v, per_theta)
        hits = np.nonzero(wmins >= -params.kappa)[0]
        if hits.size:
            floor_ok = True
            a = float(scan_x[hits[0]])
            witness = (a, a + params.theta)
    return HypReport(
        growth_ok=growth_ok,
        floor_ok=floor_ok,
        probe_extent=float(probe_extent),
        n_probes=int(n_probes),
        growth_violation_x=violation,
        floor_witness=witness,
    )


@dataclass(frozen=True)
class MomentBound:
    """Exponential-moment growth certificate ``log M_k <= lam_k (1+|x|^(2-delta_k))``."""

    k: int
    lambda_k: float | None
    delta_k: float
    probe_x: np.ndarray
    log_moments: np.ndarray
    satisfied: bool = field(default=False)


def log_moment_bound(
    ic: InitialDatum,
    k: int,
    probe_x: np.ndarray,
    params: HypParams | None = None,
) -> MomentBound:
    """Evaluate ``log E[e^{k f(x)}]`` on probes and fit the smallest ladder bound.

    Deterministic f gives ``k f(x)``; Brownian data give ``k^2 |x| / 2``.
    The candidate ladder is ``lambda_k in {2 k lam, k^2/2, max of both}`` with
    ``delta_k = min(1, delta)`` (``k^2/2`` and ``delta_k = 1`` when no params
    are supplied).  The smallest candidate satisfying the bound on every probe
    is reported; ``satisfied=False`` if none does.
    """
    if k < 1:
        raise ValueError("moment order k must be >= 1")
    xs = np.asarray(probe_x, dtype=np.float64)
    if ic.kind == NARROW_WEDGE:
        raise ValueError("narrow wedge is not a function; no moment bound")
    if ic.kind == BROWNIAN:
        logm = 0.5 * k * k * np.abs(xs)
    else:
        logm = k * ic.function()(xs)

    if params is not None:
        delta_k = min(1.0, params.delta)
        candidates = sorted({2.0 * k * params.lam, 0.5 * k * k, max(2.0 * k * params.lam, 0.5 * k * k)})
    else:
        delta_k = 1.0
        candidates = [0.5 * k * k]

    shape = 1.0 + np.abs(xs) ** (2.0 - delta_k)
    for lam_k in candidates:
        if np.all(logm <= lam_k * shape):
            return MomentBound(k, float(lam_k), delta_k, xs, logm, satisfied=True)
    return MomentBound(k, None, delta_k, xs, logm, satisfied=False)


# ---------------------------------------------------------------------------
# field construction
# ---------------------------------------------------------------------------


def resolve_t0(ic: InitialDatum, grid: GridSpec) -> float:
    """Narrow-wedge smoothing time (explicit value or the 10*dt default)."""
    if ic.kind != NARROW_WEDGE:
        return 0.0
    t0 = ic.t0 if ic.t0 is not None else DEFAULT_T0_STEPS * grid.dt
    if t0 < 4 * grid.dt:
        raise ValueError(f"narrow wedge needs t0 >= 4*dt = {4 * grid.dt:g}, got {t0:g}")
    return float(t0)


def make_initial_field(grid: GridSpec, ic: InitialDatum) -> FieldState:
    """Build the solver's t=start field for an initial datum.

    Function data: ``exp(f(x_i))`` with ``-inf -> 0``; overflow of the
    exponential at any lattice point is an error.  Brownian data: exponential
    of a two-sided lattice walk with step variance dx anchored at B(0) = 0.
    Narrow wedge: the heat-kernel profile at smoothing time t0, reported at
    absolute time t0.
    """
    x = grid.x
    if ic.kind == NARROW_WEDGE:
        t0 = resolve_t0(ic, grid)
        return FieldState(grid=grid, t_abs=grid.t_start + t0, values=heat_kernel(t0, x), mode=MULTIPLICATIVE)
    if ic.kind == BROWNIAN:
        i0 = grid.origin_index()
        g = stream_generator(ic.seed, 0, DOMAIN_INITIAL_DATA)
        steps = g.standard_normal(grid.nx) * math.sqrt(grid.dx)
        b = np.empty(grid.nx)
        b[i0] = 0.0
        # right walk from the origin, then left walk, each with its own steps
        for i in range(i0 + 1, grid.nx):
            b[i] = b[i - 1] + steps[i]
        for i in range(i0 - 1, -1, -1):
            b[i] = b[i + 1] + steps[i]
        return FieldState(grid=grid, t_abs=grid.t_start, values=np.exp(b), mode=MULTIPLICATIVE)
    fvals = ic.function()(x)
    if np.any(fvals > _EXP_OVERFLOW):
        bad = x[np.argmax(fvals > _EXP_OVERFLOW)]
        raise OverflowError(f"exp(f) overflows float64 at x = {bad:g}")
    field_vals = np.where(np.isneginf(fvals), 0.0, np.exp(fvals))
    return FieldState(grid=grid, t_abs=grid.t_start, values=field_vals, mode=MULTIPLICATIVE)
