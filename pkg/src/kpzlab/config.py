"""Declarative experiment configuration.

The config format is a flat ``key = value`` text document with ``#``
comments.  Dotted keys group into sections; lists are comma-separated.  All
violations are collected and reported together, unknown keys are hard errors,
and a seed is mandatory (there is no wall-clock entropy path anywhere in the
package).

Keys::

    kind                      simulate-she | simulate-fbm | stats | verify
    she.mode                  multiplicative | additive   (default multiplicative)
    grid.x_min  grid.x_max    floats
    grid.nx     grid.nt       positive integers
    grid.t_start grid.t_end   floats, 0 <= t_start < t_end
    ic.kind                   narrow_wedge | brownian | function
    ic.t0                     narrow-wedge smoothing time (float)
    ic.expr                   expression, e.g.  -(|x|^1.5) + 0.25*x
    ic.table                  path to a two-column CSV of (x, f(x))
    ic.seed                   integer, Brownian initial data only
    hyp.theta hyp.delta hyp.lambda hyp.kappa hyp.M    floats > 0
    fbm.hurst                 float in (0,1), default 0.25
    fbm.method                auto | cholesky | circulant   (default auto)
    fbm.rescale               true | false: apply the KPZ factor (default true)
    stats.source              fbm | she   (default fbm)
    stats.alpha               float, default 4
    stats.epsilon             list of floats (each a multiple of dt)
    stats.interval            two floats, default 1, 2
    stats.depths              list of ints
    stats.exceptional_alphas  list of floats
    stats.box_scales          list of floats (defaults to dyadic 2^-6..2^-16)
    run.seed                  integer (required)
    run.replicas              integer >= 1, default 1
    run.threads               integer >= 1, default 1
    run.out                   output directory, default "out"
    verify.criteria           list of criterion numbers, default all
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .grid import GridSpec, make_grid
from .initial_data import BROWNIAN, FUNCTION, NARROW_WEDGE, InitialDatum

KINDS = ("simulate-she", "simulate-fbm", "stats", "verify")

_SCALAR_KEYS: dict[str, type] = {
    "kind": str,
    "she.mode": str,
    "grid.x_min": float,
    "grid.x_max": float,
    "grid.nx": int,
    "grid.t_start": float,
    "grid.t_end": float,
    "grid.nt": int,
    "ic.kind": str,
    "ic.t0": float,
    "ic.expr": str,
    "ic.table": str,
    "ic.seed": int,
    "hyp.theta": float,
    "hyp.delta": float,
    "hyp.lambda": float,
    "hyp.kappa": float,
    "hyp.M": float,
    "fbm.hurst": float,
    "fbm.method": str,
    "fbm.rescale": bool,
    "stats.source": str,
    "stats.alpha": float,
    "run.seed": int,
    "run.replicas": int,
    "run.threads": int,
    "run.out": str,
}

_LIST_KEYS: dict[str, type] = {
    "stats.epsilon": float,
    "stats.interval": float,
    "stats.depths": int,
    "stats.exceptional_alphas": float,
    "stats.box_scales": float,
    "verify.criteria": int,
}

KNOWN_KEYS = set(_SCALAR_KEYS) | set(_LIST_KEYS)


class ConfigError(ValueError):
    """Carries every violation found while parsing a config."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid config:\n  " + "\n  ".join(violations))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    raw: dict[str, str]  # echo of the parsed document
    values: dict[str, Any] = field(repr=False, default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    @property
    def replicas(self) -> int:
        return self.values.get("run.replicas", 1)

    @property
    def threads(self) -> int:
        return self.values.get("run.threads", 1)

    @property
    def out_dir(self) -> str:
        return self.values.get("run.out", "out")

    @property
    def uses_solver(self) -> bool:
        """True when the run integrates the SHE (boundary guard applies)."""
        if self.kind == "simulate-she":
            return True
        return self.kind == "stats" and self.values.get("stats.source", "fbm") == "she"

    def grid(self, override_boundary_guard: bool = False) -> GridSpec:
        missing = [k for k in ("grid.x_min", "grid.x_max", "grid.nx", "grid.t_start", "grid.t_end", "grid.nt") if k not in self.values]
        if missing:
            raise ConfigError([f"missing grid keys: {', '.join(missing)}"])
        v = self.values
        return make_grid(
            v["grid.x_min"], v["grid.x_max"], v["grid.nx"],
            v["grid.t_start"], v["grid.t_end"], v["grid.nt"],
            override_boundary_guard=override_boundary_guard,
        )

    def initial_datum(self) -> InitialDatum | None:
        kind = self.values.get("ic.kind")
        if kind is None:
            return None
        if kind == NARROW_WEDGE:
            return InitialDatum(kind=kind, t0=self.values.get("ic.t0"))
        if kind == BROWNIAN:
            return InitialDatum(kind=kind, seed=self.values.get("ic.seed"))
        table = None
        if "ic.table" in self.values:
            import numpy as np

            table = np.loadtxt(self.values["ic.table"], delimiter=",")
        return InitialDatum(kind=FUNCTION, expr=self.values.get("ic.expr"), table=table)


def _parse_scalar(key: str, raw: str, typ: type, violations: list[str]) -> Any:
    try:
        if typ is bool:
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        violations.append(f"{key}: cannot parse {raw!r} as {typ.__name__}")
        return None


def parse_config(text: str, override_boundary_guard: bool = False) -> ExperimentConfig:
    """Parse and validate a config document; raises ConfigError with all violations."""
    violations: list[str] = []
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            violations.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0].strip()
        if key in raw:
            violations.append(f"line {lineno}: duplicate key {key!r}")
            continue
        raw[key] = value

    values: dict[str, Any] = {}
    for key, rawval in raw.items():
        if key in _SCALAR_KEYS:
            parsed = _parse_scalar(key, rawval, _SCALAR_KEYS[key], violations)
            if parsed is not None:
                values[key] = parsed
        elif key in _LIST_KEYS:
            typ = _LIST_KEYS[key]
            items = [s.strip() for s in rawval.split(",") if s.strip()]
            out = []
            ok = True
            for item in items:
                parsed = _parse_scalar(key, item, typ, violations)
                if parsed is None:
                    ok = False
                    break
                out.append(parsed)
            if ok:
                values[key] = out
        else:
            violations.append(f"unknown key {key!r}")

    kind = values.get("kind")
    if kind is None:
        violations.append("missing required key 'kind'")
    elif kind not in KINDS:
        violations.append(f"kind must be one of {KINDS}, got {kind!r}")

    if "run.seed" not in values:
        violations.append("missing required key 'run.seed' (seeds are mandatory)")
    if values.get("run.replicas", 1) < 1:
        violations.append("run.replicas must be >= 1")
    if values.get("run.threads", 1) < 1:
        violations.append("run.threads must be >= 1")
    if values.get("she.mode", "multiplicative") not in ("multiplicative", "additive"):
        violations.append("she.mode must be multiplicative or additive")
    if values.get("fbm.method", "auto") not in ("auto", "cholesky", "circulant"):
        violations.append("fbm.method must be auto, cholesky or circulant")
    if values.get("stats.source", "fbm") not in ("fbm", "she"):
        violations.append("stats.source must be fbm or she")
    if "ic.kind" in values and values["ic.kind"] not in (NARROW_WEDGE, BROWNIAN, FUNCTION):
        violations.append(f"ic.kind must be one of {(NARROW_WEDGE, BROWNIAN, FUNCTION)}")
    if "stats.interval" in values and len(values["stats.interval"]) != 2:
        violations.append("stats.interval must be two values: start, end")

    # epsilon divisibility against the grid step
    grid_keys = ("grid.t_start", "grid.t_end", "grid.nt")
    if "stats.epsilon" in values and all(k in values for k in grid_keys):
        dt = (values["grid.t_end"] - values["grid.t_start"]) / values["grid.nt"]
        if dt > 0:
            for e in values["stats.epsilon"]:
                ratio = e / dt
                if abs(ratio - round(ratio)) > 1e-8 * max(ratio, 1.0):
                    violations.append(
                        f"stats.epsilon value {e!r} is not an integer multiple of dt = {dt!r}"
                    )

    if violations:
        raise ConfigError(violations)

    cfg = ExperimentConfig(kind=kind, raw=raw, values=values)

    # grid consistency check when a grid is present; the boundary guard only
    # applies where the solver integrates over the domain (fBm paths never
    # touch the spatial lattice)
    if all(k in values for k in ("grid.x_min", "grid.x_max", "grid.nx") + grid_keys):
        try:
            make_grid(
                values["grid.x_min"], values["grid.x_max"], values["grid.nx"],
                values["grid.t_start"], values["grid.t_end"], values["grid.nt"],
                override_boundary_guard=override_boundary_guard or not cfg.uses_solver,
            )
        except ValueError as err:
            raise ConfigError([str(err)]) from err

    return cfg
