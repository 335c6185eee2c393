"""Experiment orchestration: seeded runs, CSV artifacts, manifests, reports.

Outputs are a pure function of (config, seed): replicas are keyed by stream
id, aggregation is ordered by stream id, and CSV floats are written with
``repr`` so files are byte-identical across thread counts.  The manifest
echoes the config, lists per-replica streams, and carries a sha256 checksum
of every emitted file; re-running from the echoed config reproduces the
checksums.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import __version__, acceptance
from .config import ConfigError, ExperimentConfig, parse_config
from .ensemble import run_ensemble
from .fbm import FbmSpec, rescale_to_kpz, sample_fbm, sample_fbm_circulant
from .path import Path, write_paths_csv
from .pathstats import (
    MOC_LIL_CONSTANT,
    QUARTIC_VARIATION_RATE,
    alpha_variation,
    box_dimension,
    exceptional_set,
    lil_profile,
    moc_profile,
)
REPORT_HEADER = ["check", "target", "measured", "se", "tolerance", "pass"]


@dataclass
class RunManifest:
    kind: str
    code_version: str
    seed: int
    stream_ids: str
    config_echo: dict[str, str]
    files: dict[str, str] = field(default_factory=dict)  # name -> sha256
    timings: dict[str, float] = field(default_factory=dict)
    out_dir: str = "out"

    def write(self, filename: FsPath) -> None:
        lines = [
            f"manifest.kind = {self.kind}",
            f"manifest.code_version = {self.code_version}",
            f"manifest.seed = {self.seed}",
            f"manifest.stream_ids = {self.stream_ids}",
        ]
        lines += [f"config.{k} = {v}" for k, v in sorted(self.config_echo.items())]
        lines += [f"checksum.{k} = {v}" for k, v in sorted(self.files.items())]
        lines += [f"time.{k} = {v:.3f}" for k, v in sorted(self.timings.items())]
        filename.write_text("\n".join(lines) + "\n")

    @staticmethod
    def read(filename: FsPath) -> "RunManifest":
        kind = version = ""
        seed = 0
        streams = ""
        echo: dict[str, str] = {}
        files: dict[str, str] = {}
        timings: dict[str, float] = {}
        for line in filename.read_text().splitlines():
            if not line.strip():
                continue
            key, _, val = line.partition(" = ")
            if key == "manifest.kind":
                kind = val
            elif key == "manifest.code_version":
                version = val
            elif key == "manifest.seed":
                seed = int(val)
            elif key == "manifest.stream_ids":
                streams = val
            elif key.startswith("config."):
                echo[key[len("config.") :]] = val
            elif key.startswith("checksum."):
                files[key[len("checksum.") :]] = val
            elif key.startswith("time."):
                timings[key[len("time.") :]] = float(val)
        return RunManifest(kind, version, seed, streams, echo, files, timings, str(filename.parent))

    def echoed_config_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in sorted(self.config_echo.items()))


def _sha256(path: FsPath) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _fbm_paths(config: ExperimentConfig, grid, rescale: bool) -> list[Path]:
    hurst = config.get("fbm.hurst", 0.25)
    method = config.get("fbm.method", "auto")
    n = grid.nt
    if method == "auto":
        power_of_two = n >= 1 and (n & (n - 1)) == 0
        method = "circulant" if (n > 4096 and power_of_two and grid.t_start == 0.0) else "cholesky"
    paths = []
    for r in range(config.replicas):
        if method == "circulant":
            if grid.t_start != 0.0:
                raise ConfigError(["circulant fbm requires grid.t_start = 0"])
            p = sample_fbm_circulant(hurst, n, grid.dt, config.seed, r)
        else:
            p = sample_fbm(FbmSpec(hurst=hurst, times=grid.times, method="cholesky",
                                   seed=config.seed, stream_id=r))
        paths.append(rescale_to_kpz(p) if rescale else p)
    return paths


def _she_paths(config: ExperimentConfig, grid) -> list[Path]:
    mode = config.get("she.mode", "multiplicative")
    ic = None if mode == "additive" else config.initial_datum()
    if mode != "additive" and ic is None:
        raise ConfigError(["simulate-she needs ic.* keys (or she.mode = additive)"])
    ens = run_ensemble(grid, ic, mode, config.seed, config.replicas, threads=config.threads)
    return ens.paths()


def _write_csv(path: FsPath, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(c) if isinstance(c, float) else c for c in row])


def run_experiment(config: ExperimentConfig, override_boundary_guard: bool = False) -> RunManifest:
    """Execute one configured experiment and write its artifacts."""
    out = FsPath(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        kind=config.kind,
        code_version=__version__,
        seed=config.seed,
        stream_ids=f"0..{config.replicas - 1}",
        config_echo=dict(config.raw),
        out_dir=str(out),
    )
    t_start = time.perf_counter()

    if config.kind in ("simulate-she", "simulate-fbm", "stats"):
        grid = config.grid(override_boundary_guard or not config.uses_solver)
        source = config.get("stats.source", "fbm") if config.kind == "stats" else None
        if config.kind == "simulate-she" or source == "she":
            paths = _she_paths(config, grid)
        else:
            paths = _fbm_paths(config, grid, rescale=config.get("fbm.rescale", True))
        manifest.timings["simulate"] = time.perf_counter() - t_start

        if config.kind != "stats":
            with open(out / "paths.csv", "w", newline="") as fp:
                write_paths_csv(paths, fp)
        else:
            _write_stats(config, paths, out)
    elif config.kind == "verify":
        numbers = config.get("verify.criteria")
        results = acceptance.run_criteria(numbers)
        rows = []
        detail_rows = []
        for n, reports in sorted(results.items()):
            head = acceptance.headline(reports)
            ok = all(r.passed for r in reports)
            rows.append([head.name, head.target, head.measured, head.se, head.tolerance, ok])
            for r in reports:
                detail_rows.append([r.name, r.target, r.measured, r.se, r.tolerance, r.passed])
        _write_csv(out / "report.csv", REPORT_HEADER, rows)
        _write_csv(out / "report_detail.csv", REPORT_HEADER, detail_rows)
        manifest.timings["verify"] = time.perf_counter() - t_start
    else:  # pragma: no cover - parse_config rejects unknown kinds
        raise ConfigError([f"unhandled kind {config.kind!r}"])

    for f in sorted(out.iterdir()):
        if f.is_file() and f.name != "manifest.txt":
            manifest.files[f.name] = _sha256(f)
    manifest.timings["total"] = time.perf_counter() - t_start
    manifest.write(out / "manifest.txt")
    return manifest


def _write_stats(config: ExperimentConfig, paths: list[Path], out: FsPath) -> None:
    interval = tuple(config.get("stats.interval", [1.0, 2.0]))
    alpha = config.get("stats.alpha", 4.0)
    epsilons = config.get("stats.epsilon", [])
    exact_scales = config.get("stats.source", "fbm") == "fbm"

    rows = []
    for eps in epsilons:
        vals = np.array([alpha_variation(p, alpha, eps, interval).value for p in paths])
        target = QUARTIC_VARIATION_RATE * (interval[1] - interval[0]) if alpha == 4.0 else math.nan
        rows.append([alpha, eps, float(vals.mean()),
                     float(vals.std(ddof=1) / math.sqrt(max(len(vals) - 1, 1))) if len(vals) > 1 else 0.0,
                     target])
    # an empty selection still documents itself: header-only table
    _write_csv(out / "variation.csv", ["alpha", "epsilon", "mean", "se", "target"], rows)

    depths = config.get("stats.depths")
    if depths:
        lil_rows, moc_rows = [], []
        lil_stats = []
        moc_stats = []
        for p in paths:
            prof = lil_profile(p, interval[0], max(depths), allow_fine_scales=exact_scales)
            lil_stats.append(prof.statistics)
            mprof = moc_profile(p, depths, interval, allow_fine_scales=exact_scales)
            moc_stats.append(mprof.statistics)
            lil_depths, lil_eps = prof.depths, prof.epsilons
            moc_eps = mprof.epsilons
        lil_mean = np.mean(lil_stats, axis=0)
        moc_mean = np.mean(moc_stats, axis=0)
        for d, e, s in zip(lil_depths, lil_eps, lil_mean):
            lil_rows.append([int(d), float(e), float(s), MOC_LIL_CONSTANT])
        for d, e, s in zip(sorted(depths), moc_eps, moc_mean):
            moc_rows.append([int(d), float(e), float(s), MOC_LIL_CONSTANT])
        _write_csv(out / "lil_profile.csv", ["level", "epsilon", "statistic", "target"], lil_rows)
        _write_csv(out / "moc_profile.csv", ["level", "epsilon", "statistic", "target"], moc_rows)

    alphas = config.get("stats.exceptional_alphas")
    if alphas:
        resolution = max(config.get("stats.depths", [16]))
        # default to the membership probe window, widened to span two decades
        lo = max(1, min(-(-resolution // 2), resolution - 7))
        scales = config.get("stats.box_scales", [2.0**-m for m in range(lo, resolution + 1)])
        for a in alphas:
            rows = []
            counts = []
            slopes = []
            for p in paths:
                es = exceptional_set(p, a, resolution, interval)
                res = box_dimension(es.times, scales, interval, alpha=a)
                counts.append(res.counts)
                slopes.append(res.slope)
            mean_counts = np.mean(counts, axis=0)
            sorted_scales = np.sort(np.asarray(scales))[::-1]
            for s_val, c in zip(sorted_scales, mean_counts):
                rows.append([float(s_val), float(c)])
            _write_csv(out / f"boxes_alpha{a:g}.csv", ["scale", "count"], rows)
            rows2 = [[a, float(np.mean(slopes)), 1.0 - a * a]]
            _write_csv(out / f"box_dimension_alpha{a:g}.csv", ["alpha", "slope", "target"], rows2)


def emit_report(manifest: RunManifest, fmt: str = "text-table") -> list[FsPath]:
    """Render the manifest's tabular artifacts with target constants annotated.

    ``csv`` re-emits a combined ``summary.csv``; ``text-table`` writes a
    human-readable ``summary.txt``.
    """
    if fmt not in ("csv", "text-table"):
        raise ValueError("format must be 'csv' or 'text-table'")
    out = FsPath(manifest.out_dir)
    produced: list[FsPath] = []
    tables: list[tuple[str, list[list[str]]]] = []
    for name in sorted(manifest.files):
        if not name.endswith(".csv"):
            continue
        with open(out / name, newline="") as fp:
            rows = list(csv.reader(fp))
        tables.append((name, rows))
    constants = (
        f"targets: 6/pi = {QUARTIC_VARIATION_RATE:.6f}, (8/pi)^(1/4) = {MOC_LIL_CONSTANT:.6f}, "
        f"(pi/2)^(1/4) = {(math.pi / 2) ** 0.25:.6f}, box dimension 1 - alpha^2"
    )
    if fmt == "csv":
        target = out / "summary.csv"
        with open(target, "w", newline="") as fp:
            w = csv.writer(fp)
            w.writerow(["# " + constants])
            for name, rows in tables:
                w.writerow([f"# {name}"])
                for row in rows:
                    w.writerow(row)
        produced.append(target)
    else:
        target = out / "summary.txt"
        lines = [constants, ""]
        for name, rows in tables:
            lines.append(f"== {name} ==")
            if rows:
                widths = [max(len(r[i]) for r in rows if i < len(r)) for i in range(len(rows[0]))]
                for row in rows:
                    lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
            lines.append("")
        target.write_text("\n".join(lines))
        produced.append(target)
    return produced
