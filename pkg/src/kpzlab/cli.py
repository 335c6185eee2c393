"""Command-line interface: simulate, fbm, stats, verify."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config
from .runner import emit_report, run_experiment

_KIND_BY_COMMAND = {
    "simulate": "simulate-she",
    "fbm": "simulate-fbm",
    "stats": "stats",
    "verify": "verify",
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="path to the experiment config")
    sub.add_argument("--seed", type=int, help="override run.seed")
    sub.add_argument("--replicas", type=int, help="override run.replicas")
    sub.add_argument("--threads", type=int, help="override run.threads")
    sub.add_argument("--out", help="override run.out output directory")
    sub.add_argument(
        "--override-boundary-guard",
        action="store_true",
        help="allow domains narrower than 10 sqrt(t_end)",
    )
    sub.add_argument(
        "--report-format",
        choices=("csv", "text-table"),
        default="text-table",
        help="summary rendering emitted after the run",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpzlab",
        description="Simulation and verification laboratory for KPZ temporal sample paths",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for cmd, kind in _KIND_BY_COMMAND.items():
        sub = subs.add_parser(cmd, help=f"run a {kind} experiment")
        _add_common(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fp:
            text = fp.read()
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2

    overrides = []
    if args.seed is not None:
        overrides.append(("run.seed", str(args.seed)))
    if args.replicas is not None:
        overrides.append(("run.replicas", str(args.replicas)))
    if args.threads is not None:
        overrides.append(("run.threads", str(args.threads)))
    if args.out is not None:
        overrides.append(("run.out", args.out))
    for key, value in overrides:
        lines = [ln for ln in text.splitlines() if not ln.strip().startswith(key)]
        lines.append(f"{key} = {value}")
        text = "\n".join(lines)

    try:
        config = parse_config(text, override_boundary_guard=args.override_boundary_guard)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    expected = _KIND_BY_COMMAND[args.command]
    if config.kind != expected:
        print(
            f"error: config kind is {config.kind!r} but the {args.command} command expects {expected!r}",
            file=sys.stderr,
        )
        return 2

    manifest = run_experiment(config, override_boundary_guard=args.override_boundary_guard)
    emit_report(manifest, args.report_format)
    print(f"wrote {len(manifest.files)} files to {manifest.out_dir} (manifest.txt has checksums)")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
