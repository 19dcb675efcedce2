"""Command-line interface: ``grwsim run|plot|equivalence|presets``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import stats
from .config import PRESET_NOTES, PRESETS, TIME_UNITS, parse_config
from .engine import run_ensemble
from .errors import GrwSimError
from .io import PLOTTERS, plot_command, run_command
from .kernels import BACKENDS


def _load(path) -> "ExperimentConfig":  # noqa: F821
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GrwSimError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)


def _time(text: str) -> float:
    parts = text.split()
    if len(parts) == 1:
        for unit in sorted(TIME_UNITS, key=len, reverse=True):
            if parts[0].endswith(unit) and parts[0][: -len(unit)]:
                try:
                    return float(parts[0][: -len(unit)]) * TIME_UNITS[unit]
                except ValueError:
                    break
        return float(parts[0])
    if len(parts) == 2 and parts[1] in TIME_UNITS:
        return float(parts[0]) * TIME_UNITS[parts[1]]
    raise argparse.ArgumentTypeError(f"invalid time {text!r}")


def cmd_run(args):
    cfg = _load(args.config)
    manifest = run_command(cfg, args.output, threads=args.threads, backend=args.backend)
    summary = json.loads((Path(args.output) / "summary.json").read_text())
    print(f"wrote {len(manifest['files'])} files to {args.output}")
    if summary.get("born_fraction_R") is not None:
        print(
            f"born_fraction_R = {summary['born_fraction_R']:.4f} +- {summary['born_stderr']:.4f}  "
            f"(p0 = {summary['p0']:.4g}, unresolved = {summary['unresolved_count']})"
        )
    else:
        print("no path reached a threshold")


def cmd_plot(args):
    svg = plot_command(args.dirs, args.kind)
    out = Path(args.output) if args.output else Path(args.dirs[0]) / f"{args.kind}.svg"
    try:
        out.write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise GrwSimError(f"cannot write {out}: {exc.strerror}") from exc
    print(f"wrote {out}")


def cmd_equivalence(args):
    a = run_ensemble(_load(args.config_a).to_run_config(), threads=args.threads, backend=args.backend)
    b = run_ensemble(_load(args.config_b).to_run_config(), threads=args.threads, backend=args.backend)
    d = stats.equivalence_test(a, b, args.t_star)
    crit = stats.ks_critical_value(a.n_paths, b.n_paths, 0.01)
    print(json.dumps({"t_star": args.t_star, "ks_distance": d, "critical_value_1pct": crit}, indent=2))


def cmd_presets(args):
    for name, values in PRESETS.items():
        parts = [f"gamma = {values['gamma']:g} cm^-2 s^-1"]
        if "a" in values:
            parts.append(f"a = {values['a']:g} cm")
        print(f"{name:12s} {', '.join(parts):40s} {PRESET_NOTES[name]}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grwsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def execution(p):
        p.add_argument("--threads", type=int, default=None, help="worker threads (default from config)")
        p.add_argument("--backend", choices=sorted(BACKENDS), default=None, help="kernel backend")

    p = sub.add_parser("run", help="run an ensemble and write CSV/JSON outputs")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True, help="output directory")
    execution(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("plot", help="render an SVG from run outputs")
    p.add_argument("kind", choices=sorted(PLOTTERS))
    p.add_argument("dirs", nargs="+", help="run output directories (overlaid)")
    p.add_argument("-o", "--output", help="SVG file (default <dir>/<kind>.svg)")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("equivalence", help="KS distance between p(t*) of two configured ensembles")
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.add_argument("--t-star", type=_time, required=True, help="comparison time, e.g. '0.5 ns'")
    execution(p)
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("presets", help="list the built-in parameter sets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and args.command == "equivalence":
        args.threads = 1
    try:
        args.func(args)
    except (GrwSimError, ValueError) as exc:
        print(f"grwsim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
