"""Running configured experiments to disk and turning the outputs into SVG."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import stats
from .config import ExperimentConfig, config_to_dict, emit_config
from .engine import Ensemble, run_ensemble
from .errors import CsvFormatError, EmptyStatisticsError, GrwSimError
from .svg import BLACK, BLUE, GREEN, RED, Chart

NS = 1e9
MAX_POLYLINE_POINTS = 400

PATHS_HEADER = ["path_index", "t", "p"]
HISTOGRAM_HEADER = ["t_start", "t_end", "count_R", "count_L"]
PERSISTENCE_HEADER = ["t", "all_paths", "converged_R_only"]


def _write(path: Path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise GrwSimError(f"cannot write {path}: {exc.strerror}") from exc


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def paths_csv(e: Ensemble) -> str:
    times = e.times.tolist()
    lines = [",".join(PATHS_HEADER)]
    for i, row in enumerate(e.p.tolist()):
        lines.extend(f"{i},{t!r},{p!r}" for t, p in zip(times, row))
    return "\n".join(lines) + "\n"


def histogram_csv(h: stats.ConvergenceHistogram) -> str:
    edges = h.bin_edges.tolist()
    lines = [",".join(HISTOGRAM_HEADER)]
    for k in range(len(edges) - 1):
        lines.append(f"{edges[k]!r},{edges[k + 1]!r},{int(h.counts_R[k])},{int(h.counts_L[k])}")
    return "\n".join(lines) + "\n"


def persistence_csv(all_paths: stats.PersistenceCurve, cond: stats.PersistenceCurve) -> str:
    lines = [",".join(PERSISTENCE_HEADER)]
    for t, a, r in zip(all_paths.times.tolist(), all_paths.fraction.tolist(), cond.fraction.tolist()):
        lines.append(f"{t!r},{a!r},{r!r}")
    return "\n".join(lines) + "\n"


def summary_dict(cfg: ExperimentConfig, e: Ensemble) -> dict:
    try:
        summary = stats.born_fraction(e).to_dict()
    except EmptyStatisticsError:
        summary = {"born_fraction_R": None, "born_stderr": None, "n_resolved": 0,
                   "unresolved_count": e.n_paths}
    rc = e.config
    summary.update(
        p0=rc.p0,
        n_paths=rc.n_paths,
        seed=rc.master_seed,
        model=rc.model.value,
        dt=rc.dt,
        t_max=rc.t_max,
        epsilon=rc.epsilon,
        record_stride=rc.record_stride,
        activation_T=float(getattr(rc.params, "T", 0.0)),
        config=config_to_dict(cfg),
        config_text=emit_config(cfg),
    )
    return summary


def run_command(cfg: ExperimentConfig, output_dir, threads=None, backend=None) -> dict:
    """Run the ensemble and write ``paths.csv``, ``summary.json``,
    ``histogram.csv``, ``persistence.csv`` and ``manifest.json``.

    Returns the manifest, which maps each file to its SHA-256.
    """
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise GrwSimError(f"cannot create {out}: {exc.strerror}") from exc
    e = run_ensemble(cfg.to_run_config(), threads=threads or cfg.threads, backend=backend)

    files = {
        "paths.csv": paths_csv(e),
        "summary.json": json.dumps(summary_dict(cfg, e), indent=2, sort_keys=True, allow_nan=False) + "\n",
        "histogram.csv": histogram_csv(stats.first_passage_histogram(e)),
        "persistence.csv": persistence_csv(
            stats.persistence_curve(e, stats.Conditioning.ALL_PATHS),
            stats.persistence_curve(e, stats.Conditioning.CONVERGED_R_ONLY),
        ),
    }
    for name, text in files.items():
        _write(out / name, text)
    manifest = {"files": {name: _sha256(out / name) for name in sorted(files)}}
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_csv(path, header) -> list:
    """Rows of a CSV written by :func:`run_command` as tuples of floats."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise GrwSimError(f"cannot read {path}: {exc.strerror}") from exc
    rows = []
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            return rows
        if first != header:
            raise CsvFormatError(f"expected header {','.join(header)}", path, 1)
        for n, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(f"expected {len(header)} fields, got {len(row)}", path, n)
            try:
                values = tuple(float(x) for x in row)
            except ValueError:
                raise CsvFormatError(f"non-numeric field in {row!r}", path, n) from None
            if not all(math.isfinite(v) for v in values):
                raise CsvFormatError("non-finite value", path, n)
            rows.append(values)
    return rows


def _read_summary(run_dir: Path) -> dict:
    try:
        return json.loads((run_dir / "summary.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        return {}
    except (OSError, json.JSONDecodeError) as exc:
        raise GrwSimError(f"cannot read {run_dir / 'summary.json'}: {exc}") from exc


def _label(summary: dict) -> tuple:
    T = summary.get("activation_T") or 0.0
    p0 = summary.get("p0")
    base = f"p0={p0:.4g}, " if p0 is not None else ""
    if T > 0:
        return base + f"activation T={T * NS:g} ns", True
    return base + "no activation", False


def _decimate(ts, ps):
    n = len(ts)
    if n <= MAX_POLYLINE_POINTS:
        return ts, ps
    idx = sorted(set(np.linspace(0, n - 1, MAX_POLYLINE_POINTS).round().astype(int).tolist()))
    return [ts[i] for i in idx], [ps[i] for i in idx]


def plot_paths(run_dirs) -> str:
    series = []
    t_hi = 0.0
    for d in map(Path, run_dirs):
        rows = read_csv(d / "paths.csv", PATHS_HEADER)
        label, activated = _label(_read_summary(d))
        by_path = {}
        for i, t, p in rows:
            by_path.setdefault(int(i), ([], []))
            by_path[int(i)][0].append(t * NS)
            by_path[int(i)][1].append(p)
            t_hi = max(t_hi, t * NS)
        series.append((label, RED if activated else BLUE, by_path))
    chart = Chart("|c_R|^2 paths", "t (ns)", "|c_R|^2", (0.0, t_hi), (0.0, 1.0))
    for label, color, by_path in series:
        chart.add_legend(label, color)
        for i in sorted(by_path):
            ts, ps = _decimate(*by_path[i])
            chart.polyline(ts, ps, color, attrs=f' data-path="{i}"')
    return chart.render()


def plot_histogram(run_dirs) -> str:
    datasets = []
    t_hi, c_hi = 0.0, 0
    for d in map(Path, run_dirs):
        rows = read_csv(d / "histogram.csv", HISTOGRAM_HEADER)
        label, activated = _label(_read_summary(d))
        datasets.append((label, activated, rows))
        for t0, t1, cr, cl in rows:
            t_hi = max(t_hi, t1 * NS)
            c_hi = max(c_hi, cr, cl)
    chart = Chart("First-passage times", "t (ns)", "paths per bin", (0.0, t_hi), (0.0, max(c_hi, 1) * 1.05))
    slots = 2 * max(len(datasets), 1)
    for n, (label, activated, rows) in enumerate(datasets):
        color_r, color_l = (BLACK, RED) if activated else (BLUE, GREEN)
        chart.add_legend(f"R, {label}", color_r)
        chart.add_legend(f"L, {label}", color_l)
        for t0, t1, cr, cl in rows:
            w = (t1 - t0) * NS / slots
            x = t0 * NS + 2 * n * w
            if cr:
                chart.bar(x, x + w, cr, color_r, f"R:{n}")
            if cl:
                chart.bar(x + w, x + 2 * w, cl, color_l, f"L:{n}")
    return chart.render()


def plot_persistence(run_dirs) -> str:
    chart = None
    curves = []
    t_hi = 0.0
    for d in map(Path, run_dirs):
        rows = read_csv(d / "persistence.csv", PERSISTENCE_HEADER)
        label, activated = _label(_read_summary(d))
        curves.append((label, activated, rows))
        if rows:
            t_hi = max(t_hi, rows[-1][0] * NS)
    chart = Chart("Persistence of the superposition", "t (ns)", "fraction inside (eps, 1-eps)", (0.0, t_hi), (0.0, 1.0))
    for label, activated, rows in curves:
        ts = [r[0] * NS for r in rows]
        chart.step(ts, [r[1] for r in rows], RED if activated else BLUE, f"all paths, {label}")
        chart.step(ts, [r[2] for r in rows], BLACK if activated else GREEN, f"converged to R, {label}")
    return chart.render()


PLOTTERS = {"paths": plot_paths, "histogram": plot_histogram, "persistence": plot_persistence}


def plot_command(run_dirs, kind: str) -> str:
    if isinstance(run_dirs, (str, Path)):
        run_dirs = [run_dirs]
    try:
        plotter = PLOTTERS[kind]
    except KeyError:
        raise ValueError(f"unknown plot kind {kind!r} (allowed: {', '.join(PLOTTERS)})") from None
    return plotter(run_dirs)
