"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--paths 1000] [--repeat 3]

Reports wall time per backend for whole ensembles (noise generation
included) and for a single kernel call on pre-drawn noise, and checks that
both backends produce identical arrays.
"""

import argparse
import math
import time
import warnings

import numpy as np

from grwsim import kernels
from grwsim.core import HittingConfig, ObservableSet
from grwsim.detectors import DetectorParams
from grwsim.engine import FullModelParams, RunConfig, run_ensemble

GAMMA_2 = DetectorParams(a=0.1, gamma=0.5e11)
OBS = ObservableSet([[0.0, 0.1]])


def configs(n_paths):
    tau = GAMMA_2.reduction_time
    alpha = 1.0 / OBS.spread**2 / 100
    yield "one_detector", RunConfig("one_detector", GAMMA_2, 0.5, t_max=40 * tau, n_paths=n_paths)
    yield "two_detector", RunConfig("two_detector", GAMMA_2, 0.5, t_max=40 * tau, n_paths=n_paths)
    yield "full_continuous", RunConfig(
        "full_continuous", FullModelParams(OBS, gamma=GAMMA_2.gamma), 0.5, t_max=10 * tau, n_paths=n_paths
    )
    yield "full_hitting", RunConfig(
        "full_hitting",
        FullModelParams(OBS, hitting=HittingConfig(alpha, 2 * GAMMA_2.gamma / alpha)),
        0.5,
        t_max=10 * tau,
        n_paths=n_paths,
        dt=1e-3 * tau,
    )


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def kernel_only(kern, n_paths, n_steps):
    """One reduced_advance call over pre-drawn noise; no path freezes."""
    rng = np.random.default_rng(0)
    noise = rng.standard_normal((n_paths, n_steps, 1))
    dt = 1e-3 * GAMMA_2.reduction_time
    p = np.full(n_paths, 0.5)
    status = np.zeros(n_paths, dtype=np.int8)
    fpt_k = np.full(n_paths, -1, dtype=np.int64)
    rec = np.empty((n_paths, n_steps + 1))
    act = np.arange(n_paths, dtype=np.int64)
    kern.reduced_advance(p, status, fpt_k, rec, act, noise, 0, n_steps, 1, dt, math.sqrt(dt),
                         GAMMA_2.coupling, 0.0, -1.0, 2.0, False)
    return p


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = sorted(kernels.BACKENDS)
    if "cython" not in names:
        print("compiled extension not built; only the numpy fallback is available")

    print(f"{'workload':18s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}  identical")
    warnings.simplefilter("ignore")
    for label, cfg in configs(args.paths):
        results = {n: best_of(lambda n=n: run_ensemble(cfg, backend=n), args.repeat) for n in names}
        same = all(results[n][1] == results[names[0]][1] for n in names)
        row = f"{label:18s}" + "".join(f"{results[n][0]:11.3f}s" for n in names)
        if len(names) == 2:
            row += f"{results['python'][0] / results['cython'][0]:9.1f}x"
        print(row + f"  {same}")

    results = {n: best_of(lambda n=n: kernel_only(kernels.BACKENDS[n], args.paths, 2000), args.repeat) for n in names}
    same = all(np.array_equal(results[n][1], results[names[0]][1]) for n in names)
    row = f"{'kernel only':18s}" + "".join(f"{results[n][0]:11.3f}s" for n in names)
    if len(names) == 2:
        row += f"{results['python'][0] / results['cython'][0]:9.1f}x"
    print(row + f"  {same}")


if __name__ == "__main__":
    main()
