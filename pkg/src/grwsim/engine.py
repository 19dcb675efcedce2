"""Seeded, parallel execution of path ensembles with first-passage detection.

Every path owns a counter-based generator keyed by ``(master_seed, index)``
and consumes it in a fixed pattern, so an ensemble is a pure function of its
:class:`RunConfig`: the same for any number of threads and either kernel
backend.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from .core import STABILITY_LIMIT, HittingConfig, ObservableSet
from .detectors import DetectorParams
from .errors import ConfigurationError, ContractViolation
from .kernels import get_backend
from .rng import derive_path_rng

#: Time steps drawn per path per kernel call.
STEP_CHUNK = 2048
#: Hitting events drawn per path per kernel call.
HIT_CHUNK = 256
#: Paths per work unit handed to a thread.
BLOCK_SIZE = 256

#: Default number of recorded samples per path.
TARGET_RECORDS = 1000


class Model(str, Enum):
    ONE_DETECTOR = "one_detector"
    TWO_DETECTOR = "two_detector"
    FULL_CONTINUOUS = "full_continuous"
    FULL_HITTING = "full_hitting"


class Outcome(str, Enum):
    CONVERGED_R = "converged_R"
    CONVERGED_L = "converged_L"
    UNRESOLVED = "unresolved"


_OUTCOME_CODES = {1: Outcome.CONVERGED_R, 2: Outcome.CONVERGED_L, 3: Outcome.UNRESOLVED}


@dataclass(frozen=True)
class FullModelParams:
    """Observable set plus either a continuous strength ``gamma`` or a hitting
    configuration. The state space must be two-dimensional, with basis index 1
    playing the role of the R sector."""

    observables: ObservableSet
    gamma: Optional[float] = None
    hitting: Optional[HittingConfig] = None

    @property
    def strength(self) -> float:
        if self.gamma is not None:
            return self.gamma
        return self.hitting.equivalent_gamma

    @property
    def rate(self) -> float:
        return self.strength * self.observables.spread**2


Params = Union[DetectorParams, FullModelParams]


def _count_steps(t_max: float, dt: float) -> int:
    ratio = t_max / dt
    nearest = round(ratio)
    if math.isclose(ratio, nearest, rel_tol=1e-9):
        return max(1, int(nearest))
    return max(1, math.ceil(ratio))


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines an ensemble.

    ``dt``, ``epsilon`` and ``record_stride`` default to ``1e-3/(4 gamma a^2)``,
    ``1/n_paths`` and ``n_steps // 1000`` respectively and are stored resolved.
    For the hitting model ``dt`` only sets the recording grid.
    """

    model: Model
    params: Params
    p0: float
    t_max: float
    n_paths: int = 1000
    dt: Optional[float] = None
    epsilon: Optional[float] = None
    master_seed: int = 0
    record_stride: Optional[int] = None

    def __post_init__(self):
        model = Model(self.model)
        object.__setattr__(self, "model", model)
        reduced = model in (Model.ONE_DETECTOR, Model.TWO_DETECTOR)
        if reduced and not isinstance(self.params, DetectorParams):
            raise ConfigurationError(f"model {model.value} needs DetectorParams")
        if not reduced:
            if not isinstance(self.params, FullModelParams):
                raise ConfigurationError(f"model {model.value} needs FullModelParams")
            if self.params.observables.dim != 2:
                raise ConfigurationError("full models run on a two-dimensional state space")
            if model is Model.FULL_CONTINUOUS and self.params.gamma is None:
                raise ConfigurationError("full_continuous needs gamma")
            if model is Model.FULL_HITTING and self.params.hitting is None:
                raise ConfigurationError("full_hitting needs a HittingConfig")
            if self.params.observables.spread == 0:
                raise ConfigurationError("observables must not be degenerate")
        if not 0.0 <= self.p0 <= 1.0:
            raise ConfigurationError(f"p0 must lie in [0, 1], got {self.p0!r}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigurationError(f"t_max must be positive, got {self.t_max!r}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigurationError(f"n_paths must be a positive integer, got {self.n_paths!r}")
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "master_seed", int(self.master_seed) & ((1 << 64) - 1))

        if self.dt is None:
            object.__setattr__(self, "dt", 1e-3 * self.reduction_time)
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}")
        if model is not Model.FULL_HITTING:
            noise_channels = 2 if model is Model.TWO_DETECTOR else 1
            load = self.dt * self.rate * noise_channels
            if load > STABILITY_LIMIT:
                raise ConfigurationError(
                    f"dt*gamma*a^2 = {load:.3g} exceeds the stability limit {STABILITY_LIMIT}"
                )

        if self.epsilon is None:
            object.__setattr__(self, "epsilon", 1.0 / self.n_paths if self.n_paths > 2 else 1e-3)
        if not 0.0 < self.epsilon < 0.5:
            raise ConfigurationError(f"epsilon must lie in (0, 0.5), got {self.epsilon!r}")

        if self.record_stride is None:
            object.__setattr__(self, "record_stride", max(1, self.n_steps // TARGET_RECORDS))
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigurationError(f"record_stride must be a positive integer, got {self.record_stride!r}")
        object.__setattr__(self, "record_stride", int(self.record_stride))

        if self.t_max < 3 * self.reduction_time:
            warnings.warn(
                f"t_max = {self.t_max:.3g} s is short compared with the reduction time "
                f"{self.reduction_time:.3g} s; many paths will stay unresolved",
                stacklevel=3,
            )

    @property
    def rate(self) -> float:
        """Drive rate ``gamma * a^2`` (s^-1)."""
        return self.params.rate

    @property
    def reduction_time(self) -> float:
        return 1.0 / (4.0 * self.rate)

    @property
    def n_steps(self) -> int:
        return _count_steps(self.t_max, self.dt)

    @property
    def n_records(self) -> int:
        return self.n_steps // self.record_stride + 1

    @property
    def record_times(self) -> np.ndarray:
        return (np.arange(self.n_records) * self.record_stride) * self.dt

    @property
    def thresholds(self):
        return self.epsilon, 1.0 - self.epsilon


@dataclass(frozen=True, eq=False)
class PathRecord:
    times: np.ndarray
    p: np.ndarray
    first_passage_time: Optional[float]
    outcome: Outcome

    @property
    def samples(self) -> np.ndarray:
        """``(n, 2)`` array of ``(t, p)`` rows."""
        return np.column_stack([self.times, self.p])


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Result of :func:`run_ensemble`, stored column-wise.

    ``p[i, j]`` is path ``i`` at ``times[j]``; ``first_passage`` is NaN for
    unresolved paths.
    """

    config: RunConfig
    times: np.ndarray
    p: np.ndarray
    first_passage: np.ndarray
    outcome_codes: np.ndarray
    _paths: list = field(default=None, repr=False)

    @property
    def n_paths(self) -> int:
        return self.p.shape[0]

    @property
    def outcomes(self) -> np.ndarray:
        return np.array([_OUTCOME_CODES[int(c)].value for c in self.outcome_codes])

    def path(self, i: int) -> PathRecord:
        code = int(self.outcome_codes[i])
        fpt = None if code == 3 else float(self.first_passage[i])
        return PathRecord(self.times, self.p[i], fpt, _OUTCOME_CODES[code])

    @property
    def paths(self) -> list:
        if self._paths is None:
            object.__setattr__(self, "_paths", [self.path(i) for i in range(self.n_paths)])
        return self._paths

    def count(self, outcome) -> int:
        code = {v: k for k, v in _OUTCOME_CODES.items()}[Outcome(outcome)]
        return int(np.count_nonzero(self.outcome_codes == code))

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return (
            self.config == other.config
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.first_passage, other.first_passage, equal_nan=True)
            and np.array_equal(self.outcome_codes, other.outcome_codes)
        )


def _simulate_steps(cfg: RunConfig, indices, kern):
    n = len(indices)
    gens = [derive_path_rng(cfg.master_seed, int(i)) for i in indices]
    lo, hi = cfg.thresholds
    n_steps, stride, dt = cfg.n_steps, cfg.record_stride, cfg.dt
    sqrt_dt = math.sqrt(dt)
    status = np.zeros(n, dtype=np.int8)
    fpt_k = np.full(n, -1, dtype=np.int64)
    rec = np.empty((n, cfg.n_records))

    if cfg.model is Model.FULL_CONTINUOUS:
        eig = np.ascontiguousarray(cfg.params.observables.eigenvalues)
        gamma = cfg.params.gamma
        c0 = np.full(n, math.sqrt(1.0 - cfg.p0))
        c1 = np.full(n, math.sqrt(cfg.p0))
        width = eig.shape[0]

        def advance(act, noise, k):
            kern.continuous_advance(c0, c1, status, fpt_k, rec, act, noise, eig, k, n_steps,
                                    stride, dt, sqrt_dt, math.sqrt(gamma), 0.5 * gamma, lo, hi)
    else:
        params = cfg.params
        two = cfg.model is Model.TWO_DETECTOR
        p = np.full(n, float(cfg.p0))
        width = 2 if two else 1

        def advance(act, noise, k):
            kern.reduced_advance(p, status, fpt_k, rec, act, noise, k, n_steps, stride,
                                 dt, sqrt_dt, params.coupling, float(params.T), lo, hi, two)

    k = 0
    while k <= n_steps:
        act = np.flatnonzero(status == 0).astype(np.int64)
        if act.size == 0:
            break
        length = min(STEP_CHUNK, n_steps + 1 - k)
        noise = np.empty((act.size, length, width))
        for j, i in enumerate(act):
            gens[i].standard_normal(out=noise[j])
        advance(act, noise, k)
        k += length

    fpt = np.where(status < 3, fpt_k * dt, np.nan)
    return rec, status, fpt


def _hit_ratios(z, eig, alpha):
    """Squared amplitude ratio ``|S_R / S_L|^2`` of a hit, for the two possible
    mixture components the centre can be drawn from."""
    sigma = math.sqrt(0.5 / alpha)
    out = []
    for comp in (0, 1):
        x = eig[:, comp] + sigma * z  # (..., K)
        log_ratio = -alpha * (np.sum((eig[:, 1] - x) ** 2, axis=-1) - np.sum((eig[:, 0] - x) ** 2, axis=-1))
        with np.errstate(over="ignore"):
            out.append(np.exp(log_ratio))
    return out


def _simulate_hits(cfg: RunConfig, indices, kern):
    n = len(indices)
    gens = [derive_path_rng(cfg.master_seed, int(i)) for i in indices]
    lo, hi = cfg.thresholds
    hitting = cfg.params.hitting
    eig = np.ascontiguousarray(cfg.params.observables.eigenvalues)
    n_obs = eig.shape[0]
    p = np.full(n, float(cfg.p0))
    t_cur = np.zeros(n)
    fpt = np.full(n, np.nan)
    status = np.zeros(n, dtype=np.int8)
    if cfg.p0 >= hi or cfg.p0 <= lo:
        status[:] = 1 if cfg.p0 >= hi else 2
        fpt[:] = 0.0

    events = [[] for _ in range(n)]
    while True:
        act = np.flatnonzero(status == 0).astype(np.int64)
        if act.size == 0:
            break
        expo = np.empty((act.size, HIT_CHUNK))
        u = np.empty((act.size, HIT_CHUNK))
        z = np.empty((act.size, HIT_CHUNK, n_obs))
        for j, i in enumerate(act):
            g = gens[i]
            g.standard_exponential(out=expo[j])
            g.random(out=u[j])
            g.standard_normal(out=z[j])
        waits = expo / hitting.lam
        r0, r1 = _hit_ratios(z, eig, hitting.alpha)
        ev_t = np.full((act.size, HIT_CHUNK), np.nan)
        ev_p = np.full((act.size, HIT_CHUNK), np.nan)
        kern.hitting_advance(p, t_cur, status, fpt, act, waits, u, r0, r1, ev_t, ev_p,
                             float(cfg.t_max), lo, hi)
        for j, i in enumerate(act):
            events[i].append((ev_t[j], ev_p[j]))

    times = cfg.record_times
    rec = np.empty((n, times.size))
    for i in range(n):
        if events[i]:
            et = np.concatenate([e[0] for e in events[i]])
            ep = np.concatenate([e[1] for e in events[i]])
            keep = ~np.isnan(et)
            et, ep = et[keep], ep[keep]
        else:
            et = ep = np.empty(0)
        pos = np.searchsorted(et, times, side="right") - 1
        rec[i] = np.where(pos < 0, cfg.p0, ep[np.maximum(pos, 0)] if ep.size else cfg.p0)
    return rec, status, fpt


def _simulate(cfg: RunConfig, indices, kern):
    if cfg.model is Model.FULL_HITTING:
        return _simulate_hits(cfg, indices, kern)
    return _simulate_steps(cfg, indices, kern)


def run_path(cfg: RunConfig, path_index: int, backend=None) -> PathRecord:
    if not 0 <= path_index:
        raise ContractViolation(f"path_index must be non-negative, got {path_index}")
    rec, status, fpt = _simulate(cfg, [path_index], get_backend(backend))
    code = int(status[0])
    return PathRecord(
        cfg.record_times, rec[0], None if code == 3 else float(fpt[0]), _OUTCOME_CODES[code]
    )


def run_ensemble(cfg: RunConfig, threads: int = 1, backend=None) -> Ensemble:
    """Run ``cfg.n_paths`` paths, optionally spread over ``threads`` threads.

    Paths are split into fixed blocks; the compiled kernels release the GIL.
    The result does not depend on ``threads``.
    """
    kern = get_backend(backend)
    blocks = [
        np.arange(start, min(start + BLOCK_SIZE, cfg.n_paths))
        for start in range(0, cfg.n_paths, BLOCK_SIZE)
    ]
    if threads is None or threads <= 1 or len(blocks) == 1:
        results = [_simulate(cfg, b, kern) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda b: _simulate(cfg, b, kern), blocks))
    rec = np.concatenate([r[0] for r in results])
    status = np.concatenate([r[1] for r in results])
    fpt = np.concatenate([r[2] for r in results])
    return Ensemble(cfg, cfg.record_times, rec, fpt, status)
