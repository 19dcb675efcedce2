"""Finite-dimensional states, the GRW hitting process and the continuous
collapse SDE.

Observables are diagonal in a shared basis, so an observable set is just a
``(K, D)`` array of eigenvalues and all operators trivially commute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation, DegenerateHitError

NORM_TOL = 1e-12

#: Upper bound on ``dt * gamma * spread**2`` for the Euler step.
STABILITY_LIMIT = 0.01

#: Resampling attempts before giving up on a degenerate hit.
MAX_HIT_RETRIES = 100


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitude vector over a finite basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 1:
            raise ContractViolation("state must have dimension >= 1")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ContractViolation(f"state is not normalized (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = math.sqrt(float(np.vdot(amps, amps).real))
        if norm == 0.0 or not math.isfinite(norm):
            raise ContractViolation("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def two_level(cls, p: float, phase: float = 0.0) -> "StateVector":
        """State ``(sqrt(1-p), sqrt(p) e^{i phase})``; index 1 is the R sector."""
        if not 0.0 <= p <= 1.0:
            raise ContractViolation(f"p must lie in [0, 1], got {p!r}")
        return cls.normalized([math.sqrt(1.0 - p), math.sqrt(p) * np.exp(1j * phase)])

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """K commuting observables, stored as their eigenvalues in the shared basis."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        if ev.ndim == 1:
            ev = ev[np.newaxis, :]
        if ev.ndim != 2 or ev.shape[0] < 1 or ev.shape[1] < 1:
            raise ContractViolation("eigenvalues must be a non-empty (K, D) array")
        if not np.all(np.isfinite(ev)):
            raise ContractViolation("eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", _frozen(ev))

    @property
    def count(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[1]

    @property
    def spread(self) -> float:
        """Largest eigenvalue spread over the set."""
        ev = self.eigenvalues
        return float(np.max(ev.max(axis=1) - ev.min(axis=1)))

    def __eq__(self, other):
        if not isinstance(other, ObservableSet):
            return NotImplemented
        return np.array_equal(self.eigenvalues, other.eigenvalues)

    def __hash__(self):
        return hash(self.eigenvalues.tobytes())


@dataclass(frozen=True)
class HittingConfig:
    alpha: float  # cm^-2
    lam: float  # s^-1

    def __post_init__(self):
        if not (self.alpha > 0 and self.lam > 0):
            raise ConfigurationError("alpha and lambda must be positive")
        if not (math.isfinite(self.alpha * self.lam) and self.alpha * self.lam > 0):
            raise ConfigurationError("alpha * lambda must be finite and positive")

    @property
    def equivalent_gamma(self) -> float:
        """Collapse strength of the continuous limit, ``alpha * lambda / 2``."""
        return 0.5 * self.alpha * self.lam


@dataclass(frozen=True)
class ContinuousConfig:
    gamma: float  # cm^-2 s^-1
    dt: float  # s

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ConfigurationError(f"gamma must be positive, got {self.gamma!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}")

    def check_stability(self, obs: ObservableSet) -> None:
        load = self.dt * self.gamma * obs.spread**2
        if load > STABILITY_LIMIT:
            raise ConfigurationError(
                f"dt*gamma*spread^2 = {load:.3g} exceeds the stability limit "
                f"{STABILITY_LIMIT}; reduce dt"
            )


def _check_dims(state: StateVector, obs: ObservableSet):
    if obs.dim != state.dim:
        raise ContractViolation(
            f"observable dimension {obs.dim} does not match state dimension {state.dim}"
        )


def expectation(state: StateVector, eigenvalues) -> float:
    """Expectation ``sum_i a_i |c_i|^2`` of one diagonal observable."""
    ev = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if ev.size != state.dim:
        raise ContractViolation(
            f"eigenvalue vector has length {ev.size}, state has dimension {state.dim}"
        )
    return float(np.dot(ev, state.probabilities))


def apply_sharpening(state: StateVector, obs: ObservableSet, center, alpha: float):
    """Apply the Gaussian sharpening operator centred at ``center``.

    Returns the renormalized state and the squared norm of the unnormalized
    image, which is the probability density of a hit at ``center``.
    """
    _check_dims(state, obs)
    if not alpha > 0:
        raise ContractViolation(f"alpha must be positive, got {alpha!r}")
    x = np.asarray(center, dtype=float).reshape(-1)
    if x.size != obs.count:
        raise ContractViolation(f"center has {x.size} components, expected {obs.count}")
    sq = np.sum((obs.eigenvalues - x[:, np.newaxis]) ** 2, axis=0)
    prefactor = (alpha / math.pi) ** (obs.count / 4.0)
    phi = state.amplitudes * (prefactor * np.exp(-0.5 * alpha * sq))
    weight = float(np.vdot(phi, phi).real)
    if weight == 0.0:
        raise DegenerateHitError("all amplitudes underflowed under the sharpening operator")
    return StateVector(phi / math.sqrt(weight)), weight


def sample_hitting_center(state: StateVector, obs: ObservableSet, alpha: float, rng):
    """Draw a hit centre from the density ``||S(x) psi||^2``.

    For diagonal observables that density is a Gaussian mixture: basis index
    ``i`` with weight ``|c_i|^2``, then each component normal around the
    eigenvalue with variance ``1/(2 alpha)``.
    """
    _check_dims(state, obs)
    probs = state.probabilities
    i = int(rng.choice(state.dim, p=probs / probs.sum()))
    sigma = math.sqrt(0.5 / alpha)
    return obs.eigenvalues[:, i] + sigma * rng.standard_normal(obs.count)


def hitting_waiting_time(lam: float, rng) -> float:
    if not lam > 0:
        raise ContractViolation(f"lambda must be positive, got {lam!r}")
    return float(rng.exponential(1.0 / lam))


def hit(state: StateVector, obs: ObservableSet, cfg: HittingConfig, rng):
    """One complete hitting event: sample a centre and sharpen around it.

    A centre so remote that every amplitude underflows is rejected and
    resampled.
    """
    for _ in range(MAX_HIT_RETRIES):
        center = sample_hitting_center(state, obs, cfg.alpha, rng)
        try:
            new_state, _ = apply_sharpening(state, obs, center, cfg.alpha)
        except DegenerateHitError:
            continue
        return new_state, center
    raise DegenerateHitError(f"no usable hit centre after {MAX_HIT_RETRIES} draws")


def continuous_step(state: StateVector, obs: ObservableSet, cfg: ContinuousConfig, noises):
    """One Euler-Maruyama step of the continuous collapse SDE.

    ``noises`` are the Brownian increments ``dB_m`` (variance ``dt``), one
    per observable. All multiplicative factors are real, so phases are kept.
    """
    _check_dims(state, obs)
    cfg.check_stability(obs)
    dB = np.asarray(noises, dtype=float).reshape(-1)
    if dB.size != obs.count:
        raise ContractViolation(f"expected {obs.count} noise increments, got {dB.size}")
    probs = state.probabilities
    means = obs.eigenvalues @ probs
    dev = obs.eigenvalues - means[:, np.newaxis]
    factor = 1.0 + np.sum(
        math.sqrt(cfg.gamma) * dev * dB[:, np.newaxis] - 0.5 * cfg.gamma * dev**2 * cfg.dt,
        axis=0,
    )
    return StateVector.normalized(state.amplitudes * factor)


def evolve_hitting(state: StateVector, obs: ObservableSet, cfg: HittingConfig, t_end: float, rng):
    """Run the hitting process from ``t = 0`` to ``t_end``; returns the final state
    and the number of hits."""
    t = hitting_waiting_time(cfg.lam, rng)
    n_hits = 0
    while t <= t_end:
        state, _ = hit(state, obs, cfg, rng)
        n_hits += 1
        t += hitting_waiting_time(cfg.lam, rng)
    return state, n_hits


def evolve_continuous(state: StateVector, obs: ObservableSet, cfg: ContinuousConfig, n_steps: int, rng):
    sqrt_dt = math.sqrt(cfg.dt)
    for _ in range(n_steps):
        state = continuous_step(state, obs, cfg, sqrt_dt * rng.standard_normal(obs.count))
    return state
