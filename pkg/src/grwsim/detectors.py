"""Reduced two-level dynamics for the one- and two-detector beam-splitter setups.

Only ``p = |c_R|^2`` is tracked. Every stochastic factor acting on the
amplitudes is real, so the relative phase never feeds back into ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import StateVector
from .errors import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class TwoLevelState:
    p: float  # |c_R|^2
    t: float = 0.0  # s

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ContractViolation(f"p must lie in [0, 1], got {self.p!r}")
        if self.t < 0:
            raise ContractViolation(f"t must be non-negative, got {self.t!r}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class ActivationProfile:
    """Piecewise-linear detector switch-on, fully developed at ``T`` seconds."""

    T: float = 0.0

    def __post_init__(self):
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise ConfigurationError(f"activation time must be >= 0, got {self.T!r}")


@dataclass(frozen=True)
class DetectorParams:
    a: float  # cm
    gamma: float  # cm^-2 s^-1
    T: float = 0.0  # s

    def __post_init__(self):
        if not (self.a > 0 and self.gamma > 0):
            raise ConfigurationError("pointer shift a and gamma must be positive")
        rate = self.gamma * self.a**2
        if not (math.isfinite(rate) and rate > 0):
            raise ConfigurationError("gamma * a^2 must be finite and positive")
        ActivationProfile(self.T)

    @property
    def rate(self) -> float:
        """Drive rate ``gamma * a^2`` in s^-1."""
        return self.gamma * self.a**2

    @property
    def coupling(self) -> float:
        """Noise amplitude ``2 a sqrt(gamma)`` of the squared stochastic factors."""
        return 2.0 * self.a * math.sqrt(self.gamma)

    @property
    def profile(self) -> ActivationProfile:
        return ActivationProfile(self.T)

    @property
    def reduction_time(self) -> float:
        """Characteristic time ``1/(4 gamma a^2)`` of the one-detector model."""
        return 1.0 / (4.0 * self.rate)

    def with_activation(self, T: float) -> "DetectorParams":
        return replace(self, T=T)


def activation_beta(t: float, profile: ActivationProfile) -> float:
    if t < 0:
        raise ContractViolation(f"t must be non-negative, got {t!r}")
    if profile.T == 0 or t >= profile.T:
        return 1.0
    return t / profile.T


def stochastic_factors(p: float, coupling: float, dB: float):
    """Squared factors ``(L_R^2, L_L^2)`` multiplying ``|c_R|^2`` and ``|c_L|^2``.

    ``coupling`` already includes the activation factor. The pair satisfies
    ``p L_R^2 + (1-p) L_L^2 = 1`` for every ``dB``.
    """
    q = 1.0 - p
    return 1.0 + coupling * q * dB, 1.0 - coupling * p * dB


def _clamp(p: float) -> float:
    return 0.0 if p < 0.0 else 1.0 if p > 1.0 else p


def _advance(s: TwoLevelState, params: DetectorParams, dt: float, dB: float) -> TwoLevelState:
    beta = activation_beta(s.t, params.profile)
    # same operation order as the ensemble kernels
    p = s.p * (1.0 + params.coupling * beta * (1.0 - s.p) * dB)
    return TwoLevelState(_clamp(p), s.t + dt)


def one_detector_step(s: TwoLevelState, params: DetectorParams, dt: float, dB: float) -> TwoLevelState:
    """Advance by ``dt`` with Brownian increment ``dB`` (variance ``dt``)."""
    return _advance(s, params, dt, dB)


def two_detector_step(
    s: TwoLevelState, params: DetectorParams, dt: float, dBR: float, dBL: float
) -> TwoLevelState:
    """Advance by ``dt``; only the difference ``dBR - dBL`` of the two detectors'
    increments acts on ``p``."""
    return _advance(s, params, dt, dBR - dBL)


def reduced_from_full(state: StateVector) -> TwoLevelState:
    if state.dim != 2:
        raise ContractViolation(f"reduction needs a two-dimensional state, got D={state.dim}")
    p = float(abs(state.amplitudes[1]) ** 2)
    return TwoLevelState(min(max(p, 0.0), 1.0))
