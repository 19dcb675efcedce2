"""Ensemble statistics: Born fractions, first-passage histograms, persistence
curves and the hitting/continuous comparison."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .engine import Ensemble
from .errors import ContractViolation, EmptyStatisticsError

DEFAULT_BINS = 100


class Conditioning(str, Enum):
    ALL_PATHS = "all_paths"
    CONVERGED_R_ONLY = "converged_R_only"


@dataclass(frozen=True)
class EnsembleSummary:
    born_fraction_R: float
    born_stderr: float
    n_resolved: int
    n_converged_R: int
    n_converged_L: int
    unresolved_count: int
    median_fpt: float
    median_fpt_R: float
    median_fpt_L: float
    mean_p_final: float
    mean_p_drift: float
    drift_stderr: float

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}


@dataclass(frozen=True, eq=False)
class ConvergenceHistogram:
    bin_edges: np.ndarray
    counts_R: np.ndarray
    counts_L: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts_R.sum() + self.counts_L.sum())


@dataclass(frozen=True, eq=False)
class PersistenceCurve:
    times: np.ndarray
    fraction: np.ndarray
    conditioning: Conditioning


def _median(x) -> float:
    return float(np.median(x)) if len(x) else math.nan


def born_fraction(e: Ensemble) -> EnsembleSummary:
    """Fraction of resolved paths ending in R, plus first-passage medians and
    the martingale drift of ``p`` at the final recorded time."""
    codes = e.outcome_codes
    n_r = int(np.count_nonzero(codes == 1))
    n_l = int(np.count_nonzero(codes == 2))
    n_res = n_r + n_l
    if n_res == 0:
        raise EmptyStatisticsError("no path reached either threshold")
    f = n_r / n_res
    final = e.p[:, -1]
    fpt = e.first_passage
    return EnsembleSummary(
        born_fraction_R=f,
        born_stderr=math.sqrt(f * (1.0 - f) / n_res),
        n_resolved=n_res,
        n_converged_R=n_r,
        n_converged_L=n_l,
        unresolved_count=e.n_paths - n_res,
        median_fpt=_median(fpt[codes < 3]),
        median_fpt_R=_median(fpt[codes == 1]),
        median_fpt_L=_median(fpt[codes == 2]),
        mean_p_final=float(final.mean()),
        mean_p_drift=float(final.mean() - e.config.p0),
        drift_stderr=float(final.std(ddof=1) / math.sqrt(e.n_paths)) if e.n_paths > 1 else math.nan,
    )


def median_first_passage(e: Ensemble) -> float:
    """Median first-passage time over resolved paths (s)."""
    resolved = e.outcome_codes < 3
    if not resolved.any():
        raise EmptyStatisticsError("no path reached either threshold")
    return float(np.median(e.first_passage[resolved]))


def first_passage_histogram(e: Ensemble, n_bins: int = DEFAULT_BINS) -> ConvergenceHistogram:
    if n_bins < 1:
        raise ContractViolation(f"n_bins must be >= 1, got {n_bins}")
    edges = np.linspace(0.0, e.config.t_max, n_bins + 1)
    fpt = e.first_passage
    # first passages are bounded by t_max up to rounding of the step grid
    clipped = np.minimum(fpt, e.config.t_max)
    counts_R, _ = np.histogram(clipped[e.outcome_codes == 1], bins=edges)
    counts_L, _ = np.histogram(clipped[e.outcome_codes == 2], bins=edges)
    return ConvergenceHistogram(edges, counts_R, counts_L)


def persistence_curve(e: Ensemble, conditioning=Conditioning.ALL_PATHS) -> PersistenceCurve:
    """Fraction of paths strictly inside ``(eps, 1-eps)`` at each recorded time."""
    conditioning = Conditioning(conditioning)
    lo, hi = e.config.thresholds
    p = e.p
    if conditioning is Conditioning.CONVERGED_R_ONLY:
        p = p[e.outcome_codes == 1]
    if p.shape[0] == 0:
        fraction = np.zeros(e.times.size)
    else:
        fraction = np.mean((p > lo) & (p < hi), axis=0)
    return PersistenceCurve(e.times, fraction, conditioning)


def ks_distance(x, y) -> float:
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_x - F_y|``."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise EmptyStatisticsError("KS distance needs two non-empty samples")
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / x.size
    cdf_y = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(cdf_x - cdf_y)))


def ks_critical_value(n: int, m: int, level: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value ``c(level) sqrt((n+m)/(n m))``."""
    c = math.sqrt(-0.5 * math.log(level / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def sample_at(e: Ensemble, t_star: float) -> np.ndarray:
    """Values of ``p`` at the recorded time nearest to ``t_star``."""
    times = e.times
    step = times[1] - times[0] if times.size > 1 else 0.0
    if t_star < 0 or t_star > times[-1] + 0.5 * step:
        raise ContractViolation(
            f"t_star = {t_star!r} s is outside the recorded range [0, {times[-1]!r}]"
        )
    return e.p[:, int(np.argmin(np.abs(times - t_star)))]


def equivalence_test(hitting: Ensemble, continuous: Ensemble, t_star: float) -> float:
    """KS distance between the distributions of ``p(t_star)`` of two ensembles."""
    if hitting.config.p0 != continuous.config.p0:
        raise ContractViolation("ensembles must share the initial condition")
    if hitting.config.model.value == "full_hitting" and continuous.config.model.value == "full_continuous":
        hp, cp = hitting.config.params, continuous.config.params
        if not math.isclose(hp.hitting.alpha * hp.hitting.lam, 2.0 * cp.gamma, rel_tol=1e-9):
            raise ContractViolation("hitting and continuous ensembles need alpha*lambda = 2*gamma")
        if hp.observables != cp.observables:
            raise ContractViolation("ensembles must share the observable set")
    return ks_distance(sample_at(hitting, t_star), sample_at(continuous, t_star))
