"""Monte Carlo simulation of GRW hitting and continuous spontaneous-collapse
processes, specialized to one- and two-detector beam-splitter setups."""

from .core import (
    ContinuousConfig,
    HittingConfig,
    ObservableSet,
    StateVector,
    apply_sharpening,
    continuous_step,
    expectation,
    hit,
    hitting_waiting_time,
    sample_hitting_center,
)
from .detectors import (
    ActivationProfile,
    DetectorParams,
    TwoLevelState,
    activation_beta,
    one_detector_step,
    reduced_from_full,
    two_detector_step,
)
from .engine import Ensemble, FullModelParams, Model, Outcome, PathRecord, RunConfig, run_ensemble, run_path
from .errors import (
    ConfigParseError,
    ConfigurationError,
    ContractViolation,
    DegenerateHitError,
    EmptyStatisticsError,
)
from .rng import derive_path_rng
from .stats import (
    Conditioning,
    born_fraction,
    equivalence_test,
    first_passage_histogram,
    ks_distance,
    median_first_passage,
    persistence_curve,
)

__version__ = "0.1.0"
