"""Universal adversarial perturbations against hard-label black-box classifiers."""
from .boundary import (
    UNREACHABLE,
    DistanceEvaluation,
    SearchParams,
    distance_all,
    distance_all_local,
    distance_single,
    find_initial_direction,
    is_unreachable,
    misclassifies_all,
)
from .estimator import UniversalPerturbation
from .evaluation import SweepResult, SweepSpec, fooling_rate, sweep
from .exceptions import FitError, InputError, ParseError, SchemaError
from .objectives import ObjectiveSpec, ObjectiveValue, evaluate
from .oracle import (
    CentroidModel,
    FeedForwardModel,
    HardLabelOracle,
    LabeledDataset,
    LinearModel,
    QueryCounter,
    fit_centroid,
    load_dataset,
    load_model,
    save_model,
)
from .rgf import AttackReport, Perturbation, RgfConfig, estimate_gradient, run_attack

__version__ = "0.1.0"
