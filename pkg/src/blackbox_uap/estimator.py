"""scikit-learn style front end for the universal hard-label attack."""
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_labels, check_samples
from .boundary import SearchParams
from .evaluation import SweepSpec, fooling_rate, sweep
from .objectives import ObjectiveSpec
from .oracle import LabeledDataset
from .rgf import RgfConfig, run_attack


class UniversalPerturbation(TransformerMixin, BaseEstimator):
    """Find one perturbation that flips the oracle's label on most samples.

    Only hard-label queries to ``oracle`` are made. ``fit`` runs the
    randomized gradient-free search; ``transform`` adds the fitted
    perturbation; ``score`` is the fooling rate.

    Parameters
    ----------
    oracle : HardLabelOracle
        The black-box classifier under attack.
    objective : {"norm", "all", "prob"}
        Surrogate minimized over directions.
    norm_p, prob_p, unreachable_penalty
        Objective settings, see :class:`~blackbox_uap.objectives.ObjectiveSpec`.
    alpha, tol, lambda_max, grid_steps
        Boundary line-search settings.
    iterations, beta, step_size, step_decay, probes_per_iter, initial_candidates
        Optimizer settings.
    random_state : int or None
        Seed of the single generator that drives every random draw.
    n_jobs : int or None
        Threads used for per-sample distance searches. Results do not
        depend on it.

    Attributes
    ----------
    perturbation_ : ndarray of shape (n_features,)
    direction_ : ndarray of shape (n_features,)
        Unit direction of the best iterate.
    best_value_ : float
    n_queries_ : int
        Oracle queries spent by the search (labelling ``X`` excluded).
    report_ : AttackReport
    """

    def __init__(self, oracle, objective="norm", norm_p=2.0, prob_p=0.9,
                 unreachable_penalty=None, alpha=0.01, tol=1e-5, lambda_max=None,
                 grid_steps=200, iterations=200, beta=0.05, step_size=0.2,
                 step_decay=0.999, probes_per_iter=1, initial_candidates=20,
                 random_state=0, n_jobs=None):
        self.oracle = oracle
        self.objective = objective
        self.norm_p = norm_p
        self.prob_p = prob_p
        self.unreachable_penalty = unreachable_penalty
        self.alpha = alpha
        self.tol = tol
        self.lambda_max = lambda_max
        self.grid_steps = grid_steps
        self.iterations = iterations
        self.beta = beta
        self.step_size = step_size
        self.step_decay = step_decay
        self.probes_per_iter = probes_per_iter
        self.initial_candidates = initial_candidates
        self.random_state = random_state
        self.n_jobs = n_jobs

    def objective_spec(self):
        return ObjectiveSpec(self.objective, self.norm_p, self.prob_p, self.unreachable_penalty)

    def search_params(self):
        return SearchParams(self.alpha, self.tol, self.lambda_max, self.grid_steps)

    def rgf_config(self):
        return RgfConfig(
            iterations=self.iterations,
            beta=self.beta,
            step_size=self.step_size,
            step_decay=self.step_decay,
            probes_per_iter=self.probes_per_iter,
            rng_seed=self.random_state,
            initial_candidates=self.initial_candidates,
        )

    def fit(self, X, y=None):
        """Search for the perturbation on samples ``X``.

        When ``y`` is omitted the oracle's own predictions on ``X`` are used
        as the labels to move away from.
        """
        X = check_samples(X, self.oracle.dimension)
        if y is None:
            y = self.oracle.predict(X)
        y = check_labels(y, X.shape[0], self.oracle.class_count)
        dataset = LabeledDataset(X, y, self.oracle.class_count)
        report = run_attack(
            self.oracle, dataset, self.objective_spec(), self.search_params(),
            self.rgf_config(), n_jobs=self.n_jobs,
        )
        self.report_ = report
        self.perturbation_ = report.final_perturbation.epsilon
        self.direction_ = report.best_direction
        self.best_value_ = report.best_value
        self.n_queries_ = report.total_queries
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "perturbation_")
        X = check_samples(X, self.n_features_in_)
        return X + self.perturbation_

    def score(self, X, y=None):
        """Fooling rate of the fitted perturbation on ``X``; ``y`` is ignored."""
        check_is_fitted(self, "perturbation_")
        return fooling_rate(self.oracle, X, self.perturbation_)

    def sweep(self, X, scales, relative=False):
        check_is_fitted(self, "direction_")
        return sweep(self.oracle, X, self.direction_, SweepSpec(tuple(scales), relative))
