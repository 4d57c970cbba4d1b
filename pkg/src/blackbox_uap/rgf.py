"""Randomized gradient-free descent on the boundary-distance objective.

Each iteration draws Gaussian probes ``u``, forms the forward difference
``(h(theta + beta*u) - h(theta)) / beta * u`` and steps against it. The
direction is renormalized after every step, and the best direction seen is
what the final perturbation is built from.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive, unit
from .boundary import SearchParams, find_initial_direction, is_unreachable
from .exceptions import ParseError
from .objectives import ObjectiveSpec, ObjectiveValue, evaluate

MAX_REDRAWS = 5

OK = "OK"
FAILED = "FAILED"


@dataclass(frozen=True)
class RgfConfig:
    iterations: int = 200
    beta: float = 0.05
    step_size: float = 0.2
    step_decay: float = 0.999
    probes_per_iter: int = 1
    rng_seed: int = 0
    initial_candidates: int = 20

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise ValueError(f"iterations must be a non-negative integer, got {self.iterations!r}")
        check_positive("beta", self.beta)
        check_positive("step_size", self.step_size)
        if not 0 < self.step_decay <= 1:
            raise ValueError(f"step_decay must lie in (0, 1], got {self.step_decay!r}")
        if int(self.probes_per_iter) != self.probes_per_iter or self.probes_per_iter < 1:
            raise ValueError(f"probes_per_iter must be an integer >= 1, got {self.probes_per_iter!r}")
        if int(self.initial_candidates) != self.initial_candidates or self.initial_candidates < 1:
            raise ValueError("initial_candidates must be an integer >= 1")

    def step_at(self, t):
        return self.step_size * self.step_decay ** t


@dataclass(frozen=True)
class GradientEstimate:
    vector: np.ndarray
    base_value: float
    forward_values: tuple
    queries_used: int
    redraws: int = 0


@dataclass(frozen=True)
class Perturbation:
    """``epsilon = magnitude * direction / ||direction||``."""

    epsilon: np.ndarray
    source_direction: np.ndarray
    magnitude: float

    @classmethod
    def from_direction(cls, direction, magnitude):
        direction = np.asarray(direction, dtype=float)
        if is_unreachable(magnitude) or magnitude <= 0:
            return cls(np.zeros_like(direction), direction, 0.0)
        return cls(magnitude * unit(direction), direction, float(magnitude))


@dataclass(frozen=True)
class TrajectoryPoint:
    t: int
    value: float
    queries: int


@dataclass
class AttackReport:
    trajectory: list
    best_value: float
    best_direction: np.ndarray
    final_perturbation: Perturbation
    total_queries: int
    status: str = OK
    diagnostic: str = ""
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)

    @property
    def ok(self):
        return self.status == OK

    def best_so_far(self):
        """Running minimum of the trajectory values."""
        return np.minimum.accumulate([p.value for p in self.trajectory])

    def to_dict(self):
        return {
            "status": self.status,
            "objective": {
                "kind": self.objective.kind,
                "norm_p": _num(self.objective.norm_p),
                "prob_p": self.objective.prob_p,
            },
            "best_value": _num(self.best_value),
            "total_queries": self.total_queries,
            "magnitude": self.final_perturbation.magnitude,
            "best_direction": [float(v) for v in self.best_direction],
            "trajectory": [
                {"t": p.t, "value": _num(p.value), "queries": p.queries} for p in self.trajectory
            ],
            "diagnostic": self.diagnostic,
        }


def _num(value):
    # JSON has no infinity; unreachable values serialize as null
    return float(value) if math.isfinite(value) else None


def report_to_json(report):
    return json.dumps(report.to_dict(), indent=2) + "\n"


def write_report(report, path):
    with open(path, "w") as fh:
        fh.write(report_to_json(report))


def perturbation_to_csv(epsilon):
    return "".join(f"{float(v)!r}\n" for v in np.asarray(epsilon, dtype=float))


def write_perturbation(epsilon, path):
    with open(path, "w") as fh:
        fh.write(perturbation_to_csv(epsilon))


def read_perturbation(path, dimension=None):
    values = []
    with open(path) as fh:
        for row_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParseError(f"not a number: {text!r}", row_no) from None
    if dimension is not None and len(values) != dimension:
        raise ParseError(f"perturbation has {len(values)} entries, model expects {dimension}")
    eps = np.array(values, dtype=float)
    if not np.all(np.isfinite(eps)):
        raise ParseError("perturbation entries must be finite")
    return eps


def estimate_gradient(oracle, dataset, theta, spec, config, base, params=None, rng=None,
                      n_jobs=None):
    """Average of ``probes_per_iter`` forward-difference estimates at ``theta``.

    ``base`` is the objective at ``theta`` (an :class:`ObjectiveValue` or a
    finite float) and warm-starts every probe evaluation. A probe landing on
    an unreachable value is redrawn up to five times, then contributes zero.
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    base_value = base.value if isinstance(base, ObjectiveValue) else float(base)
    if is_unreachable(base_value):
        raise ValueError("gradient estimation needs a finite base value")
    theta = np.asarray(theta, dtype=float)
    total = np.zeros_like(theta)
    forwards = []
    queries = redraws = 0
    for _ in range(int(config.probes_per_iter)):
        for attempt in range(MAX_REDRAWS + 1):
            u = rng.standard_normal(theta.shape[0])
            probe = theta + config.beta * u
            if not np.any(probe):
                continue
            fwd = evaluate(oracle, dataset, probe, spec, params, warm_start=base, n_jobs=n_jobs)
            queries += fwd.queries_used
            if fwd.reachable:
                forwards.append(fwd.value)
                total += (fwd.value - base_value) / config.beta * u
                break
            if attempt < MAX_REDRAWS:
                redraws += 1
    return GradientEstimate(
        vector=total / config.probes_per_iter,
        base_value=base_value,
        forward_values=tuple(forwards),
        queries_used=queries,
        redraws=redraws,
    )


def run_attack(oracle, dataset, spec=None, search=None, config=None, n_jobs=None):
    """Search for a universal perturbation with hard-label queries only.

    The returned report's trajectory starts with the initial direction's value
    (``t=0``) followed by one record per iteration. ``final_perturbation`` is
    built from the best direction seen, not the last iterate.
    """
    spec = spec or ObjectiveSpec()
    config = config or RgfConfig()
    params = (search or SearchParams()).resolve(dataset.max_norm())
    if oracle.dimension != dataset.dimension:
        raise ValueError(
            f"oracle expects dimension {oracle.dimension}, dataset has {dataset.dimension}"
        )
    rng = np.random.default_rng(config.rng_seed)

    theta0, current, queries = find_initial_direction(
        oracle, dataset, spec, config.initial_candidates, rng, params, n_jobs=n_jobs
    )
    trajectory = [TrajectoryPoint(0, current.value, queries)]
    if not current.reachable:
        return AttackReport(
            trajectory=trajectory,
            best_value=current.value,
            best_direction=theta0,
            final_perturbation=Perturbation.from_direction(theta0, 0.0),
            total_queries=queries,
            status=FAILED,
            diagnostic=(
                f"all {config.initial_candidates} initial directions were unreachable "
                f"within lambda_max={params.lambda_max:g}"
            ),
            objective=spec,
        )

    theta = unit(theta0)
    best_theta, best = theta, current
    reverts = 0
    for t in range(int(config.iterations)):
        grad = estimate_gradient(
            oracle, dataset, theta, spec, config, current, params, rng, n_jobs=n_jobs
        )
        queries += grad.queries_used
        stepped = theta - config.step_at(t) * grad.vector
        if np.any(stepped):
            theta = unit(stepped)
        value = evaluate(oracle, dataset, theta, spec, params, warm_start=current, n_jobs=n_jobs)
        queries += value.queries_used
        trajectory.append(TrajectoryPoint(t + 1, value.value, queries))
        if not value.reachable:
            # stepped off the reachable region; resume from the best point
            theta, current = best_theta, best
            reverts += 1
            continue
        current = value
        if value.value < best.value:
            best_theta, best = theta, value

    diagnostic = f"{reverts} iterations reverted after unreachable steps" if reverts else ""
    return AttackReport(
        trajectory=trajectory,
        best_value=best.value,
        best_direction=best_theta,
        final_perturbation=Perturbation.from_direction(best_theta, best.value),
        total_queries=queries,
        status=OK,
        diagnostic=diagnostic,
        objective=spec,
    )
