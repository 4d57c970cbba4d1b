"""Boundary-distance search along a direction using hard-label queries only.

A distance is the smallest step ``lam`` along the unit direction at which a
fooling condition holds. The condition is either "this one sample changes
label" or "every sample changes label". Cold searches scan a uniform grid on
``(0, lambda_max]`` and bisect the first bracket. Warm searches start from a
previous value and grow or shrink it geometrically before bisecting.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from ._validation import check_positive, unit

UNREACHABLE = math.inf


def is_unreachable(value):
    return value is None or not math.isfinite(value)


@dataclass(frozen=True)
class SearchParams:
    """Line-search settings.

    ``lambda_max=None`` means ten times the largest sample norm of the data the
    search runs on; call :meth:`resolve` to pin it.
    """

    alpha: float = 0.01
    tol: float = 1e-5
    lambda_max: float | None = None
    grid_steps: int = 200

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        check_positive("tol", self.tol)
        if self.lambda_max is not None:
            check_positive("lambda_max", self.lambda_max)
        if int(self.grid_steps) != self.grid_steps or self.grid_steps < 2:
            raise ValueError(f"grid_steps must be an integer >= 2, got {self.grid_steps!r}")

    def resolve(self, max_norm):
        if self.lambda_max is not None:
            return self
        radius = 10.0 * float(max_norm)
        return replace(self, lambda_max=radius if radius > 0 else 1.0)


@dataclass(frozen=True)
class DistanceEvaluation:
    """Result of one boundary search.

    ``value`` is ``UNREACHABLE`` (``inf``) when no fooling step exists within
    ``lambda_max``; otherwise it equals ``bracket[1]``. The step counters let
    callers check the query bound ``N * (grid + expansion + bisection)``.
    """

    value: float
    queries_used: int
    bracket: tuple[float, float] | None = None
    grid_evals: int = 0
    expansion_steps: int = 0
    bisection_iters: int = 0
    initial_width: float = 0.0
    lambda_max: float | None = None

    @property
    def reachable(self):
        return not is_unreachable(self.value)


class _Condition:
    """Fooling predicate on the step length with a local query tally."""

    def __init__(self, test):
        self._test = test
        self.queries = 0

    def __call__(self, lam):
        fooled, used = self._test(lam)
        self.queries += used
        return fooled


def _single_test(oracle, x, y, theta_hat):
    def test(lam):
        return oracle.classify(x + lam * theta_hat) != y, 1

    return test


def _all_test(oracle, X, y, theta_hat):
    def test(lam):
        step = lam * theta_hat
        used = 0
        for xi, yi in zip(X, y):
            used += 1
            if oracle.classify(xi + step) == yi:
                return False, used
        return True, used

    return test


def _bisect(fooled, lo, hi, tol):
    iters = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        iters += 1
        if fooled(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi, iters


def _cold_search(fooled, params):
    lambda_max = params.lambda_max
    steps = int(params.grid_steps)
    prev = 0.0
    for j in range(1, steps + 1):
        lam = lambda_max * j / steps
        if fooled(lam):
            lo, hi, iters = _bisect(fooled, prev, lam, params.tol)
            return DistanceEvaluation(
                value=hi,
                queries_used=fooled.queries,
                bracket=(lo, hi),
                grid_evals=j,
                bisection_iters=iters,
                initial_width=lam - prev,
                lambda_max=lambda_max,
            )
        prev = lam
    return DistanceEvaluation(
        value=UNREACHABLE, queries_used=fooled.queries, grid_evals=steps, lambda_max=lambda_max
    )


def _local_search(fooled, previous_v, params):
    alpha, lambda_max = params.alpha, params.lambda_max
    v = float(previous_v)
    steps = 1
    if not fooled(v):
        # grow until the condition holds
        left, right = v, (1 + alpha) * v
        while True:
            if right > lambda_max:
                return DistanceEvaluation(
                    value=UNREACHABLE,
                    queries_used=fooled.queries,
                    expansion_steps=steps,
                    lambda_max=lambda_max,
                )
            steps += 1
            if fooled(right):
                break
            left, right = right, (1 + alpha) * right
    else:
        # shrink until it fails; below tol the bracket is closed at zero
        right, left = v, (1 - alpha) * v
        while True:
            if left < params.tol:
                left = 0.0
                break
            steps += 1
            if not fooled(left):
                break
            right, left = left, (1 - alpha) * left
    width = right - left
    lo, hi, iters = _bisect(fooled, left, right, params.tol)
    return DistanceEvaluation(
        value=hi,
        queries_used=fooled.queries,
        bracket=(lo, hi),
        expansion_steps=steps,
        bisection_iters=iters,
        initial_width=width,
        lambda_max=lambda_max,
    )


def misclassifies_all(oracle, dataset, direction, lam):
    """True iff every sample's label changes at step ``lam`` along the direction.

    Stops at the first sample that keeps its label, so at most N queries.
    """
    if lam < 0:
        raise ValueError(f"step must be non-negative, got {lam!r}")
    fooled, _ = _all_test(oracle, dataset.X, dataset.y, unit(direction))(lam)
    return fooled


def distance_all(oracle, dataset, direction, params=None):
    """Smallest step at which all samples are misclassified (cold start)."""
    params = (params or SearchParams()).resolve(dataset.max_norm())
    fooled = _Condition(_all_test(oracle, dataset.X, dataset.y, unit(direction)))
    return _cold_search(fooled, params)


def distance_all_local(oracle, dataset, direction, previous_v, params=None):
    """Warm-started variant of :func:`distance_all` seeded at ``previous_v``."""
    check_positive("previous_v", previous_v)
    params = (params or SearchParams()).resolve(dataset.max_norm())
    fooled = _Condition(_all_test(oracle, dataset.X, dataset.y, unit(direction)))
    return _local_search(fooled, previous_v, params)


def distance_single(oracle, x, y, direction, params=None, previous_v=None):
    """Smallest step at which sample ``x`` (label ``y``) changes label.

    With a finite positive ``previous_v`` the search is warm-started from it;
    otherwise the grid-then-bisect cold search is used.
    """
    x = np.asarray(x, dtype=float)
    params = (params or SearchParams()).resolve(np.linalg.norm(x))
    fooled = _Condition(_single_test(oracle, x, int(y), unit(direction)))
    if previous_v is not None and math.isfinite(previous_v) and previous_v > 0:
        return _local_search(fooled, previous_v, params)
    return _cold_search(fooled, params)


def find_initial_direction(oracle, dataset, objective, candidates=20, rng_seed=None,
                           params=None, n_jobs=None):
    """Pick the best of ``candidates`` standard Gaussian directions.

    Returns ``(direction, ObjectiveValue, queries)``. A finite value beats an
    unreachable one; if every candidate is unreachable the last one is
    returned with its unreachable value.
    """
    from .objectives import evaluate

    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    rng = np.random.default_rng(rng_seed)
    best_dir, best_val = None, None
    queries = 0
    for _ in range(int(candidates)):
        theta = rng.standard_normal(dataset.dimension)
        val = evaluate(oracle, dataset, theta, objective, params, n_jobs=n_jobs)
        queries += val.queries_used
        if best_val is None or val.value < best_val.value or (
            is_unreachable(best_val.value) and is_unreachable(val.value)
        ):
            best_dir, best_val = theta, val
    return best_dir, best_val, queries
