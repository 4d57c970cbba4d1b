"""Scalar surrogate objectives built from boundary distances.

``all``  - distance at which every sample is fooled.
``norm`` - p-norm of the per-sample distances (unreachable entries penalized).
``prob`` - distance at which at least a fraction ``prob_p`` of samples is fooled,
           taken as an order statistic of the per-sample distances.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive
from .boundary import (
    UNREACHABLE,
    SearchParams,
    distance_all,
    distance_all_local,
    distance_single,
    is_unreachable,
)

KINDS = ("all", "norm", "prob")


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str = "norm"
    norm_p: float = 2.0
    prob_p: float = 0.9
    unreachable_penalty: float | None = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise ValueError(f"objective kind must be one of {KINDS}, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        norm_p = self.norm_p
        if isinstance(norm_p, str):
            norm_p = math.inf if norm_p.lower() in ("inf", "infinity") else float(norm_p)
        norm_p = float(norm_p)
        if not norm_p >= 1:
            raise ValueError(f"norm_p must be >= 1 or inf, got {self.norm_p!r}")
        object.__setattr__(self, "norm_p", norm_p)
        if not 0 < self.prob_p <= 1:
            raise ValueError(f"prob_p must lie in (0, 1], got {self.prob_p!r}")
        if self.unreachable_penalty is not None:
            check_positive("unreachable_penalty", self.unreachable_penalty)

    def penalty(self, params):
        if self.unreachable_penalty is not None:
            return float(self.unreachable_penalty)
        return 2.0 * params.lambda_max

    def required_count(self, n):
        """Number of samples PROB must fool: ceil(prob_p * n)."""
        # round first so 0.7 * 10 == 7.000000000000001 does not become 8
        return max(1, math.ceil(round(self.prob_p * n, 9)))


@dataclass(frozen=True)
class ObjectiveValue:
    """An objective value with the per-sample distances behind it.

    ``per_image`` holds raw distances (``inf`` where unreachable) for the
    per-sample objectives and is ``None`` for ``all``.
    """

    value: float
    queries_used: int
    per_image: np.ndarray | None = None
    evaluations: tuple = ()

    @property
    def reachable(self):
        return not is_unreachable(self.value)


def _per_image_distances(oracle, dataset, direction, params, previous, n_jobs):
    def one(i):
        prev = None if previous is None else previous[i]
        return distance_single(oracle, dataset.X[i], dataset.y[i], direction, params, prev)

    indices = range(len(dataset))
    if n_jobs is not None and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            # map preserves index order, so reduction is order independent
            return list(pool.map(one, indices))
    return [one(i) for i in indices]


def _warm_value(warm_start):
    if isinstance(warm_start, ObjectiveValue):
        return warm_start.value
    return warm_start


def evaluate(oracle, dataset, direction, spec=None, params=None, warm_start=None, n_jobs=None):
    """Evaluate the objective ``spec`` along ``direction``.

    ``warm_start`` may be a previous :class:`ObjectiveValue` (per-sample
    searches restart from its per-sample distances) or, for ``all``, a plain
    previous value.
    """
    spec = spec or ObjectiveSpec()
    params = (params or SearchParams()).resolve(dataset.max_norm())

    if spec.kind == "all":
        prev = _warm_value(warm_start)
        if prev is not None and not is_unreachable(prev) and prev > 0:
            ev = distance_all_local(oracle, dataset, direction, prev, params)
        else:
            ev = distance_all(oracle, dataset, direction, params)
        return ObjectiveValue(ev.value, ev.queries_used, None, (ev,))

    previous = None
    if isinstance(warm_start, ObjectiveValue) and warm_start.per_image is not None:
        previous = warm_start.per_image
    evals = _per_image_distances(oracle, dataset, direction, params, previous, n_jobs)
    distances = np.array([ev.value for ev in evals], dtype=float)
    queries = sum(ev.queries_used for ev in evals)

    value = aggregate(distances, spec, spec.penalty(params))
    return ObjectiveValue(value, queries, distances, tuple(evals))


def aggregate(distances, spec, penalty=None):
    """Reduce a vector of per-sample distances the way :func:`evaluate` does."""
    distances = np.asarray(distances, dtype=float)
    if spec.kind == "norm":
        if penalty is None:
            penalty = spec.unreachable_penalty
        filled = np.where(np.isfinite(distances), distances, penalty)
        top = float(np.max(np.abs(filled))) if filled.size else 0.0
        if top == 0:
            return 0.0
        # rescale so squares neither underflow nor overflow
        return top * float(np.linalg.norm(filled / top, ord=spec.norm_p))
    if spec.kind == "prob":
        need = spec.required_count(len(distances))
        finite = np.sort(distances[np.isfinite(distances)])
        return float(finite[need - 1]) if finite.size >= need else UNREACHABLE
    return float(np.max(distances))
