"""Fooling rate of a perturbation and its sweep over perturbation scales."""
import csv
import io
from dataclasses import dataclass

import numpy as np

from ._validation import check_samples, check_vector, unit
from .oracle import LabeledDataset


def _samples(data):
    return data.X if isinstance(data, LabeledDataset) else np.asarray(data, dtype=float)


def _changed(oracle, X, clean, epsilon):
    return sum(oracle.classify(x + epsilon) != c for x, c in zip(X, clean))


def fooling_rate(oracle, data, epsilon):
    """Fraction of samples whose predicted label changes when ``epsilon`` is added.

    The baseline is the oracle's own prediction on the clean sample, so
    dataset labels are ignored. Costs 2N queries.
    """
    X = check_samples(_samples(data), oracle.dimension)
    epsilon = check_vector(epsilon, oracle.dimension)
    clean = oracle.predict(X)
    return float(_changed(oracle, X, clean, epsilon)) / X.shape[0]


@dataclass(frozen=True)
class SweepSpec:
    """Scales to evaluate, ascending.

    With ``relative=True`` each scale is a relative-distortion target and is
    multiplied by the mean sample norm to get the absolute step.
    """

    scales: tuple
    relative: bool = False

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        if not scales:
            raise ValueError("sweep needs at least one scale")
        if any(s < 0 or not np.isfinite(s) for s in scales):
            raise ValueError("scales must be finite and non-negative")
        if any(b < a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be sorted ascending")
        object.__setattr__(self, "scales", scales)


@dataclass(frozen=True)
class SweepRow:
    scale: float
    relative_distortion: float
    fooling_rate: float
    queries: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scale", "relative_distortion", "fooling_rate", "queries"])
        for r in self.rows:
            writer.writerow([repr(r.scale), repr(r.relative_distortion), repr(r.fooling_rate), r.queries])
        return buf.getvalue()

    @property
    def fooling_rates(self):
        return np.array([r.fooling_rate for r in self.rows])


def sweep(oracle, data, direction, spec):
    """Fooling rate of ``scale * direction/||direction||`` for every scale.

    A zero direction is allowed and yields a zero perturbation at every scale.
    """
    if not isinstance(spec, SweepSpec):
        spec = SweepSpec(tuple(spec))
    X = check_samples(_samples(data), oracle.dimension)
    direction = check_vector(direction, oracle.dimension)
    theta_hat = unit(direction) if np.any(direction) else direction
    mean_norm = float(np.mean(np.linalg.norm(X, axis=1)))
    n = X.shape[0]

    clean = oracle.predict(X)
    baseline_queries = n
    rows = []
    for s in spec.scales:
        lam = s * mean_norm if spec.relative else s
        rate = float(_changed(oracle, X, clean, lam * theta_hat)) / n
        rel = lam / mean_norm if mean_norm > 0 else float("inf")
        rows.append(SweepRow(lam, rel, rate, n + baseline_queries))
        baseline_queries = 0
    return SweepResult(tuple(rows))


def write_sweep(result, path):
    with open(path, "w", newline="") as fh:
        fh.write(result.to_csv())
