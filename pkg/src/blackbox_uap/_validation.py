import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import InputError


def check_vector(x, dimension):
    """Return ``x`` as a 1-d float array of length ``dimension``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != dimension:
        raise InputError(f"expected a vector of dimension {dimension}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("input contains NaN or infinite entries")
    return x


def check_samples(X, dimension=None):
    X = check_array(X, dtype=float, ensure_all_finite=True)
    if dimension is not None and X.shape[1] != dimension:
        raise InputError(f"expected {dimension} features, got {X.shape[1]}")
    return X


def check_labels(y, n_samples, class_count=None):
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_samples:
        raise InputError(f"expected {n_samples} labels, got shape {y.shape}")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise InputError("labels must be integers")
    y = y.astype(np.int64)
    if y.size and y.min() < 0:
        raise InputError("labels must be non-negative")
    if class_count is not None and y.size and y.max() >= class_count:
        raise InputError(f"label {int(y.max())} out of range for {class_count} classes")
    return y


def check_positive(name, value, allow_zero=False):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value!r}")
    return float(value)


def unit(vector):
    """Unit-normalize a nonzero direction."""
    vector = np.asarray(vector, dtype=float)
    norm = np.linalg.norm(vector)
    if not np.isfinite(norm) or norm == 0:
        raise InputError("direction must be a finite nonzero vector")
    return vector / norm
