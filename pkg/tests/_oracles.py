"""Independent reference computations used to check the search routines.

Nothing here calls into the package's search code; the linear models are
evaluated from their raw weights.
"""
import math

import numpy as np


def crossing_distance(W, b, x, y, theta_hat, lambda_max=math.inf):
    """Closed-form first step at which a linear model stops predicting ``y``.

    Along ``x + lam * theta_hat`` the score gap of class k over y is affine in
    lam; the label leaves y at the smallest positive root with positive slope.
    """
    W = np.asarray(W, dtype=float)
    b = np.asarray(b, dtype=float)
    best = math.inf
    for k in range(W.shape[0]):
        if k == y:
            continue
        gap0 = (W[k] - W[y]) @ x + (b[k] - b[y])
        slope = (W[k] - W[y]) @ theta_hat
        if slope > 0:
            best = min(best, max(0.0, -gap0 / slope))
    return best if best <= lambda_max else math.inf


def brute_force_all(W, b, X, y, theta_hat, lambda_max, step=1e-4, chunk=20000):
    """Scan lam = 0, step, 2*step, ... and return the first lam fooling every sample."""
    W = np.asarray(W, dtype=float)
    base = X @ W.T + b  # (N, K)
    slope = W @ theta_hat  # (K,)
    n_points = int(math.floor(lambda_max / step)) + 1
    for start in range(0, n_points, chunk):
        lams = step * np.arange(start, min(start + chunk, n_points))
        scores = base[None, :, :] + lams[:, None, None] * slope[None, None, :]
        labels = np.argmax(scores, axis=2)  # first max == lowest index
        all_fooled = np.all(labels != y[None, :], axis=1)
        hit = np.flatnonzero(all_fooled)
        if hit.size:
            return float(lams[hit[0]])
    return math.inf


def explicit_argmax(W, b, x):
    """Label of a linear model computed with plain Python loops."""
    best_k, best_s = 0, None
    for k in range(len(W)):
        s = b[k]
        for j in range(len(x)):
            s += W[k][j] * x[j]
        if best_s is None or s > best_s:
            best_k, best_s = k, s
    return best_k


def half_plane_distance(x, theta_hat):
    """Distance for the model labelling 0 iff x_1 >= 0, for a point with x_1 > 0."""
    if theta_hat[0] >= 0:
        return math.inf
    return x[0] / -theta_hat[0]
