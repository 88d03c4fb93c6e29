"""Shared fixtures and independent reference implementations.

The reference routines here deliberately avoid the package's own code
paths: copula samples come from textbook constructions (Cholesky for the
Gaussian copula, the Gamma-frailty construction for Clayton), and rank
statistics, AUC, and average precision are computed by direct brute-force
counting.  Tests compare package output against these.
"""

import csv
import math

import numpy as np
import pytest
from scipy.special import ndtr


# ---------------------------------------------------------------- samplers


def gaussian_copula_sample(corr, n, rng):
    """Exact Gaussian-copula draws via Cholesky + the normal CDF."""
    corr = np.asarray(corr, dtype=np.float64)
    if corr.ndim == 0:
        corr = np.array([[1.0, float(corr)], [float(corr), 1.0]])
    L = np.linalg.cholesky(corr)
    z = rng.standard_normal((n, corr.shape[0])) @ L.T
    return ndtr(z)


def clayton_copula_sample(theta, n, rng):
    """Exact Clayton draws via the Gamma(1/theta) frailty construction."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    v = rng.gamma(1.0 / theta, 1.0, size=n)
    e = rng.exponential(size=(n, 2))
    return (1.0 + e / v[:, None]) ** (-1.0 / theta)


def two_moons(n_per_class, noise, rng):
    """Interleaved half-circles; returns (X, y) with y=1 the upper moon."""
    t = rng.uniform(0.0, math.pi, size=n_per_class)
    upper = np.column_stack([np.cos(t), np.sin(t)])
    t2 = rng.uniform(0.0, math.pi, size=n_per_class)
    lower = np.column_stack([1.0 - np.cos(t2), 0.5 - np.sin(t2)])
    X = np.vstack([lower, upper]) + rng.normal(0.0, noise, size=(2 * n_per_class, 2))
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return X, y


def random_fixture(rng, n_min=None, n_maj=None, d=None, discrete=False):
    """Small imbalanced two-class problem, optionally with discrete columns."""
    d = d or int(rng.integers(2, 5))
    n_min = n_min or int(rng.integers(12, 40))
    n_maj = n_maj or n_min + int(rng.integers(5, 60))
    X_min = rng.standard_normal((n_min, d)) + 1.0
    X_maj = rng.standard_normal((n_maj, d))
    if discrete and d >= 2:
        X_min[:, 0] = rng.integers(0, 2, size=n_min).astype(np.float64)
        X_maj[:, 0] = rng.integers(0, 2, size=n_maj).astype(np.float64)
        X_min[:, 1] = rng.choice([1.0, 2.0, 3.0], size=n_min)
        X_maj[:, 1] = rng.choice([1.0, 2.0, 3.0], size=n_maj)
    X = np.vstack([X_maj, X_min])
    y = np.array([0] * n_maj + [1] * n_min)
    perm = rng.permutation(X.shape[0])
    return X[perm], y[perm]


# ------------------------------------------------------- brute-force stats


def brute_kendall_tau(x, y):
    """Tie-corrected (tau-b) Kendall correlation by O(n^2) pair counting."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0:
        return 0.0
    return (concordant - discordant) / denom


def brute_auc(y, scores, positive_label=1):
    """AUC as the fraction of concordant (pos, neg) pairs, ties half credit."""
    y = np.asarray(y)
    scores = np.asarray(scores, dtype=np.float64)
    pos = scores[y == positive_label]
    neg = scores[y != positive_label]
    if pos.size == 0 or neg.size == 0:
        return None
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (pos.size * neg.size)


def brute_average_precision(y, scores, positive_label=1):
    """Step-wise average precision by recomputing the confusion counts at
    every distinct score threshold from scratch."""
    y = np.asarray(y)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(np.sum(y == positive_label))
    if n_pos == 0 or n_pos == y.size:
        return None
    ap = 0.0
    prev_recall = 0.0
    for threshold in sorted(set(scores.tolist()), reverse=True):
        predicted = scores >= threshold
        tp = int(np.sum(predicted & (y == positive_label)))
        fp = int(np.sum(predicted & (y != positive_label)))
        precision = tp / (tp + fp)
        recall = tp / n_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


# ----------------------------------------------------------------- fixtures


@pytest.fixture(scope="session")
def demo_csv(tmp_path_factory):
    """Deterministic imbalanced CSV with one zero-coded column."""
    rng = np.random.default_rng(424242)
    n_maj, n_min = 160, 40
    cov = np.array([[1.0, 0.55, 0.25], [0.55, 1.0, 0.45], [0.25, 0.45, 1.0]])
    L = np.linalg.cholesky(cov)
    maj = rng.standard_normal((n_maj, 3)) @ L.T
    mino = rng.standard_normal((n_min, 3)) @ L.T + 1.4
    X = np.vstack([maj, mino])
    y = np.array([0] * n_maj + [1] * n_min)
    X[:, 0] = np.abs(X[:, 0]) + 0.5
    zero_rows = rng.random(X.shape[0]) < 0.1
    X[zero_rows, 0] = 0.0
    perm = rng.permutation(X.shape[0])
    X, y = X[perm], y[perm]

    path = tmp_path_factory.mktemp("demo") / "demo.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["g0", "x1", "x2", "Outcome"])
        for row, label in zip(X, y):
            writer.writerow([f"{v:.8f}" for v in row] + [label])
    return str(path)


@pytest.fixture(scope="session")
def demo_spec():
    from copulasmote import DatasetSpec

    return DatasetSpec(
        name="demo",
        target_column="Outcome",
        positive_label=1,
        zero_coded_columns=("g0",),
    )
