"""Leakage-free per-fold preprocessing and the stratified 5x2 split plan.

Both transformers follow the fit/transform idiom and learn statistics from
training rows only; applying them to held-out rows reuses the training
statistics, so no test information ever enters a fitted transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import (
    GlobalMissingColumnError,
    InvalidInputError,
    check_labels,
    check_matrix,
)

__all__ = [
    "ZeroMedianImputer",
    "TrainStandardScaler",
    "SplitPlan",
    "make_5x2_splits",
    "stratified_subsample",
]


class ZeroMedianImputer(BaseEstimator, TransformerMixin):
    """Replace zero-coded missing values with the training-column median.

    Zeros in the declared columns are treated as missing; the imputation
    value is the median of the non-zero training entries.  Columns not
    declared are passed through untouched.

    Parameters
    ----------
    zero_coded_columns : sequence of int
        Column indices whose zeros encode missingness.
    """

    def __init__(self, zero_coded_columns=()):
        self.zero_coded_columns = zero_coded_columns

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        cols = [int(c) for c in self.zero_coded_columns]
        for c in cols:
            if not 0 <= c < X.shape[1]:
                raise InvalidInputError(f"zero-coded column {c} out of range for {X.shape[1]} columns")
        medians = {}
        for c in cols:
            observed = X[X[:, c] != 0.0, c]
            if observed.size == 0:
                raise GlobalMissingColumnError(
                    f"column {c} has no non-zero training values to impute from"
                )
            medians[c] = float(np.median(observed))
        self.medians_ = medians
        self.n_features_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_:
            raise InvalidInputError(
                f"X has {X.shape[1]} columns, imputer was fitted on {self.n_features_}"
            )
        out = X.copy()
        for c, med in self.medians_.items():
            col = out[:, c]
            col[col == 0.0] = med
        return out


class TrainStandardScaler(BaseEstimator, TransformerMixin):
    """Standardize to zero mean and unit sample (n-1) standard deviation.

    Constant training columns get scale 1 (so they map to zeros) and raise a
    diagnostic flag instead of an error.
    """

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.mean_ = X.mean(axis=0)
        if X.shape[0] > 1:
            sd = X.std(axis=0, ddof=1)
        else:
            sd = np.zeros(X.shape[1])
        flags = tuple(f"constant_column_{j}" for j in np.flatnonzero(sd == 0.0))
        sd = np.where(sd == 0.0, 1.0, sd)
        self.scale_ = sd
        self.flags_ = flags
        self.n_features_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_:
            raise InvalidInputError(
                f"X has {X.shape[1]} columns, scaler was fitted on {self.n_features_}"
            )
        return (X - self.mean_) / self.scale_


@dataclass(frozen=True)
class SplitPlan:
    """Five stratified half-splits of one label vector.

    ``iterations[i]`` is a pair (half_a, half_b) of disjoint row-index
    arrays covering all rows.  ``folds()`` yields the 10 train/test folds:
    half 1 trains on half_a and tests on half_b, half 2 the reverse.
    """

    master_seed: int
    iterations: tuple

    def folds(self):
        for i, (half_a, half_b) in enumerate(self.iterations, start=1):
            yield i, 1, half_a, half_b
            yield i, 2, half_b, half_a


def make_5x2_splits(labels, master_seed: int) -> SplitPlan:
    """Build the 5x2 cross-validation plan.

    Each iteration permutes every class independently and deals members
    alternately into the two halves, so per-class counts differ by at most
    one.  Deterministic given ``master_seed``.
    """
    y = check_labels(labels)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise InvalidInputError(f"need at least two classes, got {classes.size}")
    small = counts < 2
    if np.any(small):
        raise InvalidInputError(
            f"every class needs at least 2 members; class {classes[np.argmax(small)]!r} has {counts[small][0]}"
        )
    rng = np.random.default_rng(master_seed)
    iterations = []
    for _ in range(5):
        half_a, half_b = [], []
        for c in classes:
            idx = np.flatnonzero(y == c)
            perm = rng.permutation(idx)
            half_a.append(perm[0::2])
            half_b.append(perm[1::2])
        a = np.sort(np.concatenate(half_a))
        b = np.sort(np.concatenate(half_b))
        iterations.append((a, b))
    return SplitPlan(master_seed=int(master_seed), iterations=tuple(iterations))


def stratified_subsample(labels, n_rows: int, seed: int):
    """Seeded stratified subsample: per-class counts proportional to the
    class shares (largest-remainder rounding).  Returns sorted row indices.
    """
    y = check_labels(labels)
    n = y.shape[0]
    if not 1 <= n_rows <= n:
        raise InvalidInputError(f"n_rows must lie in [1, {n}], got {n_rows}")
    classes, counts = np.unique(y, return_counts=True)
    ideal = counts / n * n_rows
    take = np.floor(ideal).astype(np.int64)
    short = n_rows - int(take.sum())
    if short > 0:
        frac = ideal - take
        order = np.argsort(-frac, kind="stable")
        take[order[:short]] += 1
    rng = np.random.default_rng(seed)
    picks = []
    for c, k in zip(classes, take):
        idx = np.flatnonzero(y == c)
        picks.append(rng.permutation(idx)[:k])
    return np.sort(np.concatenate(picks))
