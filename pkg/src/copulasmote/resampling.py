"""Minority oversampling: vine-copula synthesis and interpolation baselines.

All resamplers share one contract.  Given a two-class training fold they
identify the minority class as the smaller one, generate
``n_syn = n_maj - n_min`` synthetic minority rows, append them, and shuffle.
The output therefore has exactly equal class counts; original rows are
preserved verbatim (the shuffle permutation is recorded).  Everything is
deterministic given the random state.

``CopulaSmoteResampler`` implements the dependence-aware generator: jitter
the minority block, rank-transform it to pseudo-observations, fit a
truncated vine copula, sample new pseudo-observations, and map each column
back through the empirical inverse CDF of the *un-jittered* minority values.
Synthetic values are therefore always members of the observed minority
support, exactly.

The baselines (`SmoteResampler`, `BorderlineSmoteResampler`,
`AdasynResampler`) interpolate between minority neighbors in feature space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import (
    InvalidInputError,
    check_labels,
    check_matrix,
    check_random_state,
)
from .pair_copula import DEFAULT_FAMILY_LIBRARY
from .vine import VineCopula, default_truncation

__all__ = [
    "ResampleOutput",
    "pseudo_observations",
    "empirical_inverse_cdf",
    "CopulaSmoteResampler",
    "SmoteResampler",
    "BorderlineSmoteResampler",
    "AdasynResampler",
    "NoResampler",
    "make_resampler",
    "METHOD_NAMES",
]


@dataclass(frozen=True)
class ResampleOutput:
    """Result of one resampling call.

    ``synthetic_mask`` marks the generated rows; ``permutation`` maps output
    row i to its position in the unshuffled (originals then synthetics)
    ordering, so originals can be recovered verbatim.
    """

    features: np.ndarray
    labels: np.ndarray
    minority_label: object
    n_min: int
    n_maj: int
    n_syn: int
    synthetic_mask: np.ndarray
    permutation: np.ndarray
    flags: tuple = ()


def pseudo_observations(minority, jitter_sd: float = 0.0, rng=None):
    """Rank-transform a minority block to pseudo-observations in (0, 1).

    Gaussian noise with standard deviation ``jitter_sd`` is added first to
    break ties between equal values (the data are standardized upstream, so
    a tiny sd suffices); any residual exact ties break by row index.  Each
    column of the result is a permutation of {1/(n+1), ..., n/(n+1)}.
    """
    x = check_matrix(minority, "minority")
    n = x.shape[0]
    if n < 2:
        raise InvalidInputError(f"need at least 2 minority rows, got {n}")
    if jitter_sd < 0:
        raise InvalidInputError(f"jitter_sd must be >= 0, got {jitter_sd}")
    if jitter_sd > 0:
        rng = check_random_state(rng)
        x = x + rng.normal(0.0, jitter_sd, x.shape)
    u = np.empty_like(x)
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind="stable")
        ranks = np.empty(n, dtype=np.float64)
        ranks[order] = np.arange(1, n + 1)
        u[:, j] = ranks / (n + 1.0)
    return u


def empirical_inverse_cdf(sorted_values, u):
    """Nearest-sorted-value quantile: the k-th order statistic with
    k = max(1, min(n, ceil(u * n))).

    Returned values are always members of ``sorted_values``.
    """
    v = np.asarray(sorted_values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError("sorted_values must be a non-empty 1-d sequence")
    if np.any(np.diff(v) < 0):
        raise InvalidInputError("sorted_values must be nondecreasing")
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise InvalidInputError("u must lie strictly inside (0, 1)")
    n = v.size
    k = np.clip(np.ceil(u * n).astype(np.int64), 1, n)
    return v[k - 1]


def _pairwise_sq_dists(a, b):
    # (x - y)^2 expansion; always >= 0 after clipping tiny negatives
    d2 = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.maximum(d2, 0.0)


def _nearest_neighbors(query, reference, n_neighbors, self_indices=None, chunk=256):
    """Indices of the n nearest reference rows per query row, brute force.

    Stable argsort breaks distance ties by reference index.  When
    ``self_indices`` is given, query i is excluded from its own neighbor
    list (query rows are reference rows at those indices).
    """
    n_q = query.shape[0]
    out = np.empty((n_q, n_neighbors), dtype=np.int64)
    for start in range(0, n_q, chunk):
        stop = min(start + chunk, n_q)
        d2 = _pairwise_sq_dists(query[start:stop], reference)
        if self_indices is not None:
            d2[np.arange(stop - start), self_indices[start:stop]] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")
        out[start:stop] = order[:, :n_neighbors]
    return out


class _BaseResampler(BaseEstimator):
    """Shared two-class balance logic; subclasses generate synthetic rows."""

    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit_resample(self, X, y):
        """Balance the classes; returns (X_res, y_res).

        The full structured result (masks, counts, flags, permutation) is
        available on ``output_`` afterwards.
        """
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0])
        classes, counts = np.unique(y, return_counts=True)
        if classes.size != 2:
            raise InvalidInputError(f"need exactly two classes, got {classes.size}")
        minority = classes[np.argmin(counts)]
        n_min = int(counts.min())
        n_maj = int(counts.max())
        n_syn = n_maj - n_min
        rng = check_random_state(self.random_state)

        if n_syn == 0:
            out = ResampleOutput(
                features=X.copy(),
                labels=y.copy(),
                minority_label=minority,
                n_min=n_min,
                n_maj=n_maj,
                n_syn=0,
                synthetic_mask=np.zeros(X.shape[0], dtype=bool),
                permutation=np.arange(X.shape[0]),
                flags=(),
            )
            self.output_ = out
            return out.features, out.labels

        min_mask = y == minority
        X_min = X[min_mask]
        synth, flags = self._generate(X, y, X_min, minority, n_syn, rng)

        features = np.vstack([X, synth])
        labels = np.concatenate([y, np.full(n_syn, minority, dtype=y.dtype)])
        mask = np.concatenate([np.zeros(X.shape[0], dtype=bool), np.ones(n_syn, dtype=bool)])
        perm = rng.permutation(features.shape[0])
        out = ResampleOutput(
            features=features[perm],
            labels=labels[perm],
            minority_label=minority,
            n_min=n_min,
            n_maj=n_maj,
            n_syn=n_syn,
            synthetic_mask=mask[perm],
            permutation=perm,
            flags=tuple(flags),
        )
        self.output_ = out
        return out.features, out.labels

    def _generate(self, X, y, X_min, minority, n_syn, rng):
        raise NotImplementedError


class CopulaSmoteResampler(_BaseResampler):
    """Vine-copula minority oversampler.

    Parameters
    ----------
    jitter_sd : float
        Tie-breaking noise sd applied before rank transformation.
    truncation_level : int or None
        Vine truncation; None means min(3, d - 1).
    family_library : sequence
        Candidate pair-copula families.
    random_state : None, int, or Generator
    """

    def __init__(self, jitter_sd=1e-6, truncation_level=None,
                 family_library=DEFAULT_FAMILY_LIBRARY, random_state=None):
        super().__init__(random_state=random_state)
        self.jitter_sd = jitter_sd
        self.truncation_level = truncation_level
        self.family_library = family_library

    def _generate(self, X, y, X_min, minority, n_syn, rng):
        if self.jitter_sd <= 0:
            raise InvalidInputError(f"jitter_sd must be > 0, got {self.jitter_sd}")
        n_min, d = X_min.shape
        flags = []
        if d == 1:
            # no dependence to model; sample the empirical margin directly
            flags.append("univariate_minority")
            u_syn = np.clip(rng.random((n_syn, 1)), 1e-10, 1 - 1e-10)
            self.vine_ = None
        else:
            degenerate = n_min < 10 or bool(np.any(np.ptp(X_min, axis=0) == 0.0))
            if degenerate:
                flags.append("degenerate_minority_independence_fallback")
                vine = VineCopula.independent(d, n_obs=n_min, flags=("degenerate_minority",))
            else:
                u = pseudo_observations(X_min, self.jitter_sd, rng)
                vine = VineCopula(
                    truncation_level=self.truncation_level,
                    family_library=self.family_library,
                ).fit(u)
                flags.extend(vine.flags_)
            u_syn = vine.sample(n_syn, random_state=rng)
            self.vine_ = vine
        synth = np.empty((n_syn, d))
        for j in range(d):
            synth[:, j] = empirical_inverse_cdf(np.sort(X_min[:, j]), u_syn[:, j])
        return synth, flags


def _interpolate(X_min, bases, nbr_lists, rng):
    """SMOTE-style interpolation: row b + lam * (neighbor - row b)."""
    choices = rng.integers(0, nbr_lists.shape[1], bases.size)
    lams = rng.random(bases.size)
    nbrs = nbr_lists[bases, choices]
    return X_min[bases] + lams[:, None] * (X_min[nbrs] - X_min[bases])


def _smote_generate(X_min, n_syn, k_neighbors, rng, seed_pool=None):
    """Core SMOTE draw; ``seed_pool`` restricts which minority rows seed."""
    n_min = X_min.shape[0]
    flags = []
    if n_min < 2:
        flags.append("single_minority_duplicate")
        return np.repeat(X_min, n_syn, axis=0), flags
    k_eff = min(k_neighbors, n_min - 1)
    nbr_lists = _nearest_neighbors(X_min, X_min, k_eff, self_indices=np.arange(n_min))
    if seed_pool is None:
        bases = rng.integers(0, n_min, n_syn)
    else:
        bases = seed_pool[rng.integers(0, seed_pool.size, n_syn)]
    return _interpolate(X_min, bases, nbr_lists, rng), flags


class SmoteResampler(_BaseResampler):
    """Classic SMOTE: interpolate between minority nearest neighbors."""

    def __init__(self, k_neighbors=5, random_state=None):
        super().__init__(random_state=random_state)
        self.k_neighbors = k_neighbors

    def _generate(self, X, y, X_min, minority, n_syn, rng):
        if self.k_neighbors < 1:
            raise InvalidInputError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        return _smote_generate(X_min, n_syn, self.k_neighbors, rng)


class BorderlineSmoteResampler(_BaseResampler):
    """Borderline SMOTE (variant 1): seeds restricted to the DANGER set.

    A minority point is DANGER when, among its m nearest neighbors in the
    whole training fold, the majority count c satisfies m/2 <= c < m.
    Points with c = m are noise and points with c < m/2 are safe; neither
    seeds interpolation.  An empty DANGER set falls back to plain SMOTE.
    """

    def __init__(self, k_neighbors=5, m_neighbors=None, random_state=None):
        super().__init__(random_state=random_state)
        self.k_neighbors = k_neighbors
        self.m_neighbors = m_neighbors

    def _generate(self, X, y, X_min, minority, n_syn, rng):
        if self.k_neighbors < 1:
            raise InvalidInputError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        n_min = X_min.shape[0]
        if n_min < 2:
            return _smote_generate(X_min, n_syn, self.k_neighbors, rng)
        m = self.m_neighbors if self.m_neighbors is not None else self.k_neighbors
        m = min(m, X.shape[0] - 1)
        min_idx = np.flatnonzero(y == minority)
        nbrs = _nearest_neighbors(X_min, X, m, self_indices=min_idx)
        maj_counts = np.sum(y[nbrs] != minority, axis=1)
        danger = np.flatnonzero((maj_counts >= m / 2.0) & (maj_counts < m))
        if danger.size == 0:
            synth, flags = _smote_generate(X_min, n_syn, self.k_neighbors, rng)
            return synth, flags + ["borderline_fallback_smote"]
        return _smote_generate(X_min, n_syn, self.k_neighbors, rng, seed_pool=danger)


class AdasynResampler(_BaseResampler):
    """ADASYN: synthetic counts weighted by local majority density.

    Each minority point i gets weight r_i = (majority among its k nearest
    neighbors in the whole fold) / k; normalized weights allocate the n_syn
    rows by largest-remainder rounding.  All-zero weights (no minority point
    borders the majority class) fall back to plain SMOTE for the fold.
    """

    def __init__(self, k_neighbors=5, random_state=None):
        super().__init__(random_state=random_state)
        self.k_neighbors = k_neighbors

    def _generate(self, X, y, X_min, minority, n_syn, rng):
        if self.k_neighbors < 1:
            raise InvalidInputError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        n_min = X_min.shape[0]
        if n_min < 2:
            return _smote_generate(X_min, n_syn, self.k_neighbors, rng)
        k = min(self.k_neighbors, X.shape[0] - 1)
        min_idx = np.flatnonzero(y == minority)
        nbrs = _nearest_neighbors(X_min, X, k, self_indices=min_idx)
        r = np.sum(y[nbrs] != minority, axis=1) / float(k)
        total = r.sum()
        if not np.isfinite(total) or total == 0.0:
            synth, flags = _smote_generate(X_min, n_syn, self.k_neighbors, rng)
            return synth, flags + ["adasyn_fallback_smote"]
        ideal = r / total * n_syn
        counts = np.floor(ideal).astype(np.int64)
        short = n_syn - int(counts.sum())
        if short > 0:
            frac = ideal - counts
            # largest remainders win; ties break toward lower index
            order = np.argsort(-frac, kind="stable")
            counts[order[:short]] += 1

        k_eff = min(self.k_neighbors, n_min - 1)
        nbr_lists = _nearest_neighbors(X_min, X_min, k_eff, self_indices=np.arange(n_min))
        bases = np.repeat(np.arange(n_min), counts)
        return _interpolate(X_min, bases, nbr_lists, rng), []


class NoResampler(_BaseResampler):
    """Pass-through baseline: trains on the fold as-is."""

    def fit_resample(self, X, y):
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0])
        classes, counts = np.unique(y, return_counts=True)
        if classes.size != 2:
            raise InvalidInputError(f"need exactly two classes, got {classes.size}")
        minority = classes[np.argmin(counts)]
        out = ResampleOutput(
            features=X.copy(),
            labels=y.copy(),
            minority_label=minority,
            n_min=int(counts.min()),
            n_maj=int(counts.max()),
            n_syn=0,
            synthetic_mask=np.zeros(X.shape[0], dtype=bool),
            permutation=np.arange(X.shape[0]),
            flags=("no_resampling",),
        )
        self.output_ = out
        return out.features, out.labels


METHOD_NAMES = ("CopulaSMOTE", "SMOTE", "BorderlineSMOTE", "ADASYN", "None")

_METHOD_KEYS = {
    "copulasmote": "CopulaSMOTE",
    "smote": "SMOTE",
    "borderlinesmote": "BorderlineSMOTE",
    "adasyn": "ADASYN",
    "none": "None",
}


def canonical_method_name(method: str) -> str:
    key = "".join(ch for ch in str(method).lower() if ch.isalnum())
    try:
        return _METHOD_KEYS[key]
    except KeyError:
        raise InvalidInputError(
            f"unknown method {method!r}; expected one of {', '.join(METHOD_NAMES)}"
        ) from None


def make_resampler(method: str, *, k_neighbors=5, jitter_sd=1e-6,
                   truncation_level=None, family_library=DEFAULT_FAMILY_LIBRARY,
                   random_state=None) -> _BaseResampler:
    """Build a resampler by method name (case/punctuation-insensitive)."""
    name = canonical_method_name(method)
    if name == "CopulaSMOTE":
        return CopulaSmoteResampler(
            jitter_sd=jitter_sd,
            truncation_level=truncation_level,
            family_library=family_library,
            random_state=random_state,
        )
    if name == "SMOTE":
        return SmoteResampler(k_neighbors=k_neighbors, random_state=random_state)
    if name == "BorderlineSMOTE":
        return BorderlineSmoteResampler(k_neighbors=k_neighbors, random_state=random_state)
    if name == "ADASYN":
        return AdasynResampler(k_neighbors=k_neighbors, random_state=random_state)
    return NoResampler(random_state=random_state)
