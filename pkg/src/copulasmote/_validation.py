"""Input validation helpers and the package exception hierarchy."""

from __future__ import annotations

import numpy as np

# Uniform inputs are clamped to this open interval before any copula math so
# that logs, quantiles and power transforms stay finite.
UNIFORM_EPS = 1e-10


class CopulaSmoteError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(CopulaSmoteError, ValueError):
    """Raised when user-supplied data violates an operation's requirements."""


class InvalidSpecError(CopulaSmoteError, ValueError):
    """Raised when a parametric specification is internally inconsistent."""


class NumericFailureError(CopulaSmoteError, RuntimeError):
    """Raised when an iterative numeric routine cannot produce a finite result."""


class UnattainableTauError(CopulaSmoteError, ValueError):
    """Raised when a rank correlation lies outside a family's attainable range."""


class GlobalMissingColumnError(CopulaSmoteError, ValueError):
    """Raised when a zero-coded column has no observed value to impute from."""


class MissingResultError(CopulaSmoteError, KeyError):
    """Raised when a paired comparison references folds that were never run."""


def as_float_array(x, name: str, *, ndim: int | None = None):
    """Coerce ``x`` to a float64 ndarray and check finiteness.

    Parameters
    ----------
    x : array-like
        Input values.
    name : str
        Argument name used in error messages.
    ndim : int, optional
        Required number of dimensions.

    Returns
    -------
    numpy.ndarray
    """
    try:
        arr = np.asarray(x, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} is not numeric: {exc}") from None
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_uniform(u, name: str = "u"):
    """Validate values in [0, 1] and clamp into the open unit interval."""
    arr = as_float_array(u, name)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise InvalidInputError(f"{name} must lie in [0, 1]")
    return np.clip(arr, UNIFORM_EPS, 1.0 - UNIFORM_EPS)


def check_matrix(x, name: str = "X"):
    """Validate a 2-D finite float matrix with at least one row and column."""
    arr = as_float_array(x, name, ndim=2)
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be non-empty, got shape {arr.shape}")
    return arr


def check_paired_lengths(u, v, names=("u", "v")):
    """Validate two same-length 1-D uniform arrays, returning clamped copies."""
    a = check_uniform(u, names[0])
    b = check_uniform(v, names[1])
    if a.shape != b.shape:
        raise InvalidInputError(
            f"{names[0]} and {names[1]} must have equal shapes, got {a.shape} and {b.shape}"
        )
    return a, b


def check_labels(y, n_rows: int | None = None, name: str = "y"):
    """Validate a 1-D label vector, optionally matching a row count."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise InvalidInputError(
            f"{name} has {arr.shape[0]} entries but X has {n_rows} rows"
        )
    return arr


def check_random_state(seed):
    """Return a numpy Generator from a seed, Generator, or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
