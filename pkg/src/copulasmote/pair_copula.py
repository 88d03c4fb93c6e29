"""Bivariate copula families with rotations, h-functions, and BIC-based fitting.

Six families are supported: independence, Gaussian, Student-t, Clayton,
Gumbel, and Frank.  Clayton and Gumbel are tail-asymmetric and only cover
positive dependence in their base form, so they may additionally be rotated
by 90, 180, or 270 degrees.  Rotation is a deterministic remapping of the
arguments; with ``(u, v)`` in the unit square the rotated densities are

    c_90(u, v)  = c(v, 1 - u)
    c_180(u, v) = c(1 - u, 1 - v)
    c_270(u, v) = c(1 - v, u)

and the corresponding CDFs are

    C_90(u, v)  = v - C(v, 1 - u)
    C_180(u, v) = u + v - 1 + C(1 - u, 1 - v)
    C_270(u, v) = u - C(1 - v, u)

Rotations 90 and 270 flip the sign of Kendall's tau; 180 preserves it.

The h-function is the conditional distribution obtained by differentiating
the copula with respect to its second argument::

    h(u | v) = d C(u, v) / d v = P(U <= u | V = v)

``h_function``/``inverse_h_function`` operate on that slot.  The opposite
conditional (of the second argument given the first) is obtained through
``transpose_spec``: every base family here is exchangeable, so transposition
only swaps the 90 and 270 rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from types import SimpleNamespace

import numpy as np
from scipy import integrate, optimize, special, stats

from ._validation import (
    UNIFORM_EPS,
    InvalidInputError,
    InvalidSpecError,
    NumericFailureError,
    UnattainableTauError,
    check_paired_lengths,
    check_uniform,
)

__all__ = [
    "CopulaFamily",
    "PairCopulaSpec",
    "DEFAULT_FAMILY_LIBRARY",
    "copula_cdf",
    "log_density",
    "h_function",
    "inverse_h_function",
    "transpose_spec",
    "tau_to_parameter",
    "parameter_to_tau",
    "empirical_kendall_tau",
    "fit_pair_copula",
]


class CopulaFamily(str, Enum):
    INDEPENDENCE = "independence"
    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"

    @classmethod
    def coerce(cls, value) -> "CopulaFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise InvalidSpecError(f"unknown copula family {value!r}; expected one of {names}") from None


DEFAULT_FAMILY_LIBRARY = (
    CopulaFamily.INDEPENDENCE,
    CopulaFamily.GAUSSIAN,
    CopulaFamily.STUDENT_T,
    CopulaFamily.CLAYTON,
    CopulaFamily.GUMBEL,
    CopulaFamily.FRANK,
)

ROTATIONS = (0, 90, 180, 270)

# Parameter boxes.  Bounds keep every likelihood evaluation finite in float64
# while covering Kendall's tau nearly up to +/-1.
RHO_MAX = 0.9995
NU_MIN, NU_MAX = 2.0, 30.0
CLAYTON_MIN, CLAYTON_MAX = 1e-4, 28.0
GUMBEL_MIN, GUMBEL_MAX = 1.0, 17.0
FRANK_MIN_ABS, FRANK_MAX_ABS = 1e-4, 35.0

_N_PARAMS = {
    CopulaFamily.INDEPENDENCE: 0,
    CopulaFamily.GAUSSIAN: 1,
    CopulaFamily.STUDENT_T: 2,
    CopulaFamily.CLAYTON: 1,
    CopulaFamily.GUMBEL: 1,
    CopulaFamily.FRANK: 1,
}

_ROTATABLE = frozenset({CopulaFamily.CLAYTON, CopulaFamily.GUMBEL})

# Transposing C(u, v) -> C(v, u) swaps which margin a rotation cuts into.
_TRANSPOSED_ROTATION = {0: 0, 90: 270, 180: 180, 270: 90}

_BISECT_MAX_STEPS = 200
_BISECT_TOL = 1e-8
_MLE_XATOL = 1e-8
_MLE_MAXITER = 200
_NU_GRID_SIZE = 8
_BIG = 1e300


@dataclass(frozen=True)
class PairCopulaSpec:
    """A fitted (or hand-built) bivariate copula.

    Parameters
    ----------
    family : CopulaFamily or str
    rotation : int
        One of 0, 90, 180, 270; nonzero only for Clayton and Gumbel.
    params : tuple of float
        ``()`` for independence, ``(rho,)`` for Gaussian, ``(rho, nu)`` for
        Student-t, ``(theta,)`` for Clayton/Gumbel/Frank.
    loglik, bic, n_obs : float, float, int
        Fit metadata; zero for specs built by hand.
    flags : tuple of str
        Diagnostic markers accumulated during fitting.
    """

    family: CopulaFamily
    rotation: int = 0
    params: tuple = ()
    loglik: float = 0.0
    bic: float = 0.0
    n_obs: int = 0
    flags: tuple = field(default=())

    def __post_init__(self):
        family = CopulaFamily.coerce(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "flags", tuple(self.flags))
        if self.rotation not in ROTATIONS:
            raise InvalidSpecError(f"rotation must be one of {ROTATIONS}, got {self.rotation}")
        if self.rotation != 0 and family not in _ROTATABLE:
            raise InvalidSpecError(f"family {family.value} does not admit rotation {self.rotation}")
        if len(self.params) != _N_PARAMS[family]:
            raise InvalidSpecError(
                f"family {family.value} takes {_N_PARAMS[family]} parameter(s), got {len(self.params)}"
            )
        self._check_bounds()
        if not (math.isfinite(self.loglik) and math.isfinite(self.bic)):
            raise InvalidSpecError("loglik and bic must be finite")

    def _check_bounds(self):
        f, p = self.family, self.params
        if f is CopulaFamily.GAUSSIAN or f is CopulaFamily.STUDENT_T:
            rho = p[0]
            if not -1.0 < rho < 1.0:
                raise InvalidSpecError(f"rho must lie in (-1, 1), got {rho}")
        if f is CopulaFamily.STUDENT_T:
            nu = p[1]
            if not NU_MIN <= nu <= NU_MAX:
                raise InvalidSpecError(f"nu must lie in [{NU_MIN}, {NU_MAX}], got {nu}")
        if f is CopulaFamily.CLAYTON:
            if not 0.0 < p[0] <= CLAYTON_MAX:
                raise InvalidSpecError(f"Clayton theta must lie in (0, {CLAYTON_MAX}], got {p[0]}")
        if f is CopulaFamily.GUMBEL:
            if not GUMBEL_MIN <= p[0] <= GUMBEL_MAX:
                raise InvalidSpecError(f"Gumbel theta must lie in [{GUMBEL_MIN}, {GUMBEL_MAX}], got {p[0]}")
        if f is CopulaFamily.FRANK:
            if p[0] == 0.0 or abs(p[0]) > FRANK_MAX_ABS:
                raise InvalidSpecError(
                    f"Frank theta must lie in [-{FRANK_MAX_ABS}, {FRANK_MAX_ABS}] excluding 0, got {p[0]}"
                )

    @property
    def n_params(self) -> int:
        return _N_PARAMS[self.family]

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "rotation": self.rotation,
            "params": list(self.params),
            "loglik": self.loglik,
            "bic": self.bic,
            "n_obs": self.n_obs,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PairCopulaSpec":
        return cls(
            family=d["family"],
            rotation=int(d.get("rotation", 0)),
            params=tuple(d.get("params", ())),
            loglik=float(d.get("loglik", 0.0)),
            bic=float(d.get("bic", 0.0)),
            n_obs=int(d.get("n_obs", 0)),
            flags=tuple(d.get("flags", ())),
        )


def transpose_spec(spec: PairCopulaSpec) -> PairCopulaSpec:
    """Spec of the transposed copula C'(u, v) = C(v, u).

    All base families are exchangeable, so only the 90/270 rotations swap.
    Use this to evaluate the conditional of the second argument given the
    first: ``P(V <= v | U = u) = h_function(transpose_spec(s), v, u)``.
    """
    rot = _TRANSPOSED_ROTATION[spec.rotation]
    if rot == spec.rotation:
        return spec
    return replace(spec, rotation=rot)


# ---------------------------------------------------------------------------
# Base-family surfaces (rotation 0).  All take clamped arrays.
# ---------------------------------------------------------------------------

def _indep_cdf(u, v):
    return u * v


def _indep_logpdf(u, v):
    return np.zeros(np.broadcast(u, v).shape)


def _indep_h2(u, v):
    return u * np.ones_like(v)


def _indep_hinv2(p, v):
    return p * np.ones_like(v)


def _gauss_cdf(u, v, rho):
    # Single-integral representation along the correlation path:
    # C(u, v; rho) = u v + (2 pi)^-1 int_0^rho exp(-(x^2 - 2 t x y + y^2)
    #                / (2 (1 - t^2))) / sqrt(1 - t^2) dt
    x = special.ndtri(u)
    y = special.ndtri(v)

    def one(xi, yi):
        if rho == 0.0:
            return 0.0
        f = lambda t: math.exp(-(xi * xi - 2 * t * xi * yi + yi * yi) / (2 * (1 - t * t))) / math.sqrt(1 - t * t)
        val, _ = integrate.quad(f, 0.0, rho, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val / (2.0 * math.pi)

    corr = np.vectorize(one)(x, y)
    return np.clip(u * v + corr, 0.0, 1.0)


def _gauss_logpdf(u, v, rho):
    x = special.ndtri(u)
    y = special.ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gauss_h2(u, v, rho):
    x = special.ndtri(u)
    y = special.ndtri(v)
    return special.ndtr((x - rho * y) / math.sqrt(1.0 - rho * rho))


def _gauss_hinv2(p, v, rho):
    y = special.ndtri(v)
    return special.ndtr(rho * y + math.sqrt(1.0 - rho * rho) * special.ndtri(p))


def _t_quantile(u, nu):
    return special.stdtrit(nu, u)


def _t_cdf(u, v, rho, nu):
    # Condition on the second coordinate and integrate the conditional CDF:
    # C(u, v) = int_{-inf}^{y} f_nu(s) T_{nu+1}(q(s)) ds
    x = _t_quantile(u, nu)
    y = _t_quantile(v, nu)
    r2 = 1.0 - rho * rho
    logk = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)

    def one(xi, yi):
        def f(s):
            dens = math.exp(logk - (nu + 1) / 2 * math.log1p(s * s / nu))
            q = (xi - rho * s) * math.sqrt((nu + 1.0) / ((nu + s * s) * r2))
            return dens * special.stdtr(nu + 1.0, q)

        val, _ = integrate.quad(f, -np.inf, yi, epsabs=1e-11, epsrel=1e-10, limit=200)
        return val

    return np.clip(np.vectorize(one)(x, y), 0.0, 1.0)


def _t_logpdf(u, v, rho, nu):
    x = _t_quantile(u, nu)
    y = _t_quantile(v, nu)
    r2 = 1.0 - rho * rho
    q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2)
    return (
        math.lgamma((nu + 2.0) / 2.0)
        + math.lgamma(nu / 2.0)
        - 2.0 * math.lgamma((nu + 1.0) / 2.0)
        - 0.5 * math.log(r2)
        + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        - (nu + 2.0) / 2.0 * np.log1p(q)
    )


def _t_h2(u, v, rho, nu):
    x = _t_quantile(u, nu)
    y = _t_quantile(v, nu)
    scale = np.sqrt((nu + 1.0) / ((nu + y * y) * (1.0 - rho * rho)))
    return special.stdtr(nu + 1.0, (x - rho * y) * scale)


def _t_hinv2(p, v, rho, nu):
    y = _t_quantile(v, nu)
    scale = np.sqrt((nu + 1.0) / ((nu + y * y) * (1.0 - rho * rho)))
    x = special.stdtrit(nu + 1.0, p) / scale + rho * y
    return special.stdtr(nu, x)


def _clayton_cdf(u, v, theta):
    s = u ** -theta + v ** -theta - 1.0
    return s ** (-1.0 / theta)


def _clayton_logpdf(u, v, theta):
    s = u ** -theta + v ** -theta - 1.0
    return np.log1p(theta) - (1.0 + theta) * (np.log(u) + np.log(v)) - (2.0 + 1.0 / theta) * np.log(s)


def _clayton_h2(u, v, theta):
    s = u ** -theta + v ** -theta - 1.0
    return v ** (-theta - 1.0) * s ** (-1.0 / theta - 1.0)


def _clayton_hinv2(p, v, theta):
    s = (p * v ** (theta + 1.0)) ** (-theta / (theta + 1.0))
    return (s - v ** -theta + 1.0) ** (-1.0 / theta)


def _gumbel_cdf(u, v, theta):
    s = (-np.log(u)) ** theta + (-np.log(v)) ** theta
    return np.exp(-(s ** (1.0 / theta)))


def _gumbel_logpdf(u, v, theta):
    lu = -np.log(u)
    lv = -np.log(v)
    s = lu ** theta + lv ** theta
    w = s ** (1.0 / theta)
    return (
        -w
        + (theta - 1.0) * (np.log(lu) + np.log(lv))
        + (2.0 / theta - 2.0) * np.log(s)
        - np.log(u)
        - np.log(v)
        + np.log1p((theta - 1.0) / w)
    )


def _gumbel_h2(u, v, theta):
    lu = -np.log(u)
    lv = -np.log(v)
    s = lu ** theta + lv ** theta
    return np.exp(-(s ** (1.0 / theta))) * s ** (1.0 / theta - 1.0) * lv ** (theta - 1.0) / v


def _gumbel_hinv2(p, v, theta):
    # No closed form; h2 is strictly increasing in u, so bisect.
    p = np.asarray(p, dtype=np.float64)
    v = np.broadcast_to(np.asarray(v, dtype=np.float64), p.shape).copy()
    lo = np.full_like(p, UNIFORM_EPS)
    hi = np.full_like(p, 1.0 - UNIFORM_EPS)
    u = 0.5 * (lo + hi)
    for _ in range(_BISECT_MAX_STEPS):
        r = _gumbel_h2(u, v, theta) - p
        if np.max(np.abs(r)) < _BISECT_TOL:
            return u
        high = r > 0.0
        hi = np.where(high, u, hi)
        lo = np.where(high, lo, u)
        u = 0.5 * (lo + hi)
    # Residuals at the clamped domain ends are expected: h(1e-10 | v) > p has
    # no root inside the box and the boundary value is the correct answer.
    r = _gumbel_h2(u, v, theta) - p
    interior = (u > 2.0 * UNIFORM_EPS) & (u < 1.0 - 2.0 * UNIFORM_EPS)
    if np.any(np.abs(r[interior]) >= _BISECT_TOL):
        raise NumericFailureError(
            f"inverse h-function bisection did not converge after {_BISECT_MAX_STEPS} steps"
        )
    return u


def _frank_cdf(u, v, theta):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    gt = math.expm1(-theta)
    return -np.log1p(gu * gv / gt) / theta


def _frank_logpdf(u, v, theta):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    gt = math.expm1(-theta)
    d = gt + gu * gv
    return math.log(abs(theta)) + math.log(abs(gt)) - theta * (u + v) - 2.0 * np.log(np.abs(d))


def _frank_h2(u, v, theta):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    gt = math.expm1(-theta)
    return gu * (1.0 + gv) / (gt + gu * gv)


def _frank_hinv2(p, v, theta):
    gv = np.expm1(-theta * v)
    gt = math.expm1(-theta)
    return -np.log1p(p * gt / (1.0 + (1.0 - p) * gv)) / theta


_BASE = {
    CopulaFamily.INDEPENDENCE: SimpleNamespace(
        cdf=lambda u, v, p: _indep_cdf(u, v),
        logpdf=lambda u, v, p: _indep_logpdf(u, v),
        h2=lambda u, v, p: _indep_h2(u, v),
        hinv2=lambda q, v, p: _indep_hinv2(q, v),
    ),
    CopulaFamily.GAUSSIAN: SimpleNamespace(
        cdf=lambda u, v, p: _gauss_cdf(u, v, p[0]),
        logpdf=lambda u, v, p: _gauss_logpdf(u, v, p[0]),
        h2=lambda u, v, p: _gauss_h2(u, v, p[0]),
        hinv2=lambda q, v, p: _gauss_hinv2(q, v, p[0]),
    ),
    CopulaFamily.STUDENT_T: SimpleNamespace(
        cdf=lambda u, v, p: _t_cdf(u, v, p[0], p[1]),
        logpdf=lambda u, v, p: _t_logpdf(u, v, p[0], p[1]),
        h2=lambda u, v, p: _t_h2(u, v, p[0], p[1]),
        hinv2=lambda q, v, p: _t_hinv2(q, v, p[0], p[1]),
    ),
    CopulaFamily.CLAYTON: SimpleNamespace(
        cdf=lambda u, v, p: _clayton_cdf(u, v, p[0]),
        logpdf=lambda u, v, p: _clayton_logpdf(u, v, p[0]),
        h2=lambda u, v, p: _clayton_h2(u, v, p[0]),
        hinv2=lambda q, v, p: _clayton_hinv2(q, v, p[0]),
    ),
    CopulaFamily.GUMBEL: SimpleNamespace(
        cdf=lambda u, v, p: _gumbel_cdf(u, v, p[0]),
        logpdf=lambda u, v, p: _gumbel_logpdf(u, v, p[0]),
        h2=lambda u, v, p: _gumbel_h2(u, v, p[0]),
        hinv2=lambda q, v, p: _gumbel_hinv2(q, v, p[0]),
    ),
    CopulaFamily.FRANK: SimpleNamespace(
        cdf=lambda u, v, p: _frank_cdf(u, v, p[0]),
        logpdf=lambda u, v, p: _frank_logpdf(u, v, p[0]),
        h2=lambda u, v, p: _frank_h2(u, v, p[0]),
        hinv2=lambda q, v, p: _frank_hinv2(q, v, p[0]),
    ),
}


def _clamp(u):
    return np.clip(u, UNIFORM_EPS, 1.0 - UNIFORM_EPS)


# ---------------------------------------------------------------------------
# Rotation-aware public surfaces
# ---------------------------------------------------------------------------

def copula_cdf(spec: PairCopulaSpec, u, v):
    """Copula CDF C(u, v), rotation applied.

    A diagnostic surface: fitting, h-transforms and sampling never call it.
    The Gaussian and Student-t cases use deterministic one-dimensional
    quadrature, so results are reproducible bit for bit.
    """
    u, v = check_paired_lengths(u, v)
    lo, hi = UNIFORM_EPS, 1.0 - UNIFORM_EPS
    # uniform-margin identities handled exactly; keeps quadrature off the edges
    at_edge = (u <= lo) | (u >= hi) | (v <= lo) | (v >= hi)
    ui = np.where(at_edge, 0.5, u)
    vi = np.where(at_edge, 0.5, v)
    base = _BASE[spec.family]
    p = spec.params
    rot = spec.rotation
    if rot == 0:
        out = base.cdf(ui, vi, p)
    elif rot == 90:
        out = vi - base.cdf(vi, _clamp(1.0 - ui), p)
    elif rot == 180:
        out = ui + vi - 1.0 + base.cdf(_clamp(1.0 - ui), _clamp(1.0 - vi), p)
    else:
        out = ui - base.cdf(_clamp(1.0 - vi), ui, p)
    out = np.where(u >= hi, v, out)
    out = np.where(v >= hi, u, out)
    out = np.where((u >= hi) & (v >= hi), 1.0, out)
    out = np.where((u <= lo) | (v <= lo), 0.0, out)
    return np.clip(out, 0.0, 1.0)


def log_density(spec: PairCopulaSpec, u, v):
    """Log copula density log c(u, v), rotation applied."""
    u, v = check_paired_lengths(u, v)
    base = _BASE[spec.family]
    p = spec.params
    rot = spec.rotation
    if rot == 0:
        return base.logpdf(u, v, p)
    if rot == 90:
        return base.logpdf(v, _clamp(1.0 - u), p)
    if rot == 180:
        return base.logpdf(_clamp(1.0 - u), _clamp(1.0 - v), p)
    return base.logpdf(_clamp(1.0 - v), u, p)


def h_function(spec: PairCopulaSpec, u, v):
    """Conditional CDF h(u | v) = dC(u, v)/dv = P(U <= u | V = v).

    Rotated forms follow by differentiating the rotated CDF; base-family
    exchangeability turns every first-slot derivative into a second-slot one.
    """
    u, v = check_paired_lengths(u, v)
    base = _BASE[spec.family]
    p = spec.params
    rot = spec.rotation
    if rot == 0:
        out = base.h2(u, v, p)
    elif rot == 90:
        out = 1.0 - base.h2(_clamp(1.0 - u), v, p)
    elif rot == 180:
        out = 1.0 - base.h2(_clamp(1.0 - u), _clamp(1.0 - v), p)
    else:
        out = base.h2(u, _clamp(1.0 - v), p)
    return _clamp(out)


def inverse_h_function(spec: PairCopulaSpec, p, v):
    """Inverse of ``h_function`` in its first argument: h(u | v) = p."""
    p, v = check_paired_lengths(p, v, names=("p", "v"))
    base = _BASE[spec.family]
    par = spec.params
    rot = spec.rotation
    if rot == 0:
        out = base.hinv2(p, v, par)
    elif rot == 90:
        out = 1.0 - base.hinv2(1.0 - p, v, par)
    elif rot == 180:
        out = 1.0 - base.hinv2(1.0 - p, _clamp(1.0 - v), par)
    else:
        out = base.hinv2(p, _clamp(1.0 - v), par)
    return _clamp(out)


# ---------------------------------------------------------------------------
# Kendall's tau
# ---------------------------------------------------------------------------

def empirical_kendall_tau(x, y):
    """Sample Kendall's tau-b.

    Returns
    -------
    tau : float
    degenerate : bool
        True when either input is constant; tau is then reported as 0.0
        rather than NaN.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise InvalidInputError("x and y must be 1-d arrays of equal length")
    if x.size < 2:
        raise InvalidInputError("need at least two observations for Kendall's tau")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return 0.0, True
    tau = stats.kendalltau(x, y).statistic
    if not np.isfinite(tau):
        return 0.0, True
    return float(tau), False


def _frank_tau_of_theta(theta: float) -> float:
    # tau(theta) = 1 - 4/theta + 4 D1(theta)/theta with the Debye function
    # D1(t) = (1/t) int_0^t s/(e^s - 1) ds; odd in theta.
    if theta == 0.0:
        return 0.0
    d1, _ = integrate.quad(lambda s: s / math.expm1(s) if s != 0 else 1.0, 0.0, abs(theta), limit=200)
    d1 /= abs(theta)
    tau = 1.0 - 4.0 / abs(theta) * (1.0 - d1)
    return math.copysign(tau, theta)


def tau_to_parameter(family, tau: float):
    """Moment-style parameter start from Kendall's tau.

    Values whose magnitude exceeds the family's attainable range are clamped
    to the parameter bound; a tau whose *sign* the (unrotated) family cannot
    produce raises :class:`UnattainableTauError`.
    """
    family = CopulaFamily.coerce(family)
    tau = float(tau)
    if not -1.0 < tau < 1.0:
        raise UnattainableTauError(f"tau must lie in (-1, 1), got {tau}")
    if family is CopulaFamily.INDEPENDENCE:
        return ()
    if family is CopulaFamily.GAUSSIAN:
        rho = math.sin(math.pi * tau / 2.0)
        return (float(np.clip(rho, -RHO_MAX, RHO_MAX)),)
    if family is CopulaFamily.STUDENT_T:
        rho = math.sin(math.pi * tau / 2.0)
        return (float(np.clip(rho, -RHO_MAX, RHO_MAX)), 5.0)
    if family is CopulaFamily.CLAYTON:
        if tau <= 0.0:
            raise UnattainableTauError(f"Clayton requires tau > 0, got {tau}")
        return (float(np.clip(2.0 * tau / (1.0 - tau), CLAYTON_MIN, CLAYTON_MAX)),)
    if family is CopulaFamily.GUMBEL:
        if tau < 0.0:
            raise UnattainableTauError(f"Gumbel requires tau >= 0, got {tau}")
        return (float(np.clip(1.0 / (1.0 - tau), GUMBEL_MIN, GUMBEL_MAX)),)
    # Frank: invert the Debye relation with a bracketing solver.
    if tau == 0.0:
        return (FRANK_MIN_ABS,)
    a = abs(tau)
    if a >= _frank_tau_of_theta(FRANK_MAX_ABS):
        theta = FRANK_MAX_ABS
    else:
        theta = optimize.brentq(lambda t: _frank_tau_of_theta(t) - a, 1e-8, FRANK_MAX_ABS, xtol=1e-10)
        theta = max(theta, FRANK_MIN_ABS)
    return (math.copysign(theta, tau),)


def parameter_to_tau(spec: PairCopulaSpec) -> float:
    """Analytic Kendall's tau implied by a spec (rotation sign included)."""
    f, p = spec.family, spec.params
    if f is CopulaFamily.INDEPENDENCE:
        return 0.0
    if f in (CopulaFamily.GAUSSIAN, CopulaFamily.STUDENT_T):
        tau = 2.0 / math.pi * math.asin(p[0])
    elif f is CopulaFamily.CLAYTON:
        tau = p[0] / (p[0] + 2.0)
    elif f is CopulaFamily.GUMBEL:
        tau = 1.0 - 1.0 / p[0]
    else:
        tau = _frank_tau_of_theta(p[0])
    if spec.rotation in (90, 270):
        tau = -tau
    return tau


# ---------------------------------------------------------------------------
# Maximum-likelihood fitting with BIC family selection
# ---------------------------------------------------------------------------

def _optimize_1d(negloglik, lo, hi, init=None):
    res = optimize.minimize_scalar(
        negloglik, bounds=(lo, hi), method="bounded",
        options={"xatol": _MLE_XATOL, "maxiter": _MLE_MAXITER},
    )
    best_x, best_f = float(res.x), float(res.fun)
    if init is not None and lo <= init <= hi:
        f0 = float(negloglik(init))
        if f0 < best_f:
            best_x, best_f = float(init), f0
    return best_x, best_f


def _safe_nll(logpdf_values):
    total = float(np.sum(logpdf_values))
    if not math.isfinite(total):
        return _BIG
    return -total


def _fit_gaussian(u, v, tau):
    x = special.ndtri(u)
    y = special.ndtri(v)
    sxx = float(np.sum(x * x) + np.sum(y * y))
    sxy = float(np.sum(x * y))
    n = u.size

    def nll(rho):
        r2 = 1.0 - rho * rho
        ll = -0.5 * n * math.log(r2) - (rho * rho * sxx - 2.0 * rho * sxy) / (2.0 * r2)
        return -ll if math.isfinite(ll) else _BIG

    init = tau_to_parameter(CopulaFamily.GAUSSIAN, tau)[0]
    rho, f = _optimize_1d(nll, -RHO_MAX, RHO_MAX, init)
    return (rho,), -f


def _fit_student(u, v, tau):
    rho0 = tau_to_parameter(CopulaFamily.STUDENT_T, tau)[0]

    def profile(nu):
        x = _t_quantile(u, nu)
        y = _t_quantile(v, nu)

        def nll(rho):
            return _safe_nll(_t_logpdf_from_scores(x, y, rho, nu))

        rho, f = _optimize_1d(nll, -RHO_MAX, RHO_MAX, rho0)
        return rho, f

    grid = np.geomspace(NU_MIN, NU_MAX, _NU_GRID_SIZE)
    evals = [profile(nu) for nu in grid]
    best_i = int(np.argmin([f for _, f in evals]))
    lo = grid[max(best_i - 1, 0)]
    hi = grid[min(best_i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(
        lambda nu: profile(nu)[1], bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-2, "maxiter": 50},
    )
    nu = float(res.x)
    rho, f = profile(nu)
    if f > evals[best_i][1]:
        nu = float(grid[best_i])
        rho, f = evals[best_i]
    return (rho, nu), -f


def _t_logpdf_from_scores(x, y, rho, nu):
    r2 = 1.0 - rho * rho
    q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2)
    return (
        math.lgamma((nu + 2.0) / 2.0)
        + math.lgamma(nu / 2.0)
        - 2.0 * math.lgamma((nu + 1.0) / 2.0)
        - 0.5 * math.log(r2)
        + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        - (nu + 2.0) / 2.0 * np.log1p(q)
    )


_ROTATION_MAPS = {
    0: lambda u, v: (u, v),
    90: lambda u, v: (v, _clamp(1.0 - u)),
    180: lambda u, v: (_clamp(1.0 - u), _clamp(1.0 - v)),
    270: lambda u, v: (_clamp(1.0 - v), u),
}


def _fit_archimedean(family, u, v, tau, rotation):
    a, b = _ROTATION_MAPS[rotation](u, v)
    base = _BASE[family]
    if family is CopulaFamily.CLAYTON:
        lo, hi = CLAYTON_MIN, CLAYTON_MAX
    else:
        lo, hi = GUMBEL_MIN, GUMBEL_MAX
    init = tau_to_parameter(family, abs(tau))[0] if abs(tau) > 0 else lo

    def nll(theta):
        return _safe_nll(base.logpdf(a, b, (theta,)))

    theta, f = _optimize_1d(nll, lo, hi, init)
    return (theta,), -f


def _fit_frank(u, v, tau):
    init = tau_to_parameter(CopulaFamily.FRANK, tau)[0]

    def nll(theta):
        if theta == 0.0:
            theta = FRANK_MIN_ABS
        return _safe_nll(_frank_logpdf(u, v, theta))

    theta, f = _optimize_1d(nll, -FRANK_MAX_ABS, FRANK_MAX_ABS, init)
    if abs(theta) < FRANK_MIN_ABS:
        theta = math.copysign(FRANK_MIN_ABS, theta if theta != 0 else 1.0)
        f = nll(theta)
    return (theta,), -f


def _normalize_library(family_library, tau):
    """Expand library entries to (family, rotations, library_index).

    Entries may be family names/values (rotations then chosen by the sign of
    the sample tau: 0/180 for positive dependence, 90/270 for negative) or
    explicit ``(family, rotation)`` pairs, honored as given.
    """
    entries = []
    for idx, item in enumerate(family_library):
        if isinstance(item, (tuple, list)) and len(item) == 2 and not isinstance(item[1], str):
            family = CopulaFamily.coerce(item[0])
            rot = int(item[1])
            if rot not in ROTATIONS:
                raise InvalidSpecError(f"rotation must be one of {ROTATIONS}, got {rot}")
            if rot != 0 and family not in _ROTATABLE:
                raise InvalidSpecError(f"family {family.value} does not admit rotation {rot}")
            entries.append((family, (rot,), idx))
        else:
            family = CopulaFamily.coerce(item)
            if family in _ROTATABLE:
                rots = (0, 180) if tau >= 0.0 else (90, 270)
            else:
                rots = (0,)
            entries.append((family, rots, idx))
    return entries


def fit_pair_copula(u, v, family_library=DEFAULT_FAMILY_LIBRARY) -> PairCopulaSpec:
    """Fit the best bivariate copula by BIC over a family library.

    Each family's parameters are estimated by bounded scalar maximum
    likelihood started from the Kendall-tau moment inversion; Student-t adds
    a profiled degrees-of-freedom grid with bounded refinement.  Clayton and
    Gumbel are tried in the rotations whose dependence sign matches the
    sample tau (explicit ``(family, rotation)`` library entries override
    that choice).  Candidates are compared by BIC = k ln(n) - 2 loglik;
    ties break toward independence, then fewer parameters, then library
    order.  A candidate whose likelihood degenerates is skipped with a
    diagnostic flag; if nothing survives, independence is returned flagged.

    Parameters
    ----------
    u, v : array-like
        Same-length samples in [0, 1]; at least 10 observations.
    family_library : sequence
        Family names/values or explicit ``(family, rotation)`` pairs.

    Returns
    -------
    PairCopulaSpec
    """
    u, v = check_paired_lengths(u, v)
    n = u.size
    if n < 10:
        raise InvalidInputError(f"need at least 10 observations to fit a pair copula, got {n}")
    if not len(family_library):
        raise InvalidInputError("family_library must not be empty")

    tau, tau_degenerate = empirical_kendall_tau(u, v)
    flags = ["degenerate_tau"] if tau_degenerate else []
    log_n = math.log(n)

    # (bic, indep_last, n_params, library_index, rotation_index) -> spec
    candidates = []
    for family, rotations, lib_idx in _normalize_library(family_library, tau):
        if family is CopulaFamily.INDEPENDENCE:
            candidates.append(((0.0, 0, 0, lib_idx, 0), (family, 0, (), 0.0, 0.0)))
            continue
        for rot_idx, rot in enumerate(rotations):
            try:
                if family is CopulaFamily.GAUSSIAN:
                    params, loglik = _fit_gaussian(u, v, tau)
                elif family is CopulaFamily.STUDENT_T:
                    params, loglik = _fit_student(u, v, tau)
                elif family is CopulaFamily.FRANK:
                    params, loglik = _fit_frank(u, v, tau)
                else:
                    params, loglik = _fit_archimedean(family, u, v, tau, rot)
            except (ArithmeticError, NumericFailureError, UnattainableTauError):
                loglik = math.nan
                params = ()
            if not math.isfinite(loglik) or abs(loglik) >= _BIG:
                flags.append(f"fit_failed_{family.value}_{rot}")
                continue
            k = _N_PARAMS[family]
            bic = k * log_n - 2.0 * loglik
            candidates.append(((bic, 1, k, lib_idx, rot_idx), (family, rot, params, loglik, bic)))

    if not candidates:
        flags.append("fit_fallback_independence")
        return PairCopulaSpec(CopulaFamily.INDEPENDENCE, 0, (), 0.0, 0.0, n, tuple(flags))
    candidates.sort(key=lambda c: c[0])
    family, rot, params, loglik, bic = candidates[0][1]
    return PairCopulaSpec(family, rot, params, loglik, bic, n, tuple(flags))
