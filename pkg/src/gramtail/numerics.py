"""Special functions and a derivative-free minimizer.

Everything the distribution code needs that is not basic arithmetic lives
here: log-gamma, the upper incomplete gamma function (including negative
non-integer order, which no widely used library exposes directly), the
complementary error function, and a small simplex-minimizer front end.

Log-space variants are provided wherever the plain value can underflow
(upper incomplete gamma at large x, erfc at large positive argument);
likelihood code works in log space throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.special as sp

from .errors import DomainError, NumericsError

# Switch-over points for the incomplete-gamma branches.  Above
# _ASYMPTOTIC_X the value underflows in double precision and the
# asymptotic series is both necessary and highly accurate; below
# _RECURRENCE_X the downward recurrence loses no precision because the
# cancellation factor x^m / m! stays far below 1.
_ASYMPTOTIC_X = 700.0
_RECURRENCE_X = 1.5
_CF_MAX_ITER = 600
_CF_EPS = 3e-16


def log_gamma(x):
    """Natural log of the gamma function for x > 0.

    Accepts scalars or arrays.  Raises :class:`DomainError` for
    non-positive or non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")
    out = sp.gammaln(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def erfc(x):
    """Complementary error function; scalars or arrays, finite input only."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"erfc requires finite input, got {x!r}")
    out = sp.erfc(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def log_erfc(x):
    """ln erfc(x), stable for large positive x where erfc underflows.

    Uses the scaled function erfcx: ln erfc(x) = ln erfcx(x) - x^2 for
    x >= 0; plain log elsewhere (erfc is in (1, 2] there).
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"log_erfc requires finite input, got {x!r}")
    pos = arr >= 0.0
    out = np.empty_like(arr)
    out[pos] = np.log(sp.erfcx(arr[pos])) - arr[pos] * arr[pos]
    out[~pos] = np.log(sp.erfc(arr[~pos]))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _log_gamma_asymptotic(s, x):
    # Gamma(s, x) = x^(s-1) e^(-x) [1 + (s-1)/x + (s-1)(s-2)/x^2 + ...];
    # for x > _ASYMPTOTIC_X >> |s| the series reaches machine precision
    # long before its asymptotic divergence.
    total = 1.0
    term = 1.0
    for k in range(1, 200):
        new = term * (s - k) / x
        if abs(new) >= abs(term):
            break
        term = new
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    if total <= 0.0:
        raise NumericsError(f"asymptotic series failed for Gamma({s}, {x})")
    return (s - 1.0) * math.log(x) - x + math.log(total)


def _log_gamma_cf(s, x):
    # Legendre continued fraction (modified Lentz).  Converges for
    # x > s + 1; with s <= 0 that covers all x >= _RECURRENCE_X.
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    else:
        raise NumericsError(f"continued fraction did not converge for Gamma({s}, {x})")
    if h <= 0.0:
        raise NumericsError(f"continued fraction lost positivity for Gamma({s}, {x})")
    return s * math.log(x) - x + math.log(h)


def _log_gamma_positive(s, x):
    # s > 0, moderate x: scipy's regularized Q is accurate; recover the
    # unregularized value through log-gamma.
    q = sp.gammaincc(s, x)
    if q > 0.0:
        return sp.gammaln(s) + math.log(q)
    return _log_gamma_asymptotic(s, x)


def _scaled_recurrence(s, x):
    # Downward recurrence in the scaled variable h(t) = Gamma(t, x) x^(1-t) e^x,
    # which satisfies h(t-1) = x (h(t) - 1) / (t - 1).  Only used for small x
    # where the subtraction cancels no significant digits.
    if s == math.floor(s):
        # integer s <= 0; base case Gamma(0, x) = E1(x)
        t = 0.0
        h = sp.exp1(x) * x * math.exp(x)
    else:
        t = s - math.floor(s)  # in (0, 1)
        log_base = _log_gamma_positive(t, x)
        h = math.exp(log_base + (1.0 - t) * math.log(x) + x)
    while t > s + 0.5:
        h = x * (h - 1.0) / (t - 1.0)
        t -= 1.0
    if h <= 0.0:
        raise NumericsError(f"recurrence lost positivity for Gamma({s}, {x})")
    return math.log(h) + (s - 1.0) * math.log(x) - x


def _check_gamma_args(s, x):
    if not (math.isfinite(s) and math.isfinite(x)):
        raise DomainError(f"incomplete gamma requires finite arguments, got ({s}, {x})")
    if x < 0.0:
        raise DomainError(f"incomplete gamma requires x >= 0, got x={x}")
    if x == 0.0 and s <= 0.0:
        raise DomainError(f"Gamma({s}, 0) diverges for s <= 0")


def log_upper_incomplete_gamma(s, x):
    """ln Gamma(s, x) for real s and x > 0 (x >= 0 when s > 0).

    Branches: scipy's regularized form for s > 0; a continued fraction
    for s <= 0 at moderate-to-large x; a scaled downward recurrence from
    a positive-order base for s <= 0 at small x; an asymptotic series
    once e^(-x) underflows.  Gamma(s, x) is strictly positive for x > 0,
    so the logarithm is always defined.
    """
    s = float(s)
    x = float(x)
    _check_gamma_args(s, x)
    if x == 0.0:
        return sp.gammaln(s)
    if x > _ASYMPTOTIC_X:
        return _log_gamma_asymptotic(s, x)
    if s > 0.0:
        return _log_gamma_positive(s, x)
    if x >= _RECURRENCE_X:
        return _log_gamma_cf(s, x)
    return _scaled_recurrence(s, x)


def upper_incomplete_gamma(s, x):
    """Upper incomplete gamma Gamma(s, x) = integral_x^inf t^(s-1) e^(-t) dt.

    Supports negative non-integer (and integer) s, which arises in the
    normalizer of power laws with an exponential cutoff.  Overflows to
    inf for s < 0 as x -> 0 faster than double range.
    """
    s = float(s)
    x = float(x)
    _check_gamma_args(s, x)
    if x == 0.0:
        return float(np.exp(sp.gammaln(s)))
    if s > 0.0 and x <= _ASYMPTOTIC_X:
        v = sp.gammaincc(s, x) * math.exp(sp.gammaln(s))
        if v > 0.0 and math.isfinite(v):
            return v
    try:
        return math.exp(log_upper_incomplete_gamma(s, x))
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class OptimizerConfig:
    """Simplex-minimizer settings.

    absolute_tolerance bounds both the simplex spread and the objective
    spread at convergence; initial_step scales the initial simplex.
    """

    max_iterations: int = 2000
    absolute_tolerance: float = 1e-9
    initial_step: float = 0.25

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if not self.absolute_tolerance > 0.0:
            raise DomainError("absolute_tolerance must be > 0")
        if not self.initial_step > 0.0:
            raise DomainError("initial_step must be > 0")


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    value: float
    converged: bool
    iterations: int


def _initial_simplex(x0, step):
    k = len(x0)
    simplex = np.tile(x0, (k + 1, 1))
    for i in range(k):
        simplex[i + 1, i] += step * max(abs(x0[i]), 1.0)
    return simplex


def minimize(objective, initial, config: OptimizerConfig | None = None) -> MinimizeResult:
    """Minimize a scalar function of a small vector with Nelder-Mead.

    Deterministic for identical inputs.  Raises :class:`NumericsError`
    when the objective is non-finite on the entire initial simplex;
    returns the best point seen with ``converged=False`` when the
    iteration budget runs out first.
    """
    if config is None:
        config = OptimizerConfig()
    x0 = np.atleast_1d(np.asarray(initial, dtype=float))
    if x0.ndim != 1 or x0.size == 0:
        raise DomainError("initial point must be a non-empty 1-d vector")

    simplex = _initial_simplex(x0, config.initial_step)
    with np.errstate(all="ignore"):
        vertex_values = [objective(v) for v in simplex]
    if not any(np.isfinite(v) for v in vertex_values):
        raise NumericsError("objective is non-finite over the entire initial simplex")

    def guarded(v):
        with np.errstate(all="ignore"):
            val = objective(v)
        return val if np.isfinite(val) else np.inf

    res = scipy.optimize.minimize(
        guarded,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": config.max_iterations,
            "maxfev": 20 * config.max_iterations,
            "xatol": config.absolute_tolerance,
            "fatol": config.absolute_tolerance,
            "initial_simplex": simplex,
            "disp": False,
        },
    )
    return MinimizeResult(
        x=np.asarray(res.x, dtype=float),
        value=float(res.fun),
        converged=bool(res.success),
        iterations=int(res.nit),
    )
