"""Six candidate tail models: density, CDF, likelihood, MLE, sampling.

Every model is normalized on the tail [x_min, inf) in the continuous
convention, or on the integers {ceil(x_min), ceil(x_min)+1, ...} in the
discrete convention.  Each family is defined by its un-normalized kernel
and the closed form of the kernel's tail integral; densities, survival
functions, and discrete normalizers all derive from those two pieces, so
normalization is correct by construction.

Maximum likelihood uses closed forms where they exist (continuous power
law and exponential) and a Nelder-Mead search on transformed parameters
everywhere else.  All likelihood arithmetic is in log space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special as sp

from . import numerics
from .dataset import SizeDataset, as_values
from .errors import DegenerateDataError, DomainError, NumericsError

CONTINUOUS = "continuous"
DISCRETE = "discrete"
_CONVENTIONS = (CONTINUOUS, DISCRETE)

# Discrete normalizers: explicit summation block size, and the point at
# which the remaining tail is replaced by its midpoint-rule integral.
_SUM_BLOCK = 8192
_SUM_MAX_TERMS = 1 << 21
_TABLE_MAX = 1 << 22


class ModelKind(enum.Enum):
    POWER_LAW = "power_law"
    POWER_LAW_CUTOFF = "power_law_cutoff"
    LOG_NORMAL = "log_normal"
    EXPONENTIAL = "exponential"
    STRETCHED_EXPONENTIAL = "stretched_exponential"
    GAMMA = "gamma"


_PARAM_COUNT = {
    ModelKind.POWER_LAW: 1,
    ModelKind.POWER_LAW_CUTOFF: 2,
    ModelKind.LOG_NORMAL: 2,
    ModelKind.EXPONENTIAL: 1,
    ModelKind.STRETCHED_EXPONENTIAL: 2,
    ModelKind.GAMMA: 2,
}

_PARAM_NAMES = {
    ModelKind.POWER_LAW: ("alpha",),
    ModelKind.POWER_LAW_CUTOFF: ("alpha", "lam"),
    ModelKind.LOG_NORMAL: ("mu", "sigma"),
    ModelKind.EXPONENTIAL: ("lam",),
    ModelKind.STRETCHED_EXPONENTIAL: ("lam", "beta"),
    ModelKind.GAMMA: ("k", "theta"),
}

_SHORT_NAMES = {
    ModelKind.POWER_LAW: "PL",
    ModelKind.POWER_LAW_CUTOFF: "PLWC",
    ModelKind.LOG_NORMAL: "LN",
    ModelKind.EXPONENTIAL: "exp",
    ModelKind.STRETCHED_EXPONENTIAL: "str_exp",
    ModelKind.GAMMA: "gamma",
}


def parameter_count(kind: ModelKind) -> int:
    return _PARAM_COUNT[kind]


def parameter_names(kind: ModelKind) -> tuple[str, ...]:
    return _PARAM_NAMES[kind]


def short_name(kind: ModelKind) -> str:
    return _SHORT_NAMES[kind]


def kind_from_name(name: str) -> ModelKind:
    """Resolve a kind from its enum value or table abbreviation."""
    key = name.strip().lower()
    for kind in ModelKind:
        if key in (kind.value, _SHORT_NAMES[kind].lower()):
            return kind
    raise DomainError(f"unknown model kind {name!r}")


@dataclass(frozen=True)
class ModelSpec:
    """One candidate model: kind, parameter vector, tail lower bound.

    ``x_max=None`` is the standard form, normalized on [x_min, inf).
    A finite ``x_max`` restricts the support to [x_min, x_max]; this
    upper-truncated variant is what observed-range candidate
    normalization in the comparison pipeline uses.
    """

    kind: ModelKind
    params: tuple
    x_min: float
    convention: str = CONTINUOUS
    x_max: float | None = None
    converged: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "x_min", float(self.x_min))
        if self.x_max is not None:
            object.__setattr__(self, "x_max", float(self.x_max))
        if self.convention not in _CONVENTIONS:
            raise DomainError(f"convention must be one of {_CONVENTIONS}")
        if len(self.params) != _PARAM_COUNT[self.kind]:
            raise DomainError(
                f"{self.kind.value} takes {_PARAM_COUNT[self.kind]} parameters, "
                f"got {len(self.params)}"
            )
        if not all(math.isfinite(p) for p in self.params) or not math.isfinite(self.x_min):
            raise DomainError("parameters and x_min must be finite")
        if self.x_max is not None:
            if not math.isfinite(self.x_max) or self.x_max <= self.x_min:
                raise DomainError("x_max must be finite and > x_min")
            if self.convention == DISCRETE and math.floor(self.x_max) < self.m_lower:
                raise DomainError("no supported integer in [x_min, x_max]")
        _family(self.kind).check(self.params, self.x_min)

    @property
    def m_lower(self) -> int:
        """First supported integer in the discrete convention."""
        return int(math.ceil(self.x_min))

    @property
    def m_upper(self) -> int | None:
        """Last supported integer in the discrete convention (None if unbounded)."""
        return None if self.x_max is None else int(math.floor(self.x_max))


# --------------------------------------------------------------------------
# Model families.  Each provides the log kernel, the log of the kernel's
# tail integral, parameter checks, and (where available) a closed-form
# inverse survival for continuous sampling.
# --------------------------------------------------------------------------


class _PowerLaw:
    kind = ModelKind.POWER_LAW

    @staticmethod
    def check(params, x_min):
        (alpha,) = params
        if alpha <= 1.0:
            raise DomainError("power law requires alpha > 1")
        if x_min <= 0.0:
            raise DomainError("power law requires x_min > 0")

    @staticmethod
    def log_kernel(params, x):
        (alpha,) = params
        return -alpha * np.log(x)

    @staticmethod
    def log_tail_integral(params, a):
        (alpha,) = params
        return (1.0 - alpha) * math.log(a) - math.log(alpha - 1.0)

    @staticmethod
    def log_survival(params, x_min, x):
        (alpha,) = params
        return (1.0 - alpha) * (np.log(x) - math.log(x_min))

    @staticmethod
    def inverse_survival(params, x_min, u):
        (alpha,) = params
        return x_min * u ** (-1.0 / (alpha - 1.0))

    @staticmethod
    def discrete_log_norm(params, m):
        (alpha,) = params
        return math.log(sp.zeta(alpha, m))

    @staticmethod
    def discrete_log_survival(params, m, j):
        # S(j) = sum_{k>=j} k^-alpha / Z
        (alpha,) = params
        return np.log(sp.zeta(alpha, j)) - math.log(sp.zeta(alpha, m))


class _PowerLawCutoff:
    kind = ModelKind.POWER_LAW_CUTOFF

    @staticmethod
    def check(params, x_min):
        alpha, lam = params
        if lam <= 0.0:
            raise DomainError("power law with cutoff requires lambda > 0")
        if x_min <= 0.0:
            raise DomainError("power law with cutoff requires x_min > 0")

    @staticmethod
    def log_kernel(params, x):
        alpha, lam = params
        return -alpha * np.log(x) - lam * x

    @staticmethod
    def log_tail_integral(params, a):
        alpha, lam = params
        return (alpha - 1.0) * math.log(lam) + numerics.log_upper_incomplete_gamma(
            1.0 - alpha, lam * a
        )

    @staticmethod
    def log_survival(params, x_min, x):
        alpha, lam = params
        base = numerics.log_upper_incomplete_gamma(1.0 - alpha, lam * x_min)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array(
            [numerics.log_upper_incomplete_gamma(1.0 - alpha, lam * v) - base for v in xs]
        )
        return out[0] if np.isscalar(x) else out

    inverse_survival = None
    discrete_log_norm = None
    discrete_log_survival = None


class _LogNormal:
    kind = ModelKind.LOG_NORMAL

    @staticmethod
    def check(params, x_min):
        mu, sigma = params
        if sigma <= 0.0:
            raise DomainError("log-normal requires sigma > 0")
        if x_min <= 0.0:
            raise DomainError("truncated log-normal requires x_min > 0")

    @staticmethod
    def log_kernel(params, x):
        mu, sigma = params
        lx = np.log(x)
        return -lx - (lx - mu) ** 2 / (2.0 * sigma * sigma)

    @staticmethod
    def log_tail_integral(params, a):
        mu, sigma = params
        t = (math.log(a) - mu) / (math.sqrt(2.0) * sigma)
        return math.log(sigma * math.sqrt(math.pi / 2.0)) + numerics.log_erfc(t)

    @staticmethod
    def log_survival(params, x_min, x):
        mu, sigma = params
        rt2s = math.sqrt(2.0) * sigma
        t0 = (math.log(x_min) - mu) / rt2s
        t = (np.log(x) - mu) / rt2s
        return numerics.log_erfc(t) - numerics.log_erfc(t0)

    @staticmethod
    def inverse_survival(params, x_min, u):
        mu, sigma = params
        t0 = (math.log(x_min) - mu) / (math.sqrt(2.0) * sigma)
        base = sp.erfc(t0)
        if base <= 0.0:
            return None  # erfc underflow; caller falls back to numeric inversion
        return np.exp(mu + math.sqrt(2.0) * sigma * sp.erfcinv(u * base))

    discrete_log_norm = None
    discrete_log_survival = None


class _Exponential:
    kind = ModelKind.EXPONENTIAL

    @staticmethod
    def check(params, x_min):
        (lam,) = params
        if lam <= 0.0:
            raise DomainError("exponential requires lambda > 0")
        if x_min < 0.0:
            raise DomainError("exponential requires x_min >= 0")

    @staticmethod
    def log_kernel(params, x):
        (lam,) = params
        return -lam * np.asarray(x, dtype=float)

    @staticmethod
    def log_tail_integral(params, a):
        (lam,) = params
        return -lam * a - math.log(lam)

    @staticmethod
    def log_survival(params, x_min, x):
        (lam,) = params
        return -lam * (np.asarray(x, dtype=float) - x_min)

    @staticmethod
    def inverse_survival(params, x_min, u):
        (lam,) = params
        return x_min - np.log(u) / lam

    @staticmethod
    def discrete_log_norm(params, m):
        # geometric series: sum_{k>=m} e^(-lam k) = e^(-lam m) / (1 - e^(-lam))
        (lam,) = params
        return -lam * m - math.log1p(-math.exp(-lam))

    @staticmethod
    def discrete_log_survival(params, m, j):
        (lam,) = params
        return -lam * (np.asarray(j, dtype=float) - m)


class _StretchedExponential:
    kind = ModelKind.STRETCHED_EXPONENTIAL

    @staticmethod
    def check(params, x_min):
        lam, beta = params
        if lam <= 0.0 or beta <= 0.0:
            raise DomainError("stretched exponential requires lambda > 0 and beta > 0")
        if x_min < 0.0:
            raise DomainError("stretched exponential requires x_min >= 0")

    @staticmethod
    def log_kernel(params, x):
        lam, beta = params
        xv = np.asarray(x, dtype=float)
        return (beta - 1.0) * np.log(xv) - lam * xv**beta

    @staticmethod
    def log_tail_integral(params, a):
        lam, beta = params
        return -lam * a**beta - math.log(beta) - math.log(lam)

    @staticmethod
    def log_survival(params, x_min, x):
        lam, beta = params
        return -lam * (np.asarray(x, dtype=float) ** beta - x_min**beta)

    @staticmethod
    def inverse_survival(params, x_min, u):
        lam, beta = params
        return (x_min**beta - np.log(u) / lam) ** (1.0 / beta)

    discrete_log_norm = None
    discrete_log_survival = None


class _Gamma:
    kind = ModelKind.GAMMA

    @staticmethod
    def check(params, x_min):
        k, theta = params
        if k <= 0.0 or theta <= 0.0:
            raise DomainError("gamma requires k > 0 and theta > 0")
        if x_min < 0.0:
            raise DomainError("gamma requires x_min >= 0")

    @staticmethod
    def log_kernel(params, x):
        k, theta = params
        xv = np.asarray(x, dtype=float)
        return (k - 1.0) * np.log(xv) - xv / theta

    @staticmethod
    def log_tail_integral(params, a):
        k, theta = params
        if a == 0.0:
            return k * math.log(theta) + sp.gammaln(k)
        return k * math.log(theta) + numerics.log_upper_incomplete_gamma(k, a / theta)

    @staticmethod
    def log_survival(params, x_min, x):
        k, theta = params
        base = _Gamma.log_tail_integral(params, x_min) - k * math.log(theta)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array(
            [numerics.log_upper_incomplete_gamma(k, v / theta) - base for v in xs]
        )
        return out[0] if np.isscalar(x) else out

    @staticmethod
    def inverse_survival(params, x_min, u):
        k, theta = params
        q0 = sp.gammaincc(k, x_min / theta)
        if q0 <= 0.0:
            return None
        x = theta * sp.gammainccinv(k, u * q0)
        if not np.all(np.isfinite(x)):
            return None
        return x

    discrete_log_norm = None
    discrete_log_survival = None


_FAMILIES = {
    f.kind: f
    for f in (_PowerLaw, _PowerLawCutoff, _LogNormal, _Exponential, _StretchedExponential, _Gamma)
}


def _family(kind: ModelKind):
    return _FAMILIES[kind]


# --------------------------------------------------------------------------
# Normalization
# --------------------------------------------------------------------------


def _log_sub_exp(a: float, b: float) -> float:
    """log(e^a - e^b) for a > b."""
    if b == -math.inf:
        return a
    diff = b - a
    if diff >= 0.0:
        raise NumericsError("log_sub_exp requires a > b")
    return a + math.log1p(-math.exp(diff))


def _log_norm_continuous(model: ModelSpec) -> float:
    fam = _family(model.kind)
    la = fam.log_tail_integral(model.params, model.x_min)
    if model.x_max is None:
        return la
    lb = fam.log_tail_integral(model.params, model.x_max)
    return _log_sub_exp(la, lb)


def _bounded_discrete_log_norm(model: ModelSpec) -> float:
    fam = _family(model.kind)
    ks = np.arange(model.m_lower, model.m_upper + 1, dtype=float)
    with np.errstate(all="ignore"):
        lk = fam.log_kernel(model.params, ks)
    return float(sp.logsumexp(lk))


def _log_norm_discrete(model: ModelSpec) -> float:
    fam = _family(model.kind)
    m = model.m_lower
    if model.x_max is not None:
        return _bounded_discrete_log_norm(model)
    if fam.discrete_log_norm is not None:
        return fam.discrete_log_norm(model.params, m)
    # explicit summation with a midpoint-rule integral for the far tail
    log_total = -np.inf
    k0 = m
    terms = 0
    while True:
        ks = np.arange(k0, k0 + _SUM_BLOCK, dtype=float)
        lk = fam.log_kernel(model.params, ks)
        log_total = np.logaddexp(log_total, sp.logsumexp(lk))
        k0 += _SUM_BLOCK
        terms += _SUM_BLOCK
        log_rem = fam.log_tail_integral(model.params, k0 - 0.5)
        if log_rem < log_total - 36.0 or terms >= _SUM_MAX_TERMS:
            return float(np.logaddexp(log_total, log_rem))


def _log_norm(model: ModelSpec) -> float:
    if model.convention == CONTINUOUS:
        return _log_norm_continuous(model)
    return _log_norm_discrete(model)


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------


def _check_support(model: ModelSpec, xv: np.ndarray, op: str):
    if not np.all(np.isfinite(xv)):
        raise DomainError(f"{op} requires finite x")
    if np.any(xv < model.x_min):
        raise DomainError(f"{op} requires x >= x_min = {model.x_min}")
    if model.x_max is not None and np.any(xv > model.x_max):
        raise DomainError(f"{op} requires x <= x_max = {model.x_max}")


def log_pdf(model: ModelSpec, x):
    """Log density (or log mass in the discrete convention) on the support."""
    xv = np.asarray(x, dtype=float)
    _check_support(model, xv, "log_pdf")
    fam = _family(model.kind)
    out = fam.log_kernel(model.params, xv) - _log_norm(model)
    return float(out) if np.isscalar(x) or xv.ndim == 0 else out


def _continuous_cdf(model: ModelSpec, x) -> np.ndarray:
    # F(x) = (1 - S(x)/S(x_min)) / (1 - S(x_max)/S(x_min)); the unbounded
    # case falls out of expm1(-inf) = -1.
    fam = _family(model.kind)
    log_rel = fam.log_survival(model.params, model.x_min, x)
    num = np.expm1(log_rel)
    if model.x_max is None:
        return np.clip(-num, 0.0, 1.0)
    den = math.expm1(fam.log_survival(model.params, model.x_min, model.x_max))
    return np.clip(num / den, 0.0, 1.0)


def _discrete_cdf(model: ModelSpec, xv: np.ndarray) -> np.ndarray:
    fam = _family(model.kind)
    m = model.m_lower
    floors = np.floor(xv).astype(np.int64)
    below = floors < m  # x_min <= x < m carries no mass yet
    if model.x_max is None and fam.discrete_log_survival is not None:
        # F(x) = 1 - S(floor(x) + 1)
        j = np.maximum(floors + 1, m).astype(float)
        out = 1.0 - np.exp(fam.discrete_log_survival(model.params, m, j))
        out[below] = 0.0
        return np.clip(out, 0.0, 1.0)
    log_z = _log_norm(model)
    k_max = int(floors.max())
    if model.m_upper is not None:
        k_max = min(k_max, model.m_upper)
    k_hi = max(min(k_max, m + _TABLE_MAX), m)
    ks = np.arange(m, k_hi + 1, dtype=float)
    with np.errstate(all="ignore"):
        pmf = np.exp(fam.log_kernel(model.params, ks) - log_z)
    cdf = np.cumsum(pmf)
    out = np.zeros(xv.shape, dtype=float)
    capped = np.minimum(floors, k_max)
    inside = (capped >= m) & (capped <= k_hi)
    out[inside] = cdf[capped[inside] - m]
    beyond = capped > k_hi  # only reachable for unbounded supports
    if np.any(beyond):
        # beyond the table: survival from the midpoint-rule integral
        far = capped[beyond].astype(float)
        log_s = np.array(
            [fam.log_tail_integral(model.params, j + 0.5) - log_z for j in far]
        )
        out[beyond] = 1.0 - np.exp(log_s)
    return np.clip(out, 0.0, 1.0)


def tail_cdf(model: ModelSpec, x):
    """P(X <= x | support); 0 at x = x_min in the continuous convention."""
    xv = np.asarray(x, dtype=float)
    _check_support(model, xv, "tail_cdf")
    flat = np.atleast_1d(xv)
    if model.convention == CONTINUOUS:
        out = _continuous_cdf(model, flat)
    else:
        out = _discrete_cdf(model, flat)
    if np.isscalar(x) or xv.ndim == 0:
        return float(out[0] if out.ndim else out)
    return out


def log_likelihood(model: ModelSpec, tail) -> float:
    """Sum of log_pdf over the tail observations."""
    values = as_values(tail)
    if values.size == 0:
        raise DomainError("log_likelihood requires a non-empty tail")
    return float(np.sum(log_pdf(model, values)))


# --------------------------------------------------------------------------
# Maximum likelihood
# --------------------------------------------------------------------------


def _suff_stats(values: np.ndarray) -> dict:
    lx = np.log(values)
    return {
        "n": values.size,
        "sum_log": float(lx.sum()),
        "sum_log_sq": float((lx * lx).sum()),
        "sum": float(values.sum()),
        "mean": float(values.mean()),
        "var": float(values.var()),
    }


def _neg_ll_continuous(kind, params, x_min, values, stats, x_max=None):
    fam = _family(kind)
    n = stats["n"]
    try:
        log_norm = fam.log_tail_integral(params, x_min)
        if x_max is not None:
            log_norm = _log_sub_exp(log_norm, fam.log_tail_integral(params, x_max))
    except (DomainError, NumericsError, OverflowError, ValueError):
        return np.inf
    if kind is ModelKind.POWER_LAW:
        (alpha,) = params
        kernel_sum = -alpha * stats["sum_log"]
    elif kind is ModelKind.POWER_LAW_CUTOFF:
        alpha, lam = params
        kernel_sum = -alpha * stats["sum_log"] - lam * stats["sum"]
    elif kind is ModelKind.LOG_NORMAL:
        mu, sigma = params
        dev = stats["sum_log_sq"] - 2.0 * mu * stats["sum_log"] + n * mu * mu
        kernel_sum = -stats["sum_log"] - dev / (2.0 * sigma * sigma)
    elif kind is ModelKind.EXPONENTIAL:
        (lam,) = params
        kernel_sum = -lam * stats["sum"]
    elif kind is ModelKind.STRETCHED_EXPONENTIAL:
        lam, beta = params
        with np.errstate(over="ignore"):
            pow_sum = float(np.sum(values**beta))
        if not math.isfinite(pow_sum):
            return np.inf
        kernel_sum = (beta - 1.0) * stats["sum_log"] - lam * pow_sum
    else:  # gamma
        k, theta = params
        kernel_sum = (k - 1.0) * stats["sum_log"] - stats["sum"] / theta
    return -(kernel_sum - n * log_norm)


def _bounded_grid(x_min, x_max):
    ks = np.arange(math.ceil(x_min), math.floor(x_max) + 1, dtype=float)
    return ks, np.log(ks)


def _log_kernel_pre(kind, params, x, lx):
    # log kernel from precomputed logs; avoids re-taking 10^4-element logs
    # in every objective evaluation of a bounded fit
    if kind is ModelKind.POWER_LAW:
        (alpha,) = params
        return -alpha * lx
    if kind is ModelKind.POWER_LAW_CUTOFF:
        alpha, lam = params
        return -alpha * lx - lam * x
    if kind is ModelKind.LOG_NORMAL:
        mu, sigma = params
        return -lx - (lx - mu) ** 2 / (2.0 * sigma * sigma)
    if kind is ModelKind.EXPONENTIAL:
        (lam,) = params
        return -lam * x
    if kind is ModelKind.STRETCHED_EXPONENTIAL:
        lam, beta = params
        return (beta - 1.0) * lx - lam * np.exp(beta * lx)
    k, theta = params
    return (k - 1.0) * lx - x / theta


def _neg_ll_discrete(kind, params, x_min, values, stats, x_max=None, grid=None):
    fam = _family(kind)
    try:
        fam.check(params, x_min)
        if x_max is not None:
            ks, lks = grid if grid is not None else _bounded_grid(x_min, x_max)
            with np.errstate(all="ignore"):
                lk = _log_kernel_pre(kind, params, ks, lks)
                mx = float(lk.max())
                log_z = mx + math.log(float(np.exp(lk - mx).sum()))
        else:
            model = ModelSpec(kind, params, x_min, DISCRETE)
            log_z = _log_norm_discrete(model)
    except (DomainError, NumericsError, OverflowError, ValueError):
        return np.inf
    with np.errstate(all="ignore"):
        kernel_sum = float(np.sum(fam.log_kernel(params, values)))
    if not math.isfinite(kernel_sum) or not math.isfinite(log_z):
        return np.inf
    return -(kernel_sum - stats["n"] * log_z)


# Parameter transforms keep the simplex inside the valid region: positive
# parameters are searched in log space, the pure power law in log(alpha-1).
def _transforms(kind, convention):
    if kind is ModelKind.POWER_LAW:
        return (lambda t: (1.0 + math.exp(t[0]),), lambda p: [math.log(p[0] - 1.0)])
    if kind is ModelKind.POWER_LAW_CUTOFF:
        return (
            lambda t: (t[0], math.exp(t[1])),
            lambda p: [p[0], math.log(p[1])],
        )
    if kind is ModelKind.LOG_NORMAL:
        return (
            lambda t: (t[0], math.exp(t[1])),
            lambda p: [p[0], math.log(p[1])],
        )
    if kind is ModelKind.EXPONENTIAL:
        return (lambda t: (math.exp(t[0]),), lambda p: [math.log(p[0])])
    if kind is ModelKind.STRETCHED_EXPONENTIAL:
        return (
            lambda t: (math.exp(t[0]), math.exp(t[1])),
            lambda p: [math.log(p[0]), math.log(p[1])],
        )
    return (
        lambda t: (math.exp(t[0]), math.exp(t[1])),
        lambda p: [math.log(p[0]), math.log(p[1])],
    )


def _pl_alpha_closed_form(values, x_min, stats):
    denom = stats["sum_log"] - stats["n"] * math.log(x_min)
    if denom <= 0.0:
        raise DegenerateDataError(
            "power-law MLE diverges: all tail observations equal the bound"
        )
    return 1.0 + stats["n"] / denom


def _starting_point(kind, values, x_min, stats):
    if kind is ModelKind.POWER_LAW:
        alpha = _pl_alpha_closed_form(values, x_min, stats)
        return (min(max(alpha, 1.0 + 1e-6), 20.0),)
    if kind is ModelKind.POWER_LAW_CUTOFF:
        try:
            alpha = _pl_alpha_closed_form(values, x_min, stats)
        except DegenerateDataError:
            alpha = 2.0
        return (alpha, 1.0 / stats["mean"])
    if kind is ModelKind.LOG_NORMAL:
        lx = np.log(values)
        return (float(lx.mean()), max(float(lx.std()), 1e-2))
    if kind is ModelKind.EXPONENTIAL:
        spread = stats["mean"] - x_min
        return (1.0 / spread if spread > 0.0 else 1.0,)
    if kind is ModelKind.STRETCHED_EXPONENTIAL:
        return (1.0 / stats["mean"], 1.0)
    # gamma: method of moments on the tail values
    if stats["var"] > 0.0:
        theta = stats["var"] / stats["mean"]
        k = stats["mean"] / theta
    else:
        theta = stats["mean"]
        k = 1.0
    return (max(k, 1e-3), max(theta, 1e-6))


_MLE_CONFIG = numerics.OptimizerConfig(
    max_iterations=4000, absolute_tolerance=1e-9, initial_step=0.25
)


def mle_fit(
    kind: ModelKind,
    tail,
    x_min: float,
    convention: str = CONTINUOUS,
    x_max: float | None = None,
) -> ModelSpec:
    """Maximum likelihood parameters for one model on a fixed tail.

    Closed forms for the continuous power law and exponential; simplex
    search on transformed parameters otherwise.  Raises
    :class:`DegenerateDataError` when the tail carries no information
    (all observations equal); non-convergence is reported through the
    returned spec's ``converged`` flag.  A finite ``x_max`` fits the
    upper-truncated variant normalized on [x_min, x_max].
    """
    if convention not in _CONVENTIONS:
        raise DomainError(f"convention must be one of {_CONVENTIONS}")
    values = as_values(tail)
    if values.size == 0:
        raise DomainError("mle_fit requires a non-empty tail")
    if np.any(values < x_min):
        raise DomainError("all tail observations must be >= x_min")
    if x_max is not None and np.any(values > x_max):
        raise DomainError("all tail observations must be <= x_max")
    stats = _suff_stats(values)

    if x_max is None and convention == CONTINUOUS and kind is ModelKind.POWER_LAW:
        alpha = _pl_alpha_closed_form(values, x_min, stats)
        return ModelSpec(kind, (alpha,), x_min, convention)
    if x_max is None and convention == CONTINUOUS and kind is ModelKind.EXPONENTIAL:
        spread = stats["mean"] - x_min
        if spread <= 0.0:
            raise DegenerateDataError("exponential MLE diverges: mean equals the bound")
        return ModelSpec(kind, (1.0 / spread,), x_min, convention)

    # a spread-free tail makes the searched likelihoods unbounded (e.g. a
    # log-normal spike) or the searched exponent infinite
    if values[0] == values[-1]:
        raise DegenerateDataError("all tail observations are equal")

    neg_ll = _neg_ll_continuous if convention == CONTINUOUS else _neg_ll_discrete
    to_params, to_vec = _transforms(kind, convention)
    start = _starting_point(kind, values, x_min, stats)

    # On a bounded support the log-normal likelihood has no attained
    # maximum (mu -> -inf with sigma -> inf approaches a pure power law
    # on the window), so the location is floored at ln(x_min) to keep
    # the problem well-posed.
    mu_floor = math.log(x_min) if (x_max is not None and kind is ModelKind.LOG_NORMAL) else None
    grid = _bounded_grid(x_min, x_max) if (x_max is not None and convention == DISCRETE) else None

    def objective(t):
        try:
            params = to_params(t)
        except OverflowError:
            return np.inf
        if mu_floor is not None and params[0] < mu_floor:
            return np.inf
        if convention == DISCRETE:
            return neg_ll(kind, params, x_min, values, stats, x_max, grid)
        return neg_ll(kind, params, x_min, values, stats, x_max)

    result = numerics.minimize(objective, to_vec(start), _MLE_CONFIG)
    # one restart from the found optimum guards against a collapsed simplex
    result2 = numerics.minimize(objective, result.x, _MLE_CONFIG)
    if result2.value < result.value:
        result = result2
    params = to_params(result.x)
    return ModelSpec(kind, params, x_min, convention, x_max=x_max, converged=result.converged)


# --------------------------------------------------------------------------
# Sampling
# --------------------------------------------------------------------------


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _numeric_inverse_survival(model: ModelSpec, u: np.ndarray) -> np.ndarray:
    # bracketed bisection on the continuous log-survival, one draw at a time
    from scipy.optimize import brentq

    fam = _family(model.kind)
    out = np.empty(u.shape, dtype=float)
    for i, ui in enumerate(u):
        target = math.log(ui)
        if target >= 0.0:
            out[i] = model.x_min
            continue
        lo = model.x_min
        hi = max(2.0 * model.x_min, model.x_min + 1.0)
        while fam.log_survival(model.params, model.x_min, hi) > target:
            lo = hi
            hi *= 2.0
            if hi > 1e300:
                raise NumericsError("survival inversion failed to bracket")
        out[i] = brentq(
            lambda v: fam.log_survival(model.params, model.x_min, v) - target,
            lo,
            hi,
            xtol=1e-12,
            rtol=1e-14,
        )
    return out


def _sample_plwc_continuous(model: ModelSpec, n: int, rng) -> np.ndarray:
    alpha, lam = model.params
    x_min = model.x_min
    if alpha > 1.0 + 1e-9:
        # rejection from the pure power law; acceptance e^(-lam (x - x_min))
        log_accept = (
            math.log(alpha - 1.0)
            + (alpha - 1.0) * math.log(lam * x_min)
            + lam * x_min
            + numerics.log_upper_incomplete_gamma(1.0 - alpha, lam * x_min)
        )
        if log_accept > math.log(0.02):
            out = np.empty(n, dtype=float)
            filled = 0
            while filled < n:
                need = n - filled
                batch = max(1024, int(need / max(math.exp(log_accept), 1e-3)) + 16)
                batch = min(batch, 1_000_000)
                u = 1.0 - rng.random(batch)
                x = x_min * u ** (-1.0 / (alpha - 1.0))
                keep = rng.random(batch) < np.exp(-lam * (x - x_min))
                got = x[keep][:need]
                out[filled : filled + got.size] = got
                filled += got.size
            return out
    u = 1.0 - rng.random(n)
    return _numeric_inverse_survival(model, u)


def _sample_bounded_continuous(model: ModelSpec, n: int, rng) -> np.ndarray:
    # bisection on the bounded CDF; F is well conditioned on [x_min, x_max]
    from scipy.optimize import brentq

    u = rng.random(n)
    out = np.empty(n, dtype=float)
    for i, ui in enumerate(u):
        out[i] = brentq(
            lambda v: tail_cdf(model, v) - ui,
            model.x_min,
            model.x_max,
            xtol=1e-10 * max(1.0, model.x_max),
            rtol=1e-14,
        )
    return out


def _sample_continuous(model: ModelSpec, n: int, rng) -> np.ndarray:
    if model.x_max is not None:
        return _sample_bounded_continuous(model, n, rng)
    if model.kind is ModelKind.POWER_LAW_CUTOFF:
        return _sample_plwc_continuous(model, n, rng)
    fam = _family(model.kind)
    u = 1.0 - rng.random(n)
    if fam.inverse_survival is not None:
        x = fam.inverse_survival(model.params, model.x_min, u)
        if x is not None:
            return np.asarray(x, dtype=float)
    return _numeric_inverse_survival(model, u)


def _sample_discrete(model: ModelSpec, n: int, rng) -> np.ndarray:
    fam = _family(model.kind)
    m = model.m_lower
    log_z = _log_norm(model)
    targets = rng.random(n)  # compare against F(k); F is right-continuous
    if model.m_upper is not None:
        ks = np.arange(m, model.m_upper + 1, dtype=float)
        with np.errstate(all="ignore"):
            pmf = np.exp(fam.log_kernel(model.params, ks) - log_z)
        cdf = np.cumsum(pmf)
        idx = np.minimum(np.searchsorted(cdf, targets, side="left"), ks.size - 1)
        return (m + idx).astype(float)
    table_len = 1024
    while True:
        ks = np.arange(m, m + table_len, dtype=float)
        with np.errstate(all="ignore"):
            pmf = np.exp(fam.log_kernel(model.params, ks) - log_z)
        cdf = np.cumsum(pmf)
        if cdf[-1] >= targets.max() or table_len >= _TABLE_MAX:
            break
        table_len *= 2
    idx = np.searchsorted(cdf, targets, side="left")
    out = (m + idx).astype(float)
    beyond = idx >= table_len
    if np.any(beyond):
        # far tail: bisection on the midpoint-rule survival approximation
        def log_sf(j):
            if fam.discrete_log_survival is not None:
                return float(fam.discrete_log_survival(model.params, m, j))
            return fam.log_tail_integral(model.params, j - 0.5) - log_z

        for pos in np.nonzero(beyond)[0]:
            target = math.log1p(-targets[pos])  # log survival target
            lo = m + table_len
            hi = 2 * lo
            while log_sf(hi) > target:
                lo = hi
                hi *= 2
                if hi > 1 << 62:
                    raise NumericsError("discrete inversion failed to bracket")
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if log_sf(mid) > target:
                    lo = mid
                else:
                    hi = mid
            out[pos] = float(lo)
    return out


def sample(model: ModelSpec, n: int, seed) -> SizeDataset:
    """Draw n i.i.d. observations from the tail-normalized model.

    Deterministic for a fixed integer seed; also accepts a
    numpy Generator so callers can supply derived streams.
    """
    if n < 1:
        raise DomainError("sample requires n >= 1")
    rng = _as_rng(seed)
    if model.convention == CONTINUOUS:
        draws = _sample_continuous(model, int(n), rng)
    else:
        draws = _sample_discrete(model, int(n), rng)
    label = f"sample:{short_name(model.kind)}(n={n})"
    return SizeDataset(draws, label=label)
