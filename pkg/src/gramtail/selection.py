"""Model comparison: AIC ranking and likelihood-ratio tests.

One power-law scan fixes the shared tail; the five competing models are
fitted on that same tail so their likelihoods are directly comparable.
Each competitor is then tested against the power law with a
normalized likelihood-ratio test (chi-square for the nested
power-law-with-cutoff pair), and all models are ranked by AIC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import numerics
from .dataset import SizeDataset, as_values
from .distributions import CONTINUOUS, ModelKind
from .errors import ContractViolationError, DegenerateDataError, DomainError
from .fitting import STABILITY_THRESHOLD, TailFit, fixed_xmin_fit, scan_xmin

SIGNIFICANCE_LEVEL = 0.1

# halved-AIC differences smaller than this are treated as ties when
# picking the best model (well below any meaningful AIC difference)
AIC_TIE_TOLERANCE = 5e-3

FAVORED_POWER_LAW = "power_law"
FAVORED_CANDIDATE = "candidate"
FAVORED_UNDECIDED = "undecided"

# Support policy for the five competing fits.  UNBOUNDED is the plain
# tail-normalized form.  OBSERVED normalizes the numerically-normalized
# families (all but the power law and the exponential, which keep their
# closed-form normalizers) over the observed range [x_min, max(tail)];
# this is the convention of the classic comparison tables.
SUPPORT_UNBOUNDED = "unbounded"
SUPPORT_OBSERVED = "observed"

_CLOSED_FORM_KINDS = (ModelKind.POWER_LAW, ModelKind.EXPONENTIAL)


def aic(log_likelihood: float, m: int, halved: bool = False) -> float:
    """Akaike information criterion 2m - 2 lnL, or its halved form m - lnL."""
    if m < 1:
        raise DomainError("aic requires m >= 1")
    if halved:
        return m - log_likelihood
    return 2.0 * m - 2.0 * log_likelihood


@dataclass(frozen=True)
class CandidateResult:
    kind: ModelKind
    fit: TailFit
    aic_full: float
    aic_halved: float


@dataclass(frozen=True)
class LrtResult:
    candidate: ModelKind
    R: float
    p: float
    favored: str
    significant: bool


@dataclass(frozen=True)
class ComparisonReport:
    label: str
    convention: str
    candidate_support: str
    x_min: float
    n_tail: int
    alpha_est: float
    pl_log_likelihood: float
    candidates: tuple[CandidateResult, ...]
    lrts: tuple[LrtResult, ...]
    best_by_aic: ModelKind

    def candidate(self, kind: ModelKind) -> CandidateResult:
        for c in self.candidates:
            if c.kind is kind:
                return c
        raise KeyError(kind)

    def lrt(self, kind: ModelKind) -> LrtResult:
        for r in self.lrts:
            if r.candidate is kind:
                return r
        raise KeyError(kind)


def likelihood_ratio_test(tail, pl_fit: TailFit, cand_fit: TailFit, nested: bool = False) -> LrtResult:
    """Test the power law against one candidate on the identical tail.

    R is the summed per-observation log-likelihood difference (power law
    minus candidate).  Non-nested pairs get the normalized-ratio p-value
    erfc(|R| / sqrt(2 n sigma^2)) with sigma^2 the variance of the
    per-observation differences; the nested power-law-in-cutoff pair is
    tested against chi-square(1) at 2*max(-R, 0).
    """
    values = as_values(tail)
    if pl_fit.x_min != cand_fit.x_min or pl_fit.n_tail != cand_fit.n_tail:
        raise ContractViolationError(
            "likelihood_ratio_test requires both fits on the identical tail"
        )
    if values.size != pl_fit.n_tail:
        raise ContractViolationError("tail does not match the fits")
    d = np.atleast_1d(dist.log_pdf(pl_fit.model, values)) - np.atleast_1d(
        dist.log_pdf(cand_fit.model, values)
    )
    r = float(d.sum())
    n = values.size
    if np.all(d == 0.0):
        return LrtResult(cand_fit.model.kind, 0.0, 1.0, FAVORED_UNDECIDED, False)
    if nested:
        # chi2(1 df) upper tail at 2 max(-R, 0); sf(t, 1) = erfc(sqrt(t/2))
        p = float(numerics.erfc(math.sqrt(max(-r, 0.0))))
    else:
        sigma2 = float(np.mean((d - d.mean()) ** 2))
        if sigma2 == 0.0:
            raise DegenerateDataError(
                "degenerate variance: identical nonzero log-likelihood differences"
            )
        p = float(numerics.erfc(abs(r) / math.sqrt(2.0 * n * sigma2)))
    if r < 0.0:
        favored = FAVORED_CANDIDATE
    elif r > 0.0:
        favored = FAVORED_POWER_LAW
    else:
        favored = FAVORED_UNDECIDED
    return LrtResult(cand_fit.model.kind, r, p, favored, p <= SIGNIFICANCE_LEVEL)


def compare_all(
    data,
    convention: str = CONTINUOUS,
    candidate_support: str = SUPPORT_UNBOUNDED,
    stability_threshold: float | None = STABILITY_THRESHOLD,
) -> ComparisonReport:
    """Full comparison of all six models on the power-law-selected tail.

    ``candidate_support=SUPPORT_OBSERVED`` reproduces the classic table
    convention: competing models without closed-form normalizers are
    normalized over the observed tail range instead of [x_min, inf).
    """
    values = as_values(data)
    pl_fit = scan_xmin(values, ModelKind.POWER_LAW, convention, stability_threshold)
    return _compare_with_pl_fit(data, pl_fit, convention, candidate_support)


def compare_at(
    data,
    x_min: float,
    convention: str = CONTINUOUS,
    candidate_support: str = SUPPORT_UNBOUNDED,
) -> ComparisonReport:
    """Comparison on a caller-fixed tail bound (no scanning)."""
    values = as_values(data)
    pl_fit = fixed_xmin_fit(values, ModelKind.POWER_LAW, x_min, convention)
    return _compare_with_pl_fit(data, pl_fit, convention, candidate_support)


def _compare_with_pl_fit(
    data,
    pl_fit: TailFit,
    convention: str,
    candidate_support: str,
) -> ComparisonReport:
    if candidate_support not in (SUPPORT_UNBOUNDED, SUPPORT_OBSERVED):
        raise DomainError(f"unknown candidate_support {candidate_support!r}")
    if isinstance(data, SizeDataset):
        label = data.label
    else:
        label = ""
    values = as_values(data)
    tail = values[values >= pl_fit.x_min]
    x_max = float(tail.max()) if candidate_support == SUPPORT_OBSERVED else None

    candidates = []
    lrts = []
    for kind in ModelKind:
        if kind is ModelKind.POWER_LAW:
            fit = pl_fit
        else:
            bound = None if kind in _CLOSED_FORM_KINDS else x_max
            fit = fixed_xmin_fit(values, kind, pl_fit.x_min, convention, x_max=bound)
        m = dist.parameter_count(kind)
        candidates.append(
            CandidateResult(
                kind=kind,
                fit=fit,
                aic_full=aic(fit.log_likelihood, m),
                aic_halved=aic(fit.log_likelihood, m, halved=True),
            )
        )
        if kind is not ModelKind.POWER_LAW:
            lrts.append(
                likelihood_ratio_test(
                    tail, pl_fit, fit, nested=kind is ModelKind.POWER_LAW_CUTOFF
                )
            )

    # AIC differences below the optimizer's resolution are ties; ranked
    # by model order so rankings do not hinge on last-digit noise when
    # two families converge to the same supremum
    kind_order = {kind: i for i, kind in enumerate(ModelKind)}
    floor = min(c.aic_halved for c in candidates)
    tied = [c for c in candidates if c.aic_halved - floor <= AIC_TIE_TOLERANCE]
    best = min(tied, key=lambda c: kind_order[c.kind])
    return ComparisonReport(
        label=label,
        convention=convention,
        candidate_support=candidate_support,
        x_min=pl_fit.x_min,
        n_tail=pl_fit.n_tail,
        alpha_est=pl_fit.model.params[0],
        pl_log_likelihood=pl_fit.log_likelihood,
        candidates=tuple(candidates),
        lrts=tuple(lrts),
        best_by_aic=best.kind,
    )


# --------------------------------------------------------------------------
# Report serialization (exact round-trip through JSON)
# --------------------------------------------------------------------------


def _model_to_dict(model) -> dict:
    return {
        "kind": model.kind.value,
        "params": list(model.params),
        "x_min": model.x_min,
        "convention": model.convention,
        "x_max": model.x_max,
        "converged": model.converged,
    }


def _model_from_dict(d) -> dist.ModelSpec:
    return dist.ModelSpec(
        kind=ModelKind(d["kind"]),
        params=tuple(d["params"]),
        x_min=d["x_min"],
        convention=d["convention"],
        x_max=d["x_max"],
        converged=d["converged"],
    )


def _fit_to_dict(fit: TailFit) -> dict:
    return {
        "model": _model_to_dict(fit.model),
        "x_min": fit.x_min,
        "n_tail": fit.n_tail,
        "log_likelihood": fit.log_likelihood,
        "ks_D": fit.ks_D,
        "converged": fit.converged,
    }


def _fit_from_dict(d) -> TailFit:
    return TailFit(
        model=_model_from_dict(d["model"]),
        x_min=d["x_min"],
        n_tail=d["n_tail"],
        log_likelihood=d["log_likelihood"],
        ks_D=d["ks_D"],
        converged=d["converged"],
    )


def report_to_dict(report: ComparisonReport) -> dict:
    return {
        "label": report.label,
        "convention": report.convention,
        "candidate_support": report.candidate_support,
        "x_min": report.x_min,
        "n_tail": report.n_tail,
        "alpha_est": report.alpha_est,
        "pl_log_likelihood": report.pl_log_likelihood,
        "candidates": [
            {
                "kind": c.kind.value,
                "fit": _fit_to_dict(c.fit),
                "aic_full": c.aic_full,
                "aic_halved": c.aic_halved,
            }
            for c in report.candidates
        ],
        "lrts": [
            {
                "candidate": r.candidate.value,
                "R": r.R,
                "p": r.p,
                "favored": r.favored,
                "significant": r.significant,
            }
            for r in report.lrts
        ],
        "best_by_aic": report.best_by_aic.value,
    }


def report_from_dict(d) -> ComparisonReport:
    return ComparisonReport(
        label=d["label"],
        convention=d["convention"],
        candidate_support=d["candidate_support"],
        x_min=d["x_min"],
        n_tail=d["n_tail"],
        alpha_est=d["alpha_est"],
        pl_log_likelihood=d["pl_log_likelihood"],
        candidates=tuple(
            CandidateResult(
                kind=ModelKind(c["kind"]),
                fit=_fit_from_dict(c["fit"]),
                aic_full=c["aic_full"],
                aic_halved=c["aic_halved"],
            )
            for c in d["candidates"]
        ),
        lrts=tuple(
            LrtResult(
                candidate=ModelKind(r["candidate"]),
                R=r["R"],
                p=r["p"],
                favored=r["favored"],
                significant=r["significant"],
            )
            for r in d["lrts"]
        ),
        best_by_aic=ModelKind(d["best_by_aic"]),
    )
