"""Rank-plot regression and the two sampling experiments.

The regression mirrors spreadsheet practice: sort descending, assign
ranks 1..n (ties keep distinct consecutive ranks), least-squares fit of
log size on log rank.  The random-sample experiment profiles samples
drawn from the whole language pool regardless of grouping; the growth
experiment profiles nested random subsets of one family and averages
over iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import corpus as corpus_mod
from .corpus import DEFAULT_ALPHABET, RAW, FamilyCorpus
from .dataset import as_values
from .errors import ConfigError, DegenerateDataError, DomainError


@dataclass(frozen=True)
class RegressionResult:
    """Least-squares line on the log-log rank plot."""

    alpha_sp: float  # negated slope
    intercept: float
    r_squared: float


def loglog_regression(x, y) -> RegressionResult:
    """Least squares of log(y) on log(x); alpha_sp is the negated slope."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 3:
        raise DomainError("regression requires at least 3 points")
    if np.ptp(ly) == 0.0 or np.ptp(lx) == 0.0:
        raise DegenerateDataError("zero variance on one axis; no regression line")
    slope, intercept = np.polyfit(lx, ly, 1)
    r = np.corrcoef(lx, ly)[0, 1]
    return RegressionResult(alpha_sp=float(-slope), intercept=float(intercept), r_squared=float(r * r))


def rank_regression(values) -> RegressionResult:
    """Spreadsheet-style power-law estimate from the frequency-rank plot."""
    vals = as_values(values)
    if vals.size < 3:
        raise DomainError("rank_regression requires at least 3 values")
    if np.any(vals < 1.0):
        raise DomainError("rank_regression requires values >= 1")
    ordered = np.sort(vals)[::-1]
    ranks = np.arange(1, ordered.size + 1, dtype=float)
    return loglog_regression(ranks, ordered)


@dataclass(frozen=True)
class RandomSampleResult:
    """Profile sizes of random language samples, one per requested size."""

    sizes: tuple
    profile_sizes: tuple  # mean cumulative profile size at each requested size
    regression: RegressionResult
    n_max: int
    iterations: int


def _language_gram_sets(pool, n_max, mode, alphabet):
    return {
        key: corpus_mod.gram_sets(lists, n_max, mode, alphabet)
        for key, lists in pool.items()
    }


def _union_size(gram_sets_list, n_max):
    out = {}
    for n in range(1, n_max + 1):
        seen = set()
        for sets in gram_sets_list:
            seen |= sets[n]
        out[n] = len(seen)
    return out


def random_sample_experiment(
    word_lists,
    family_sizes,
    seed: int,
    n_max: int = 5,
    mode: str = RAW,
    alphabet=DEFAULT_ALPHABET,
    repeats: int = 1,
) -> RandomSampleResult:
    """Profile random language samples of the given sizes.

    For each requested size s, draws s languages uniformly without
    replacement from the entire pool (ignoring family membership),
    merges their word lists, and records the cumulative n_max-gram
    profile size; then regresses size against s on the log-log scale.
    ``repeats`` averages several independent draws per size.
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    pool = corpus_mod.language_pool(word_lists)
    keys = sorted(pool)
    total = len(keys)
    sizes = [int(s) for s in family_sizes]
    if not sizes:
        raise DomainError("family_sizes must be non-empty")
    if max(sizes) > total or min(sizes) < 1:
        raise DomainError(f"sample sizes must lie in 1..{total}")
    per_language = _language_gram_sets(pool, n_max, mode, alphabet)

    profile_sizes = []
    for j, s in enumerate(sizes):
        acc = 0.0
        for r in range(repeats):
            rng = np.random.default_rng([seed, j, r])
            chosen = rng.choice(total, size=s, replace=False)
            counts = _union_size([per_language[keys[i]] for i in chosen], n_max)
            acc += sum(counts.values())
        profile_sizes.append(acc / repeats)
    regression = loglog_regression(sizes, profile_sizes)
    return RandomSampleResult(
        sizes=tuple(sizes),
        profile_sizes=tuple(profile_sizes),
        regression=regression,
        n_max=n_max,
        iterations=repeats,
    )


@dataclass(frozen=True)
class GrowthCurve:
    """Mean profile growth under nested random sampling of one family."""

    family: str
    sizes: tuple  # 1..s
    per_n_means: dict  # n -> tuple of means, aligned with sizes
    cumulative_means: dict  # n -> tuple of running-sum means
    iterations: int

    def cumulative(self, n: int) -> tuple:
        return self.cumulative_means[n]


def growth_curves(
    corpus: FamilyCorpus,
    iterations: int = 10,
    seed: int = 42,
    n_max: int = 5,
    mode: str = RAW,
    alphabet=DEFAULT_ALPHABET,
) -> GrowthCurve:
    """Average n-gram profile size at every sample size 1..s.

    For each i, draws ``iterations`` random i-language subsets of the
    family (without replacement within a draw) and averages the per-n
    distinct-gram counts; at i = s every draw is the whole family, so
    the curve endpoint equals the full-family profile exactly.
    """
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    keys = sorted(corpus.languages)
    s = len(keys)
    if s < 2:
        raise DomainError("growth_curves requires at least 2 member languages")
    per_language = {
        key: corpus_mod.gram_sets(corpus.languages[key], n_max, mode, alphabet)
        for key in keys
    }
    sizes = tuple(range(1, s + 1))
    sums = {n: np.zeros(s) for n in range(1, n_max + 1)}
    for i in sizes:
        for t in range(iterations):
            rng = np.random.default_rng([seed, i, t])
            chosen = rng.choice(s, size=i, replace=False)
            counts = _union_size([per_language[keys[c]] for c in chosen], n_max)
            for n, c in counts.items():
                sums[n][i - 1] += c
    per_n_means = {n: tuple(float(v) / iterations for v in sums[n]) for n in sums}
    cumulative = {}
    running = np.zeros(s)
    for n in range(1, n_max + 1):
        running = running + np.asarray(per_n_means[n])
        cumulative[n] = tuple(float(v) for v in running)
    return GrowthCurve(
        family=corpus.name,
        sizes=sizes,
        per_n_means=per_n_means,
        cumulative_means=cumulative,
        iterations=iterations,
    )


def slope_flattening_ratio(sizes, means) -> float:
    """Last-quartile mean slope over first-quartile mean slope.

    The diagnostic behind the growth-curve criteria: short-gram curves
    flatten (small ratio), long-gram curves keep growing (large ratio).
    """
    sizes = np.asarray(sizes, dtype=float)
    means = np.asarray(means, dtype=float)
    if sizes.size < 8:
        raise DomainError("need at least 8 points to compare quartile slopes")
    slopes = np.diff(means) / np.diff(sizes)
    q = slopes.size // 4
    first = float(np.mean(slopes[:q]))
    last = float(np.mean(slopes[-q:]))
    if first == 0.0:
        raise DegenerateDataError("flat first quartile; ratio undefined")
    return last / first
