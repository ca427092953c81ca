import math

import numpy as np
import pytest
from scipy.integrate import quad

from gramtail import distributions as dist
from gramtail.distributions import (
    CONTINUOUS,
    DISCRETE,
    ModelKind,
    ModelSpec,
    kind_from_name,
    log_likelihood,
    log_pdf,
    mle_fit,
    parameter_count,
    sample,
    short_name,
    tail_cdf,
)
from gramtail.errors import DegenerateDataError, DomainError

K = ModelKind

# one representative parameterization per family, exercised throughout
CASES = {
    K.POWER_LAW: ((2.3,), 1.5),
    K.POWER_LAW_CUTOFF: ((1.8, 0.05), 2.0),
    K.LOG_NORMAL: ((1.0, 0.8), 1.0),
    K.EXPONENTIAL: ((0.4,), 1.0),
    K.STRETCHED_EXPONENTIAL: ((0.5, 0.7), 1.0),
    K.GAMMA: ((1.7, 3.0), 2.0),
}


def empirical_ks(model, values):
    values = np.sort(values)
    n = values.size
    cdf = np.atleast_1d(tail_cdf(model, values))
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return max((hi - cdf).max(), (cdf - lo).max())


class TestModelSpec:
    def test_parameter_counts(self):
        assert parameter_count(K.POWER_LAW) == 1
        assert parameter_count(K.EXPONENTIAL) == 1
        for kind in (K.POWER_LAW_CUTOFF, K.LOG_NORMAL, K.STRETCHED_EXPONENTIAL, K.GAMMA):
            assert parameter_count(kind) == 2

    def test_kind_from_name(self):
        assert kind_from_name("PLWC") is K.POWER_LAW_CUTOFF
        assert kind_from_name("log_normal") is K.LOG_NORMAL
        with pytest.raises(DomainError):
            kind_from_name("weibull")

    @pytest.mark.parametrize(
        "kind,params",
        [
            (K.POWER_LAW, (1.0,)),
            (K.POWER_LAW_CUTOFF, (2.0, 0.0)),
            (K.LOG_NORMAL, (0.0, -1.0)),
            (K.EXPONENTIAL, (0.0,)),
            (K.STRETCHED_EXPONENTIAL, (1.0, -0.2)),
            (K.GAMMA, (0.0, 1.0)),
        ],
    )
    def test_invalid_parameters(self, kind, params):
        with pytest.raises(DomainError):
            ModelSpec(kind, params, 1.0)

    def test_invalid_convention_and_bounds(self):
        with pytest.raises(DomainError):
            ModelSpec(K.POWER_LAW, (2.0,), 1.0, "both")
        with pytest.raises(DomainError):
            ModelSpec(K.POWER_LAW, (2.0,), 1.0, x_max=0.5)
        with pytest.raises(DomainError):
            ModelSpec(K.POWER_LAW, (2.0,), 10.2, DISCRETE, x_max=10.9)

    def test_wrong_arity(self):
        with pytest.raises(DomainError):
            ModelSpec(K.POWER_LAW, (2.0, 1.0), 1.0)


class TestNormalization:
    @pytest.mark.parametrize("kind", list(K))
    def test_continuous_integrates_to_one(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        total, _ = quad(lambda v: math.exp(log_pdf(model, v)), x_min, np.inf, limit=300)
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("kind", list(K))
    def test_discrete_sums_to_one(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min, DISCRETE)
        ks = np.arange(model.m_lower, model.m_lower + 2_000_000, dtype=float)
        partial = np.exp(log_pdf(model, ks)).sum()
        remainder = 1.0 - tail_cdf(model, ks[-1])
        assert partial + remainder == pytest.approx(1.0, abs=1e-5)

    @pytest.mark.parametrize("kind", list(K))
    def test_bounded_continuous_integrates_to_one(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min, x_max=x_min + 40.0)
        total, _ = quad(lambda v: math.exp(log_pdf(model, v)), x_min, model.x_max, limit=300)
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("kind", list(K))
    def test_bounded_discrete_sums_to_one(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min, DISCRETE, x_max=x_min + 500.0)
        ks = np.arange(model.m_lower, model.m_upper + 1, dtype=float)
        assert np.exp(log_pdf(model, ks)).sum() == pytest.approx(1.0, abs=1e-9)

    def test_random_parameter_normalization(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            kind = list(K)[rng.integers(6)]
            params = {
                K.POWER_LAW: (1.0 + rng.uniform(0.2, 2.5),),
                K.POWER_LAW_CUTOFF: (rng.uniform(0.5, 2.5), rng.uniform(0.01, 0.5)),
                K.LOG_NORMAL: (rng.uniform(-1, 2), rng.uniform(0.3, 1.5)),
                K.EXPONENTIAL: (rng.uniform(0.05, 1.5),),
                K.STRETCHED_EXPONENTIAL: (rng.uniform(0.1, 1.0), rng.uniform(0.3, 1.2)),
                K.GAMMA: (rng.uniform(0.5, 3.0), rng.uniform(0.5, 4.0)),
            }[kind]
            x_min = rng.uniform(0.5, 5.0)
            model = ModelSpec(kind, params, x_min)
            total, _ = quad(lambda v: math.exp(log_pdf(model, v)), x_min, np.inf, limit=300)
            assert total == pytest.approx(1.0, abs=1e-6), (kind, params, x_min)


class TestLogPdf:
    def test_power_law_at_bound(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0)
        assert log_pdf(model, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_exponential_cancellation_at_bound(self):
        model = ModelSpec(K.EXPONENTIAL, (1.0,), 0.5)
        assert log_pdf(model, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_cutoff_matches_quadrature_normalizer(self):
        model = ModelSpec(K.POWER_LAW_CUTOFF, (2.196, 1e-3), 1734.0)
        z, _ = quad(
            lambda v: v ** (-2.196) * math.exp(-1e-3 * v), 1734.0, np.inf, limit=400
        )
        for x in (1734.0, 2000.0, 5000.0, 20000.0):
            direct = -2.196 * math.log(x) - 1e-3 * x - math.log(z)
            assert log_pdf(model, x) == pytest.approx(direct, rel=1e-6)

    def test_below_bound_rejected(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 5.0)
        with pytest.raises(DomainError):
            log_pdf(model, 4.0)
        with pytest.raises(DomainError):
            log_pdf(model, np.array([6.0, 4.0]))

    def test_above_x_max_rejected(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 5.0, x_max=50.0)
        with pytest.raises(DomainError):
            log_pdf(model, 51.0)


class TestTailCdf:
    @pytest.mark.parametrize("kind", list(K))
    def test_zero_at_bound_continuous(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        assert tail_cdf(model, x_min) == pytest.approx(0.0, abs=1e-12)

    def test_power_law_closed_form(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0)
        assert tail_cdf(model, 2.0) == pytest.approx(0.5, rel=1e-12)

    def test_stretched_exponential_closed_form(self):
        model = ModelSpec(K.STRETCHED_EXPONENTIAL, (1.0, 0.5), 1.0)
        assert tail_cdf(model, 4.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)

    @pytest.mark.parametrize("kind", list(K))
    def test_monotone(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        xs = np.linspace(x_min, x_min + 60.0, 400)
        cdf = tail_cdf(model, xs)
        assert np.all(np.diff(cdf) >= -1e-12)
        assert np.all((cdf >= 0.0) & (cdf <= 1.0))

    @pytest.mark.parametrize("kind", list(K))
    def test_derivative_matches_pdf(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        h = 1e-5
        for x in (x_min + 0.7, x_min + 3.0, x_min + 11.0):
            deriv = (tail_cdf(model, x + h) - tail_cdf(model, x - h)) / (2 * h)
            assert deriv == pytest.approx(math.exp(log_pdf(model, x)), rel=1e-4)

    def test_bounded_reaches_one_at_x_max(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0, x_max=20.0)
        assert tail_cdf(model, 20.0) == pytest.approx(1.0, rel=1e-12)

    def test_discrete_step_structure(self):
        model = ModelSpec(K.POWER_LAW, (2.5,), 1.0, DISCRETE)
        # no mass strictly between integers
        assert tail_cdf(model, 3.0) == pytest.approx(tail_cdf(model, 3.9), rel=1e-12)
        assert tail_cdf(model, 1.0) > 0.0


class TestLogLikelihood:
    def test_single_observation_density_one(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0)
        assert log_likelihood(model, [1.0]) == pytest.approx(0.0, abs=1e-12)

    def test_additivity_over_copies(self):
        model = ModelSpec(K.LOG_NORMAL, (1.0, 0.8), 1.0)
        x = 3.7
        n = 11
        assert log_likelihood(model, [x] * n) == pytest.approx(
            n * log_pdf(model, x), rel=1e-12
        )

    def test_empty_tail(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0)
        with pytest.raises(DomainError):
            log_likelihood(model, [])


class TestMleFit:
    def test_power_law_closed_form(self):
        x_min = 2.0
        values = np.full(50, math.e * x_min)  # sum log(x/x_min) = n
        fit = mle_fit(K.POWER_LAW, values, x_min)
        assert fit.params[0] == pytest.approx(2.0, rel=1e-12)

    def test_exponential_closed_form(self):
        values = np.array([2.5, 3.5, 4.5, 5.5])  # mean = x_min + 2
        fit = mle_fit(K.EXPONENTIAL, values, 2.0)
        assert fit.params[0] == pytest.approx(0.5, rel=1e-12)

    def test_degenerate_at_bound(self):
        with pytest.raises(DegenerateDataError):
            mle_fit(K.POWER_LAW, np.full(10, 3.0), 3.0)
        with pytest.raises(DegenerateDataError):
            mle_fit(K.EXPONENTIAL, np.full(10, 3.0), 3.0)
        with pytest.raises(DegenerateDataError):
            mle_fit(K.LOG_NORMAL, np.full(10, 5.0), 3.0)

    @pytest.mark.parametrize("kind", list(K))
    def test_recovery_continuous(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        data = sample(model, 20_000, 7)
        fit = mle_fit(kind, data.values, x_min)
        assert fit.converged
        for est, true in zip(fit.params, params):
            assert est == pytest.approx(true, rel=0.12)

    @pytest.mark.parametrize("kind", list(K))
    def test_score_condition(self, kind):
        # no +-1e-3 relative parameter perturbation may improve the fit
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        data = sample(model, 5_000, 3)
        fit = mle_fit(kind, data.values, x_min)
        base = log_likelihood(fit, data.values)
        for i in range(len(fit.params)):
            for eps in (-1e-3, 1e-3):
                perturbed = list(fit.params)
                perturbed[i] *= 1.0 + eps
                try:
                    other = ModelSpec(kind, perturbed, x_min)
                except DomainError:
                    continue
                assert log_likelihood(other, data.values) <= base + 1e-6

    def test_discrete_power_law_recovery(self):
        model = ModelSpec(K.POWER_LAW, (2.3,), 2.0, DISCRETE)
        data = sample(model, 20_000, 9)
        fit = mle_fit(K.POWER_LAW, data.values, 2.0, DISCRETE)
        assert fit.params[0] == pytest.approx(2.3, abs=0.05)

    def test_bounded_fit_stays_in_support(self):
        params, x_min = CASES[K.GAMMA]
        model = ModelSpec(K.GAMMA, params, x_min)
        data = sample(model, 2_000, 5)
        x_max = float(data.values.max())
        fit = mle_fit(K.GAMMA, data.values, x_min, x_max=x_max)
        assert fit.x_max == x_max
        # bounded likelihood at its optimum is at least the unbounded one
        unbounded = mle_fit(K.GAMMA, data.values, x_min)
        assert log_likelihood(fit, data.values) >= log_likelihood(unbounded, data.values) - 1e-6


class TestSample:
    def test_deterministic(self):
        model = ModelSpec(K.POWER_LAW, (2.5,), 5.0)
        a = sample(model, 1, 123).values
        b = sample(model, 1, 123).values
        assert np.array_equal(a, b)

    def test_exponential_mean(self):
        model = ModelSpec(K.EXPONENTIAL, (1.0,), 0.0)
        data = sample(model, 100_000, 17)
        assert data.values.mean() == pytest.approx(1.0, abs=0.02)

    def test_fit_after_sample(self):
        model = ModelSpec(K.POWER_LAW, (2.5,), 5.0)
        data = sample(model, 10_000, 21)
        fit = mle_fit(K.POWER_LAW, data.values, 5.0)
        assert fit.params[0] == pytest.approx(2.5, abs=0.05)

    @pytest.mark.parametrize("kind", list(K))
    def test_sampling_consistency_continuous(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min)
        data = sample(model, 100_000, 123)
        assert empirical_ks(model, data.values) <= 0.01

    @pytest.mark.parametrize("kind", list(K))
    def test_sampling_consistency_discrete(self, kind):
        params, x_min = CASES[kind]
        model = ModelSpec(kind, params, x_min, DISCRETE)
        data = sample(model, 100_000, 123)
        values = data.values
        assert np.all(values == np.floor(values))
        assert empirical_ks(model, values) <= 0.01

    def test_bounded_sampling(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0, x_max=30.0)
        data = sample(model, 3_000, 5)
        assert data.values.min() >= 1.0 and data.values.max() <= 30.0
        assert empirical_ks(model, data.values) <= 0.03

    def test_bounded_discrete_sampling(self):
        model = ModelSpec(K.LOG_NORMAL, (1.0, 1.0), 1.0, DISCRETE, x_max=200.0)
        data = sample(model, 50_000, 8)
        assert data.values.max() <= 200.0
        assert empirical_ks(model, data.values) <= 0.01

    def test_far_tail_table_fallback(self, monkeypatch):
        # force the beyond-table branch of the discrete sampler
        monkeypatch.setattr(dist, "_TABLE_MAX", 64)
        model = ModelSpec(K.POWER_LAW, (1.6,), 1.0, DISCRETE)
        data = sample(model, 4_000, 31)
        assert data.values.max() > 65  # heavy tail must actually reach past the table
        assert empirical_ks(model, data.values) <= 0.03

    def test_invalid_n(self):
        model = ModelSpec(K.POWER_LAW, (2.0,), 1.0)
        with pytest.raises(DomainError):
            sample(model, 0, 1)

    def test_short_names(self):
        assert short_name(K.POWER_LAW_CUTOFF) == "PLWC"
        assert short_name(K.STRETCHED_EXPONENTIAL) == "str_exp"
