import math

import mpmath
import numpy as np
import pytest

from gramtail.errors import DomainError, NumericsError
from gramtail.numerics import (
    MinimizeResult,
    OptimizerConfig,
    erfc,
    log_erfc,
    log_gamma,
    log_upper_incomplete_gamma,
    minimize,
    upper_incomplete_gamma,
)

mpmath.mp.dps = 40


def mp_gamma_inc(s, x):
    return mpmath.gammainc(s, x, mpmath.inf)


class TestLogGamma:
    def test_known_values(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-12)
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), abs=1e-12)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-12)

    def test_recurrence_identity(self):
        # ln G(x+1) = ln G(x) + ln x; double precision cannot hold an
        # absolute 1e-10 above ~1e5 where ln G itself exceeds 1e6
        rng = np.random.default_rng(1)
        x = rng.uniform(0.5, 100.0, size=500)
        lhs = log_gamma(x + 1.0)
        rhs = log_gamma(x) + np.log(x)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_accuracy_against_oracle(self):
        rng = np.random.default_rng(2)
        for x in np.concatenate(([1e-6, 1e-3, 1e6], rng.uniform(0.01, 1e4, 50))):
            ref = float(mpmath.log(mpmath.gamma(x)))
            tol = max(1e-10, abs(ref) * 1e-13)
            assert log_gamma(float(x)) == pytest.approx(ref, abs=tol)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_gamma(0.0)
        with pytest.raises(DomainError):
            log_gamma(-1.5)
        with pytest.raises(DomainError):
            log_gamma(float("nan"))

    def test_vectorized(self):
        out = log_gamma(np.array([1.0, 5.0]))
        assert out.shape == (2,)


class TestErfc:
    def test_zero(self):
        assert erfc(0.0) == 1.0

    def test_reflection(self):
        rng = np.random.default_rng(3)
        for x in rng.uniform(-10, 10, 200):
            assert erfc(x) + erfc(-x) == pytest.approx(2.0, rel=1e-10)

    def test_quadrature_value(self):
        # (2/sqrt(pi)) * integral_1^inf e^(-t^2) dt, frozen from the oracle
        assert erfc(1.0) == pytest.approx(0.15729920705028513, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            erfc(float("inf"))

    def test_log_erfc_matches_log_of_erfc(self):
        for x in [-5.0, -0.5, 0.0, 0.5, 5.0, 20.0]:
            ref = float(mpmath.log(mpmath.erfc(x)))
            assert log_erfc(x) == pytest.approx(ref, rel=1e-12)

    def test_log_erfc_underflow_regime(self):
        assert log_erfc(30.0) == pytest.approx(-903.9741171106439, rel=1e-12)


class TestUpperIncompleteGamma:
    def test_closed_forms(self):
        assert upper_incomplete_gamma(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)
        assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)

    def test_negative_order_quadrature_value(self):
        # integral_1^inf t^(-1.5) e^(-t) dt, frozen from the quadrature oracle
        assert upper_incomplete_gamma(-0.5, 1.0) == pytest.approx(
            0.1781477117815607, rel=1e-8
        )

    def test_recurrence_consistency(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            s = rng.uniform(0.0, 5.0)
            x = rng.uniform(0.1, 50.0)
            lhs = s * upper_incomplete_gamma(s, x) + x**s * math.exp(-x)
            rhs = upper_incomplete_gamma(s + 1.0, x)
            assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_oracle_grid(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            s = rng.uniform(-20.0, 20.0)
            x = rng.uniform(1e-3, 100.0)
            ref = float(mp_gamma_inc(s, x))
            assert upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-8)

    def test_integer_orders(self):
        for s in (0, -1, -2, -7, -20):
            for x in (0.01, 0.5, 1.4, 1.6, 10.0, 99.0):
                ref = float(mp_gamma_inc(s, x))
                assert upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            upper_incomplete_gamma(-0.5, 0.0)
        with pytest.raises(DomainError):
            upper_incomplete_gamma(0.5, -1.0)
        with pytest.raises(DomainError):
            upper_incomplete_gamma(float("nan"), 1.0)

    def test_log_form_matches_value(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            s = rng.uniform(-10.0, 10.0)
            x = rng.uniform(0.01, 50.0)
            v = upper_incomplete_gamma(s, x)
            assert log_upper_incomplete_gamma(s, x) == pytest.approx(math.log(v), rel=1e-10)

    def test_log_form_large_x(self):
        # beyond e^-745 the plain value underflows; the log form keeps going
        for s in (-3.2, 0.5, 2.5, 12.0):
            for x in (750.0, 1200.0, 5000.0):
                ref = float(mpmath.log(mp_gamma_inc(s, x)))
                assert log_upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-10)


def rosenbrock(v):
    return (1.0 - v[0]) ** 2 + 100.0 * (v[1] - v[0] ** 2) ** 2


class TestMinimize:
    def test_quadratic_1d(self):
        res = minimize(lambda v: (v[0] - 3.0) ** 2, [0.0])
        assert res.converged
        assert res.x[0] == pytest.approx(3.0, abs=1e-4)
        assert res.value == pytest.approx(0.0, abs=1e-8)

    def test_separable_quadratic_2d(self):
        res = minimize(lambda v: (v[0] - 1.0) ** 2 + (v[1] + 2.0) ** 2, [0.0, 0.0])
        assert res.x == pytest.approx([1.0, -2.0], abs=1e-4)

    def test_rosenbrock(self):
        res = minimize(rosenbrock, [-1.2, 1.0], OptimizerConfig(max_iterations=4000))
        assert res.converged
        assert res.x == pytest.approx([1.0, 1.0], abs=1e-4)

    def test_constant_shift_invariance(self):
        cfg = OptimizerConfig(max_iterations=4000)
        res1 = minimize(rosenbrock, [-1.2, 1.0], cfg)
        res2 = minimize(lambda v: rosenbrock(v) + 123.75, [-1.2, 1.0], cfg)
        assert res1.x == pytest.approx(res2.x, abs=1e-6)

    def test_deterministic(self):
        res1 = minimize(rosenbrock, [-1.2, 1.0])
        res2 = minimize(rosenbrock, [-1.2, 1.0])
        assert np.array_equal(res1.x, res2.x)
        assert res1.value == res2.value

    def test_non_finite_simplex(self):
        with pytest.raises(NumericsError):
            minimize(lambda v: float("nan"), [0.0])

    def test_budget_exhausted_flag(self):
        res = minimize(rosenbrock, [-1.2, 1.0], OptimizerConfig(max_iterations=3))
        assert isinstance(res, MinimizeResult)
        assert not res.converged
        assert np.isfinite(res.value)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            OptimizerConfig(max_iterations=0)
        with pytest.raises(DomainError):
            OptimizerConfig(absolute_tolerance=0.0)
        with pytest.raises(DomainError):
            OptimizerConfig(initial_step=-1.0)
