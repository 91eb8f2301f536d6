import math

import numpy as np
import pytest
from scipy import integrate, stats

from simodiff.specfun import LOG_ZERO, log_bessel_i, log_ncx2_pdf, q_function

# ln I_nu(x) reference values frozen from a 50-digit arbitrary-precision
# evaluation of the ascending power series.
BESSEL_ORACLE = [
    (0, 0.5, 0.06154971918548131),
    (1, 2.0, 0.4641344735461597),
    (5, 10.0, 6.6556826458550455),
    (9, 25.0, 20.841847869751433),
    (16, 3.0, -24.05254756333178),
    (64, 100.0, 76.83924111117382),
    (2, 0.001, -15.894952016310777),
    # orders where the scaled Bessel underflows and the series path runs
    (64, 1.0, -249.5257729966904),
    (300, 5.0, -1139.9978669769773),
    (1024, 10.0, -4430.123072463524),
]


class TestQFunction:
    def test_symmetry_point(self):
        assert q_function(0.0) == 0.5

    def test_frozen_value(self):
        # 0.5 * erfc(1/sqrt(2)) from an arbitrary-precision oracle
        assert q_function(1.0) == pytest.approx(0.15865525393145705, rel=1e-14)

    def test_far_tail(self):
        assert 0.0 <= q_function(40.0) < 1e-300

    def test_monotone_nonincreasing(self):
        x = np.linspace(-10, 10, 201)
        q = q_function(x)
        assert np.all(np.diff(q) <= 0)

    def test_array_and_scalar_types(self):
        assert isinstance(q_function(1.0), float)
        assert q_function(np.array([0.0, 1.0])).shape == (2,)


class TestLogBesselI:
    @pytest.mark.parametrize("nu,x,expected", BESSEL_ORACLE)
    def test_frozen_oracle(self, nu, x, expected):
        assert log_bessel_i(nu, x) == pytest.approx(expected, rel=1e-10)

    def test_zero_argument(self):
        assert log_bessel_i(0, 0.0) == 0.0
        assert log_bessel_i(1, 0.0) == LOG_ZERO
        assert log_bessel_i(7, 0.0) == LOG_ZERO

    def test_never_overflows(self):
        v = log_bessel_i(0, 1e8)
        assert math.isfinite(v)
        # leading asymptotics ln I_0(x) ~ x - ln sqrt(2 pi x)
        assert v == pytest.approx(1e8 - 0.5 * math.log(2 * math.pi * 1e8), rel=1e-9)

    def test_recurrence_property(self):
        # I_{nu-1}(x) - I_{nu+1}(x) = (2 nu / x) I_nu(x)
        for nu in (1, 2, 5, 9):
            for x in (0.7, 3.0, 12.0, 40.0):
                lhs = math.exp(log_bessel_i(nu - 1, x)) - math.exp(log_bessel_i(nu + 1, x))
                rhs = 2 * nu / x * math.exp(log_bessel_i(nu, x))
                assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            log_bessel_i(0, -1.0)
        with pytest.raises(ValueError):
            log_bessel_i(-1, 1.0)
        with pytest.raises(ValueError):
            log_bessel_i(2000, 1.0)

    def test_array_input(self):
        x = np.array([0.0, 1.0, 5.0])
        out = log_bessel_i(2, x)
        assert out.shape == (3,)
        assert out[0] == LOG_ZERO


class TestLogNcx2Pdf:
    def test_origin_m1_central(self):
        assert log_ncx2_pdf(0.0, 1, 0.0) == pytest.approx(math.log(0.5))

    def test_origin_higher_m(self):
        assert log_ncx2_pdf(0.0, 3, 0.0) == LOG_ZERO
        assert log_ncx2_pdf(0.0, 3, 2.0) == LOG_ZERO

    @pytest.mark.parametrize("m,lam", [(1, 0.5), (4, 10.0), (16, 120.0)])
    def test_matches_scipy_ncx2(self, m, lam):
        # independent route: scipy's noncentral chi-squared with 2m degrees
        # of freedom and unit-variance components
        t = np.linspace(0.05, 30 * m, 400)
        ours = log_ncx2_pdf(t, m, lam)
        ref = stats.ncx2.logpdf(t, df=2 * m, nc=lam)
        np.testing.assert_allclose(ours, ref, rtol=1e-10, atol=1e-10)

    @pytest.mark.parametrize("m", [1, 2, 4])
    def test_central_limit_matches_scipy_chi2(self, m):
        t = np.linspace(0.05, 20 * m, 200)
        np.testing.assert_allclose(
            log_ncx2_pdf(t, m, 0.0), stats.chi2.logpdf(t, df=2 * m), rtol=1e-12
        )

    def test_normalization_by_quadrature(self):
        m, lam = 4, 10.0
        total, err = integrate.quad(
            lambda t: math.exp(log_ncx2_pdf(t, m, lam)), 0.0, 400.0, limit=200
        )
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            log_ncx2_pdf(1.0, 0, 1.0)
        with pytest.raises(ValueError):
            log_ncx2_pdf(1.0, 1, -1.0)
        with pytest.raises(ValueError):
            log_ncx2_pdf(-1.0, 1, 1.0)
