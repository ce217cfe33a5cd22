import math
import warnings

import numpy as np
import pytest

from levyheat import bernstein as bn
from levyheat import bounds as bd
from levyheat import levy_model as lm
from levyheat.errors import PreconditionError, RegimeError, RegimeWarning


class TestOffDiagonal:
    @pytest.mark.parametrize("t", [0.25, 1.0])
    def test_semi_stable(self, semi_stable, t):
        rep = bd.off_diagonal_check(semi_stable, t, np.arange(0.0, 6.01, 0.5))
        assert rep.verdict, rep.summary()
        assert rep.worst_slack <= 1e-8 * rep.fits["p0"]

    def test_gaussian_is_tight_at_origin(self, gauss):
        rep = bd.off_diagonal_check(gauss, 1.0, [0.0, 1.0, 2.0])
        assert rep.rows[0]["slack"] == 0.0
        assert rep.verdict

    def test_requires_exponential_moments(self, cauchy):
        with pytest.raises(PreconditionError):
            bd.off_diagonal_check(cauchy, 1.0, [1.0])

    def test_summary_and_csv(self, semi_stable):
        rep = bd.off_diagonal_check(semi_stable, 1.0, [0.0, 1.0])
        assert rep.summary()["verdict"] == "pass"
        assert len(list(rep.csv_rows())) == 2


class TestOnDiagonal:
    def test_cauchy_relation(self, cauchy):
        rep = bd.on_diagonal_fit(cauchy, bn.power(0.5), [0.05, 0.1, 0.25, 0.5, 1.0])
        assert rep.fits["gamma"] == 1.0
        assert rep.fits["c"] == pytest.approx(1 / math.pi, rel=1e-6)
        assert rep.verdict

    def test_psi1_fit_covers_times(self, psi1):
        rep = bd.on_diagonal_fit(psi1, bn.power(0.75), [0.05, 0.1, 0.25, 0.5, 1.0])
        assert rep.verdict
        assert 0 < rep.fits["gamma"] <= 1
        assert all(r["lhs"] <= r["rhs"] * (1 + 1e-12) for r in rep.rows)

    def test_linear_term_rejected(self, gauss):
        with pytest.raises(PreconditionError):
            bd.on_diagonal_fit(gauss, bn.power(1.0), [1.0])


class TestCombined:
    def test_psi1(self, psi1):
        rep = bd.combined_bound_check(psi1, bn.power(0.75), 0.5, np.arange(0.0, 4.01, 0.5))
        assert rep.verdict, rep.summary()

    def test_time_restriction(self, psi1):
        with pytest.raises(PreconditionError):
            bd.combined_bound_check(psi1, bn.power(0.75), 2.0, [0.0])


class TestCompactRateBound:
    def test_closed_form_minimum(self):
        c1, eps, t, x = 0.8, 0.2, 1.0, 8.0
        xi = np.linspace(0, 10, 200001)
        brute = np.min(-xi * x + c1 * t * np.exp((1 + eps) * xi))
        assert bd.example_i_rate_bound(c1, eps, t, x) == pytest.approx(brute, abs=1e-8)

    def test_regime(self):
        with pytest.raises(RegimeError):
            bd.example_i_rate_bound(1.0, 0.2, 1.0, 1.0)

    def test_rate_dominates_bound(self, psi1):
        from levyheat.rate import rate_function
        c1 = bd.fit_c1(psi1, 0.2)
        for x in (4.0, 8.0):
            assert -rate_function(psi1, 1.0, x).D_sq <= bd.example_i_rate_bound(c1, 0.2, 1.0, x)

    def test_c1_methods(self, psi1):
        sharp = bd.fit_c1(psi1, 0.2)
        crude = bd.fit_c1(psi1, 0.2, method="moment")
        assert 0 < sharp <= crude

    def test_unbounded_for_wide_tails(self, tempered):
        with pytest.raises(PreconditionError):
            bd.fit_c1(tempered, 0.2)


class TestLaplace:
    def test_beta_two(self):
        lc = bd.laplace_constants(2.0)
        assert lc.c1 == 0.25
        assert lc.xi_power == 0.0
        assert lc.c2 == pytest.approx(math.sqrt(math.pi))

    def test_beta_three(self):
        assert bd.laplace_constants(3.0).c1 == pytest.approx(2 / 3 ** 1.5, rel=1e-15)

    @pytest.mark.parametrize("beta", [1.5, 2.0, 3.0])
    def test_asymptotic_ratio(self, beta):
        from scipy import integrate
        lc = bd.laplace_constants(beta)
        xi = 40.0
        y0 = (xi / beta) ** (1 / (beta - 1))
        hmax = xi * y0 - y0**beta
        val, _ = integrate.quad(lambda y: math.exp(xi * y - y**beta - hmax), 1.0, 4 * y0 + 10,
                                points=[y0], limit=200)
        ratio = math.exp(math.log(val) + hmax - lc.log_asymptotic(xi))
        assert ratio == pytest.approx(1.0, abs=0.05)

    def test_regime_warning(self):
        with pytest.warns(RegimeWarning):
            bd.laplace_constants(1.02)
        with pytest.raises(PreconditionError):
            bd.laplace_constants(1.0)


class TestTemperedAsymptotics:
    def test_ratio_trend(self, tempered):
        rep = bd.example_iii_asymptotics_check(tempered, 1.0, [20.0, 40.0, 80.0])
        assert rep.ratio_trend_ok
        assert rep.last_deviation <= 0.15

    def test_below_regime_rows_are_flagged(self, tempered):
        rep = bd.example_iii_asymptotics_check(tempered, 1.0, [5.0, 20.0])
        assert rep.rows[0]["flag"] == "below-regime"

    def test_needs_beta(self, semi_stable):
        with pytest.raises(PreconditionError):
            bd.example_iii_asymptotics_check(semi_stable, 1.0, [20.0])
