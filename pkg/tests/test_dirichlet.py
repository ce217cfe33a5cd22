import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyheat import bernstein as bn
from levyheat import dirichlet as dr
from levyheat import levy_model as lm
from levyheat.errors import AccuracyWarning, FeatureUnavailableError, InvalidInputError

GRID = dr.DirichletGrid(n=4096, L=32.0)
centers = st.floats(min_value=-3.0, max_value=3.0)
widths = st.floats(min_value=0.3, max_value=2.5)


def random_family(seed, count=10):
    rng = np.random.default_rng(seed)
    makers = (dr.gaussian, dr.bump, dr.hat)
    return [makers[k % 3](float(rng.uniform(-2, 2)), float(rng.uniform(0.4, 2.0)))
            for k in range(count)]


class TestFunctions:
    def test_gaussian_diff_is_accurate(self):
        u = dr.gaussian(0.3, 0.7)
        x = np.linspace(-3, 3, 7)
        y = 1e-9
        exact = u(x) * np.expm1(-(2 * (x - 0.3) * y + y * y) / (2 * 0.49))
        np.testing.assert_allclose(u.diff(x, y), exact, rtol=1e-12)

    def test_bump_support_and_diff(self):
        u = dr.bump(0.0, 1.0)
        assert u(np.array([1.0, -1.0, 1.5])).tolist() == [0.0, 0.0, 0.0]
        x = np.linspace(-1.2, 1.2, 97)
        np.testing.assert_allclose(u.diff(x, 0.3), u(x + 0.3) - u(x), atol=1e-15)
        assert np.all(np.isfinite(u.diff(x, 0.999)))

    def test_fourier_of_gaussian(self):
        # u = exp(-x^2/2)  ->  u^ = (2 pi)^{-1} sqrt(2 pi) exp(-xi^2/2)
        xi, uh = dr.gaussian(0.0, 1.0).fourier(GRID)
        ref = np.exp(-xi**2 / 2) / math.sqrt(2 * math.pi)
        np.testing.assert_allclose(uh.real, ref, atol=1e-14)
        np.testing.assert_allclose(uh.imag, 0.0, atol=1e-14)

    def test_fourier_round_trip(self):
        u = dr.bump(0.5, 1.5)
        vals = u.samples(GRID)
        _, uh = GRID.fourier(vals)
        phase = np.exp(-1j * GRID.xi * GRID.L)
        back = np.fft.irfft(uh * phase * 2 * math.pi / GRID.h, GRID.n)
        np.testing.assert_allclose(back, vals, atol=1e-10)

    def test_invalid_width(self):
        with pytest.raises(InvalidInputError):
            dr.gaussian(0.0, 0.0)


class TestFormEquivalence:
    @pytest.mark.parametrize("u", random_family(1), ids=lambda u: u.label)
    def test_three_pairs(self, three_pairs, u):
        a = dr.form_spectral(three_pairs, u, GRID)
        b = dr.form_difference(three_pairs, u, GRID)
        assert a == pytest.approx(b, rel=1e-10)

    @pytest.mark.parametrize("name", ["semi_stable", "psi1"])
    def test_infinite_activity(self, request, name):
        m = request.getfixturevalue(name)
        for u in (dr.gaussian(0.2, 0.8), dr.bump(-0.5, 1.3)):
            a = dr.form_spectral(m, u, GRID)
            b = dr.form_difference(m, u, GRID)
            assert a == pytest.approx(b, rel=1e-7)

    def test_gaussian_channel_energy(self, gauss):
        # psi = xi^2: E(u, u) = \int u'^2 dx = sqrt(pi) / 2 for exp(-x^2/2)
        assert dr.form_spectral(gauss, dr.gaussian(0.0, 1.0), GRID) == pytest.approx(
            math.sqrt(math.pi) / 2, rel=1e-12)

    def test_raw_normalisation(self, gauss):
        u = dr.gaussian(0.0, 1.0)
        raw = dr.form_spectral(gauss, u, GRID, normalization="raw")
        assert 2 * math.pi * raw == pytest.approx(dr.form_spectral(gauss, u, GRID), rel=1e-14)

    @settings(max_examples=15, deadline=None)
    @given(c=centers, w=widths, a=st.floats(min_value=-3, max_value=3))
    def test_quadratic_scaling(self, c, w, a):
        m = lm.symmetric_atoms_model([0.5, 1.25, 2.0], [1.0, 0.7, 0.3])
        u = dr.gaussian(c, w)
        e = dr.form_difference(m, u, GRID)
        assert e >= 0
        assert dr.form_difference(m, dr.scaled(u, a), GRID) == pytest.approx(a * a * e,
                                                                             rel=1e-12,
                                                                             abs=1e-300)

    @settings(max_examples=15, deadline=None)
    @given(c=centers, w=widths, s=st.floats(min_value=-4.0, max_value=4.0))
    def test_translation_invariance(self, c, w, s):
        m = lm.symmetric_atoms_model([0.5, 1.25, 2.0], [1.0, 0.7, 0.3])
        a = dr.form_difference(m, dr.gaussian(c, w), GRID)
        b = dr.form_difference(m, dr.gaussian(c + s, w), GRID)
        assert a == pytest.approx(b, rel=1e-9)

    def test_closed_form_has_no_difference_form(self, gauss):
        with pytest.raises(FeatureUnavailableError):
            dr.form_difference(gauss, dr.gaussian(), GRID)

    def test_spectral_tail_warning(self, three_pairs):
        with pytest.warns(AccuracyWarning):
            dr.form_spectral_detail(three_pairs, dr.hat(0.0, 1.0), dr.DirichletGrid(256, 32.0))


class TestCarreDuChamp:
    @pytest.mark.parametrize("name", ["three_pairs", "semi_stable", "psi1"])
    def test_identity(self, request, name):
        m = request.getfixturevalue(name)
        # smooth pairs: kinks of hat functions defeat the fixed jump-size rule
        fam = dr.default_family(6, seed=7)
        for f, h in zip(fam[::2], fam[1::2]):
            res = dr.cdc_identity_check(m, f, h, GRID)
            assert res.residual <= 1e-6 * res.scale

    def test_raw_residual_reflects_factor_two(self, three_pairs):
        res = dr.cdc_identity_check(three_pairs, dr.gaussian(0, 1), dr.gaussian(0.5, 1), GRID)
        g = res.terms["int h Gamma(f,f)"]
        assert res.raw_residual == pytest.approx(abs(g), rel=1e-9)

    def test_pointwise_gamma_for_atoms(self, unit_pair):
        u = dr.gaussian(0.0, 1.0)
        x = np.array([0.0, 0.7])
        ref = 0.5 * 0.5 * ((u(x + 1) - u(x)) ** 2 + (u(x - 1) - u(x)) ** 2)
        np.testing.assert_allclose(lm.gamma_op(unit_pair, u, x), ref, rtol=1e-14)


class TestNash:
    def test_psi1_constant_stable_under_refinement(self, psi1):
        fam = dr.default_family(12, seed=0)
        grid = dr.grid_for(fam, psi1, n=4096)
        a = dr.nash_check(psi1, bn.power(0.75), 0.0, fam, grid)
        b = dr.nash_check(psi1, bn.power(0.75), 0.0, fam, grid.refined())
        assert a.finite
        assert abs(b.worst_C0 / a.worst_C0 - 1) <= 0.10

    def test_stable_channel_scale_free(self):
        # psi = |xi|^{3/2} = f(xi^2) with f = power(3/4): C0 is dilation invariant for gaussians
        m = lm.stable_model(1.5)
        fam = [dr.gaussian(0.0, s) for s in (0.5, 1.0, 2.0)]
        # |xi|^{3/2} is not smooth at 0, so the frequency spacing 2 pi / 2L limits accuracy
        rep = dr.nash_check(m, bn.power(0.75), 0.0, fam, dr.DirichletGrid(65536, 512.0))
        c0 = [r["C0"] for r in rep.rows]
        np.testing.assert_allclose(c0, c0[0], rtol=1e-5)

    def test_delta_reduces_constant(self, psi1):
        fam = dr.default_family(4, seed=3)
        grid = dr.grid_for(fam, psi1)
        a = dr.nash_check(psi1, bn.power(0.75), 0.0, fam, grid)
        b = dr.nash_check(psi1, bn.power(0.75), 1.0, fam, grid)
        assert b.worst_C0 < a.worst_C0

    def test_zero_function_is_skipped(self):
        m = lm.symmetric_atoms_model([1.0], [1.0])
        # the zero function is skipped rather than reported with C0 = 0/0
        rep = dr.nash_check(m, bn.power(0.5), 0.0, [dr.constant_zero()], GRID)
        assert rep.rows == []

    def test_negative_delta(self, psi1):
        with pytest.raises(InvalidInputError):
            dr.nash_check(psi1, bn.power(0.75), -1.0, [dr.gaussian()])

    def test_consistency_helper(self, psi1):
        fam = dr.default_family(4, seed=3)
        rep = dr.nash_check(psi1, bn.power(0.75), 0.0, fam)
        out = dr.nash_on_diagonal_consistency(rep, 1.0)
        assert out["consistent"]

    def test_default_family_is_deterministic(self):
        a = [u.label for u in dr.default_family(12, seed=5)]
        b = [u.label for u in dr.default_family(12, seed=5)]
        assert a == b and len(set(a)) == 12
