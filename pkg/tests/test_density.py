import math

import numpy as np
import pytest

from levyheat import bernstein as bn
from levyheat import density as dn
from levyheat import levy_model as lm
from levyheat.errors import InvalidInputError, NoDensityError


def gauss_pdf(x, t):
    return np.exp(-np.square(x) / (4 * t)) / math.sqrt(4 * math.pi * t)


class TestOracles:
    @pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
    def test_gaussian(self, gauss, t):
        g = dn.density_grid(gauss, t, x_max=6.0)
        x, p = g.window(5.0)
        np.testing.assert_allclose(p, gauss_pdf(x, t), rtol=0, atol=1e-12)
        assert g.at_origin == pytest.approx(1 / math.sqrt(4 * math.pi * t), rel=1e-12)

    def test_cauchy(self, cauchy):
        g = dn.density_grid(cauchy, 1.0, x_max=6.0)
        x, p = g.window(5.0)
        np.testing.assert_allclose(p, 1 / (math.pi * (1 + x * x)), rtol=0, atol=1e-7)
        assert g.at_origin == pytest.approx(1 / math.pi, rel=1e-8)

    def test_off_node_interpolation(self, gauss):
        g = dn.density_grid(gauss, 1.0, x_max=6.0)
        x = np.linspace(-5.0, 5.0, 201) + 0.013
        np.testing.assert_allclose(g.value_at(x), gauss_pdf(x, 1.0), rtol=0, atol=1e-9)

    def test_subordinate_log1p(self):
        # exp(-2 log(1 + xi^2)) inverts to (1 + |x|) e^{-|x|} / 4
        m = lm.subordinate_model(bn.log1p())
        g = dn.density_grid(m, 2.0, x_max=6.0)
        x, p = g.window(5.0)
        np.testing.assert_allclose(p, (1 + np.abs(x)) * np.exp(-np.abs(x)) / 4, atol=1e-8)

    def test_gaussian_2d(self):
        m = lm.gaussian_model(2)
        g = dn.density_grid(m, 1.0, x_max=4.0)
        x, p = g.window(3.0)
        X, Y = np.meshgrid(x, x, indexing="ij")
        np.testing.assert_allclose(p, np.exp(-(X**2 + Y**2) / 4) / (4 * math.pi), atol=1e-10)

    def test_pointwise_inversion(self, cauchy, semi_stable):
        assert dn.density_at(cauchy, 1.0, 2.0) == pytest.approx(1 / (5 * math.pi), rel=1e-8)
        g = dn.density_grid(semi_stable, 1.0, x_max=4.0)
        assert dn.density_at(semi_stable, 1.0, 3.0) == pytest.approx(g.value_at(3.0), abs=1e-10)


class TestGridInvariants:
    @pytest.mark.parametrize("name", ["semi_stable", "psi1", "gauss", "cauchy"])
    def test_mass_symmetry_positivity(self, request, name):
        g = dn.density_grid(request.getfixturevalue(name), 0.5, x_max=5.0)
        assert g.diagnostics["mass"] == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(g.values, g.values[::-1][np.r_[-1, : g.values.size - 1]]
                                   if g.values.size % 2 == 0 else g.values[::-1], atol=1e-14)
        assert np.all(g.values >= 0)

    def test_dyadic_points_are_nodes(self, semi_stable):
        g = dn.density_grid(semi_stable, 1.0, x_max=6.0)
        for x in (0.0, 0.5, 2.0, 5.25):
            assert g.node_index(x) is not None

    def test_peak_at_origin(self, psi1):
        g = dn.density_grid(psi1, 1.0, x_max=3.0)
        assert g.peak == g.at_origin

    def test_cdf_function(self, gauss):
        from scipy import special
        g = dn.density_grid(gauss, 1.0, x_max=10.0)
        F = g.cdf_function()
        x = np.array([-3.0, -0.3, 0.0, 1.7])
        np.testing.assert_allclose(F(x), 0.5 * special.erfc(-x / 2), atol=1e-11)

    def test_csv(self, gauss, tmp_path):
        g = dn.density_grid(gauss, 1.0, x_max=3.0)
        path = tmp_path / "p.csv"
        g.to_csv(path, x_max=2.0, extra_header=["# note"])
        rows = [ln.split(",") for ln in path.read_text().splitlines()
                if not ln.startswith("#")]
        assert rows[0] == ["x", "p"]
        table = {float(a): float(b) for a, b in rows[1:]}
        assert table[0.0] == pytest.approx(0.2820947918, abs=1e-10)
        assert path.read_text().startswith("# note\n#t=1.0")


class TestSemigroup:
    @pytest.mark.parametrize("name", ["gauss", "cauchy", "psi1", "semi_stable"])
    def test_chapman_kolmogorov(self, request, name):
        res = dn.semigroup_check(request.getfixturevalue(name), 0.5, 0.25, x_max=6.0)
        assert res["residual"] <= 1e-9


class TestErrors:
    def test_compound_poisson_has_no_density(self, unit_pair):
        with pytest.raises(NoDensityError):
            dn.density_grid(unit_pair, 1.0)

    def test_log_growth_at_small_time(self):
        m = lm.subordinate_model(bn.log1p())
        with pytest.raises(NoDensityError):
            dn.density_grid(m, 0.25)

    def test_bad_time(self, gauss):
        with pytest.raises(InvalidInputError):
            dn.density_grid(gauss, -1.0)

    def test_outside_grid(self, gauss):
        g = dn.density_grid(gauss, 1.0, x_max=3.0)
        with pytest.raises(InvalidInputError):
            g.value_at(1e6)

    def test_frequency_cutoff_grows_as_t_shrinks(self, psi1):
        assert dn.frequency_cutoff(psi1, 0.1) > dn.frequency_cutoff(psi1, 1.0)
