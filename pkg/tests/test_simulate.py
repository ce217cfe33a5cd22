import math

import numpy as np
import pytest
from scipy import stats

from levyheat import levy_model as lm
from levyheat import simulate as sm
from levyheat.errors import FeatureUnavailableError, InvalidInputError


class TestPlan:
    def test_requires_truncation_for_infinite_activity(self, semi_stable):
        with pytest.raises(InvalidInputError):
            sm.SamplePlan(semi_stable, 1.0, 10)

    @pytest.mark.parametrize("kw", [dict(t=0.0, n=10), dict(t=1.0, n=0),
                                    dict(t=1.0, n=10, compensation="exact")])
    def test_invalid(self, unit_pair, kw):
        with pytest.raises(InvalidInputError):
            sm.SamplePlan(unit_pair, **kw)

    def test_sidecar(self, unit_pair):
        meta = sm.SamplePlan(unit_pair, 1.0, 5, seed=3).sidecar()
        assert meta["seed"] == 3 and meta["N"] == 5 and meta["dtype"] == "<f8"


class TestSampling:
    def test_deterministic_and_seed_dependent(self, semi_stable):
        plan = sm.SamplePlan(semi_stable, 1.0, 3000, seed=11, eps=2.0**-10)
        a = sm.sample_increments(plan)
        b = sm.sample_increments(plan)
        c = sm.sample_increments(sm.SamplePlan(semi_stable, 1.0, 3000, seed=12, eps=2.0**-10))
        assert a.tobytes() == b.tobytes()
        assert a.tobytes() != c.tobytes()

    def test_atoms_moments(self, unit_pair):
        x = sm.sample_increments(sm.SamplePlan(unit_pair, 2.0, 200000, seed=1))
        # X = N+ - N-, N+- ~ Poisson(1): integer valued, variance 2
        assert np.all(x == np.round(x))
        assert x.var() == pytest.approx(2.0, rel=0.02)

    def test_gaussian_channel(self, gauss):
        x = sm.sample_increments(sm.SamplePlan(gauss, 0.5, 100000, seed=2))
        assert stats.kstest(x, "norm", args=(0, 1.0)).pvalue > 1e-3

    def test_semi_stable_variance(self, semi_stable):
        x = sm.sample_increments(sm.SamplePlan(semi_stable, 1.0, 200000, seed=5, eps=2.0**-12))
        assert x.var() == pytest.approx(4.0, rel=0.02)

    def test_compensation_restores_variance(self, semi_stable):
        eps = 2.0**-2
        full = sm.sample_increments(sm.SamplePlan(semi_stable, 1.0, 200000, seed=6, eps=eps))
        bare = sm.sample_increments(sm.SamplePlan(semi_stable, 1.0, 200000, seed=6, eps=eps,
                                                  compensation="none"))
        assert full.var() == pytest.approx(4.0, rel=0.02)
        assert bare.var() == pytest.approx(4.0 - lm.SemiStableAtoms(1.0).tail_variance(3),
                                           rel=0.02)

    def test_psi1_variance(self, psi1):
        x = sm.sample_increments(sm.SamplePlan(psi1, 1.0, 100000, seed=8, eps=0.02))
        assert x.var() == pytest.approx(psi1.second_moment_matrix[0, 0], rel=0.03)

    def test_stable_channel_unsupported(self, cauchy):
        with pytest.raises(FeatureUnavailableError):
            sm.sample_increments(sm.SamplePlan(cauchy, 1.0, 10))


class TestComparison:
    def test_semi_stable_against_fourier(self, semi_stable):
        plan = sm.SamplePlan(semi_stable, 1.0, 100000, seed=9, eps=2.0**-16)
        res = sm.empirical_vs_fourier(plan)
        assert res["ks_distance"] <= 2 * res["ks_critical_95"]

    def test_tempered_with_core(self):
        m = lm.tempered_model(2.0, lm.SemiStableAtoms(1.0))
        plan = sm.SamplePlan(m, 0.5, 50000, seed=10, eps=2.0**-14)
        res = sm.empirical_vs_fourier(plan)
        assert res["ks_distance"] <= 0.01


class TestPersistence:
    def test_round_trip(self, semi_stable, tmp_path):
        plan = sm.SamplePlan(semi_stable, 1.0, 1000, seed=1, eps=2.0**-8)
        x = sm.sample_increments(plan)
        path = tmp_path / "s.bin"
        sm.save_samples(path, x, plan, extra={"note": "x"})
        y, meta = sm.load_samples(path)
        assert np.array_equal(x, y)
        assert meta["note"] == "x" and meta["N"] == 1000
        assert path.stat().st_size == 8 * 1000
        assert path.read_bytes() == np.asarray(x, dtype="<f8").tobytes()
