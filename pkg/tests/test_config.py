import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyheat import config as cf
from levyheat import levy_model as lm
from levyheat.errors import InvalidInputError

VALID = [
    {"variant": "discrete_atoms", "dim": 1, "atoms": [{"point": 1, "mass": 0.5}]},
    {"variant": "discrete_atoms", "dim": 2, "symmetrize": False,
     "atoms": [{"point": [1, 0], "mass": 1}, {"point": [-1, 0], "mass": 1}]},
    {"variant": "semi_stable", "dim": 1, "alpha": 1.0},
    {"variant": "radial_density", "dim": 1, "bernstein": {"kind": "power", "alpha": 0.75}},
    {"variant": "radial_density", "dim": 3, "radius": 2.0,
     "profile": {"kind": "power_law", "exponent": 3.5, "scale": 2.0}},
    {"variant": "tempered_tail", "dim": 1, "beta": 2,
     "core": {"variant": "semi_stable", "alpha": 1.5}},
    {"variant": "composite", "dim": 1, "name": "mix",
     "parts": [{"variant": "semi_stable", "alpha": 1},
               {"variant": "discrete_atoms", "atoms": [{"point": 3, "mass": 0.1}]}]},
    {"variant": "closed_form", "dim": 2, "closed_form_psi": "gaussian"},
    {"variant": "closed_form", "dim": 1, "closed_form_psi": "stable(1.5)"},
    {"variant": "closed_form", "dim": 1, "closed_form_psi": "semi_stable(1)"},
    {"variant": "closed_form", "dim": 1, "bernstein": {"kind": "log1p"}},
    {"variant": "closed_form", "dim": 1,
     "bernstein": {"kind": "triplet", "b": 0, "atoms": [[1.0, 2.0]]}},
]

INVALID = [
    {"variant": "semi_stable", "dim": 1, "alpha": 1.0, "extra": True},
    {"variant": "semi_stable", "alpha": 1.0},
    {"variant": "semi_stable", "dim": 1, "alpha": 2.5},
    {"variant": "closed_form", "dim": 1, "closed_form_psi": "cauchy"},
    {"variant": "closed_form", "dim": 1},
    {"variant": "radial_density", "dim": 1},
    {"variant": "tempered_tail", "dim": 1, "beta": 1.0},
    {"variant": "composite", "dim": 1, "parts": [{"variant": "semi_stable", "alpha": 1,
                                                 "dim": 1}]},
    {"variant": "discrete_atoms", "dim": 1, "atoms": [{"point": 1, "mass": -1}]},
    {"variant": "unknown", "dim": 1},
    [1, 2],
]


class TestSchema:
    @pytest.mark.parametrize("doc", VALID, ids=lambda d: d["variant"])
    def test_round_trip(self, doc):
        cfg = cf.parse_config(doc)
        again = cf.parse_config(cf.dump_config(cfg))
        assert again == cfg
        assert again.canonical == cfg.canonical
        assert again.sha256 == cfg.sha256

    @pytest.mark.parametrize("doc", VALID, ids=lambda d: d["variant"])
    def test_builds(self, doc):
        m = cf.parse_config(doc).build()
        assert m.dim == doc["dim"]
        pts = np.zeros((1, m.dim))
        pts[0, 0] = 0.7
        assert m._psi(pts)[0] > 0

    @pytest.mark.parametrize("doc", INVALID, ids=range(len(INVALID)))
    def test_rejects(self, doc):
        with pytest.raises(InvalidInputError):
            cf.parse_config(doc).build()

    def test_unknown_key_is_named(self):
        with pytest.raises(InvalidInputError, match="extra"):
            cf.parse_config(VALID[2] | {"extra": 1})

    def test_key_order_does_not_change_hash(self):
        a = cf.parse_config('{"variant":"semi_stable","dim":1,"alpha":1.0}')
        b = cf.parse_config('{"alpha":1.0,"dim":1,"variant":"semi_stable"}')
        assert a.sha256 == b.sha256

    def test_bad_json(self):
        with pytest.raises(InvalidInputError):
            cf.parse_config("{not json")

    def test_load_missing(self, tmp_path):
        with pytest.raises(InvalidInputError):
            cf.load_config(tmp_path / "missing.json")

    @settings(max_examples=30, deadline=None)
    @given(alpha=st.floats(min_value=0.05, max_value=1.95),
           name=st.text(min_size=1, max_size=8))
    def test_round_trip_property(self, alpha, name):
        cfg = cf.parse_config({"variant": "semi_stable", "dim": 1, "alpha": alpha, "name": name})
        assert cf.parse_config(json.loads(cf.dump_config(cfg))) == cfg


class TestModels:
    def test_closed_form_takes_precedence(self):
        m = cf.parse_config({"variant": "semi_stable", "dim": 1, "alpha": 1.0,
                             "closed_form_psi": "gaussian"}).build()
        assert m._psi(np.array([[3.0]]))[0] == 9.0
        assert isinstance(m.measure, lm.SemiStableAtoms)

    def test_semi_stable_closed_form_matches_measure(self):
        a = cf.parse_config({"variant": "closed_form", "dim": 1,
                             "closed_form_psi": "semi_stable(1)"}).build()
        b = lm.semi_stable_model(1.0)
        for xi in (0.3, 5.0):
            assert lm.cumulant(a, xi) == lm.cumulant(b, xi)

    def test_bernstein_tags(self):
        assert cf.parse_bernstein_tag("power(0.75)").alpha == 0.75
        assert cf.parse_bernstein_tag("log1p").kind == "log1p"
        with pytest.raises(InvalidInputError):
            cf.parse_bernstein_tag("gamma(2)")

    def test_semi_stable_must_be_1d(self):
        with pytest.raises(InvalidInputError):
            cf.parse_config({"variant": "semi_stable", "dim": 2, "alpha": 1.0}).build()
