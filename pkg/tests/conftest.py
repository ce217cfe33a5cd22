import warnings

import pytest

from levyheat import bernstein as bn
from levyheat import levy_model as lm
from levyheat.errors import AccuracyWarning

THREE_PAIRS = ([0.5, 1.25, 2.0], [1.0, 0.7, 0.3])


@pytest.fixture(autouse=True)
def _quiet_accuracy_warnings():
    # resolution diagnostics are asserted explicitly where they matter
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        yield


@pytest.fixture(scope="session")
def gauss():
    return lm.gaussian_model(1)


@pytest.fixture(scope="session")
def cauchy():
    return lm.stable_model(1.0)


@pytest.fixture(scope="session")
def unit_pair():
    return lm.symmetric_atoms_model([1.0], [0.5], name="unit-pair")


@pytest.fixture(scope="session")
def three_pairs():
    return lm.symmetric_atoms_model(*THREE_PAIRS, name="three-pairs")


@pytest.fixture(scope="session")
def semi_stable():
    return lm.semi_stable_model(1.0)


@pytest.fixture(scope="session")
def psi1():
    return bn.build_psi1(bn.power(0.75), 1)


@pytest.fixture(scope="session")
def tempered():
    return lm.tempered_model(2.0)
