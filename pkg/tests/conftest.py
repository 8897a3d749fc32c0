import numpy as np
import pytest

from scripts.make_fixtures import henon_fixture, logistic_fixture, sine_fixture, write_series
from symchaos.series_io import ScalarSeries
from symchaos.state_model import reference_model


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_polyline(rng, count=40, n=2):
    """Random walk with a drift, so arc length and principal axes are well defined."""
    steps = rng.standard_normal((count, n)) + np.linspace(0.5, 1.5, n)
    return np.cumsum(steps, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def logistic_series():
    return ScalarSeries(logistic_fixture(5000), label="logistic")


@pytest.fixture(scope="session")
def henon_series():
    return ScalarSeries(henon_fixture(5000), label="henon")


@pytest.fixture(scope="session")
def sine_series():
    return ScalarSeries(sine_fixture(), label="sine")


@pytest.fixture
def fixture_csvs(tmp_path):
    paths = {
        "logistic": tmp_path / "logistic.csv",
        "sine": tmp_path / "sine.csv",
        "henon": tmp_path / "henon.csv",
    }
    write_series(logistic_fixture(5000), paths["logistic"])
    write_series(sine_fixture(), paths["sine"])
    write_series(henon_fixture(5000), paths["henon"])
    return paths


@pytest.fixture
def model():
    return reference_model()
