import numpy as np
import pytest

from weyllab import curvature, metrics, recurrence

EXAMPLE_POINT = np.array([0.3, 0.7, 0.2, 0.1, 0.4])

BRINKMANN_EXP = {"p": {"kind": "exp"}, "q": {"kind": "exp"}}
BRINKMANN_NULL = {"p": {"kind": "exp"}, "q": {"kind": "poly", "coeffs": [0.0, 0.0, 1.0]}}
GALAEV_PARAMS = {"a": {"kind": "poly", "coeffs": [0.0, 1.0]},
                 "F": {"kind": "exp"}, "lam": [1.0, -1.0, 0.0]}


def sample_points(seed: int, count: int, n: int, lo: float = 0.1, hi: float = 1.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(count, n))


def pack_at(spec: metrics.MetricSpec, point):
    m = metrics.evaluate(spec, np.asarray(point, dtype=float))
    return curvature.curvature_pack(m)


def recurrence_at(pack):
    return recurrence.extract_alpha(pack.weyl, pack.nabla_weyl, pack.m,
                                    riemann=pack.riemann)


@pytest.fixture(scope="session")
def brinkmann_spec():
    return metrics.MetricSpec("brinkmann_pq", 5, BRINKMANN_EXP)


@pytest.fixture(scope="session")
def brinkmann_pack(brinkmann_spec):
    return pack_at(brinkmann_spec, EXAMPLE_POINT)


@pytest.fixture(scope="session")
def brinkmann_null_spec():
    return metrics.MetricSpec("brinkmann_pq", 5, BRINKMANN_NULL)


@pytest.fixture(scope="session")
def brinkmann_null_pack(brinkmann_null_spec):
    return pack_at(brinkmann_null_spec, EXAMPLE_POINT)


@pytest.fixture(scope="session")
def galaev_spec():
    return metrics.MetricSpec("galaev", 5, GALAEV_PARAMS)


@pytest.fixture(scope="session")
def galaev_pack(galaev_spec):
    return pack_at(galaev_spec, np.array([0.5, 0.4, 0.3, 0.7, 0.9]))


@pytest.fixture(scope="session")
def flat_spec():
    return metrics.MetricSpec("flat", 5, {"signature": "lorentzian"})


@pytest.fixture(scope="session")
def flat_pack(flat_spec):
    return pack_at(flat_spec, np.zeros(5))


@pytest.fixture(scope="session")
def constcurv_spec():
    return metrics.MetricSpec("constcurv", 5, {"curvature": 0.7})


@pytest.fixture(scope="session")
def constcurv_pack(constcurv_spec):
    return pack_at(constcurv_spec, np.array([0.2, -0.1, 0.3, 0.05, -0.25]))
