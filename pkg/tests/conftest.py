import numpy as np
import pytest

from quadgeo import checks, gauss_map as gm, legendre as lg


@pytest.fixture(scope="session")
def ellipsoid65():
    return checks.make_ellipsoid(65)


@pytest.fixture(scope="session")
def ellipsoid_lift65(ellipsoid65):
    return lg.lie_lift(ellipsoid65)


@pytest.fixture(scope="session")
def ellipsoid_gauss65(ellipsoid_lift65):
    return gm.conformal_gauss(ellipsoid_lift65)


@pytest.fixture(scope="session")
def torus65():
    return checks.make_torus(65)


@pytest.fixture(scope="session")
def torus_lift65(torus65):
    return lg.lie_lift(torus65)


@pytest.fixture(scope="session")
def torus_gauss65(torus_lift65):
    return gm.conformal_gauss(torus_lift65)


@pytest.fixture(scope="session")
def quadric_lift65():
    return lg.proj_lift(checks.make_quadric(65))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
