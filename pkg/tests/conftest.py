import numpy as np
import pytest

from gentheta.curves import INF, CurveSpec, SingularPoint
from gentheta.periods import PeriodData, TorusCurve, build_period_data
from gentheta.theta import RiemannMatrix

TAU = 0.3 + 1.1j


@pytest.fixture
def nodal_cubic():
    return CurveSpec(0, (SingularPoint((INF, 0), ((), ())),), 1)


@pytest.fixture
def cusp1():
    return CurveSpec(0, (SingularPoint((0,), ((1,),)),), INF)


@pytest.fixture
def cusp3():
    return CurveSpec(0, (SingularPoint((0,), ((3,),)),), INF)


@pytest.fixture
def x5y2():
    return CurveSpec(0, (SingularPoint((0,), ((1, 3),)),), INF)


@pytest.fixture
def mixed_rational():
    """One node pair and one order-2 generator at the non-distinguished preimage."""
    return CurveSpec(0, (SingularPoint((0, 1), ((), (2,))),), -2)


@pytest.fixture
def two_point_rational():
    """Two singular points: a finite pair and a separate order-1 cusp."""
    return CurveSpec(
        0,
        (
            SingularPoint((1, -1), ((), ())),
            SingularPoint((0.5j,), ((1,),)),
        ),
        2,
    )


@pytest.fixture
def torus_node():
    return TorusCurve(
        tau=TAU,
        singular_points=(SingularPoint((0.21 + 0.13j, 0.52 + 0.64j), ((), ())),),
        base_point=0.05 + 0.81j,
    )


@pytest.fixture
def torus_cusp():
    return TorusCurve(
        tau=TAU,
        singular_points=(SingularPoint((0.4 + 0.33j,), ((1,),)),),
        base_point=0.05 + 0.81j,
    )


@pytest.fixture
def torus_cusp2():
    return TorusCurve(
        tau=TAU,
        singular_points=(SingularPoint((0.4 + 0.33j,), ((1, 2),)),),
        base_point=0.05 + 0.81j,
    )


@pytest.fixture
def smooth_torus():
    return TorusCurve(tau=TAU, singular_points=(), base_point=0.05 + 0.81j)


@pytest.fixture
def smooth_pd():
    return PeriodData(
        Z=RiemannMatrix([[TAU]]),
        Y=np.zeros((1, 0)),
        W=np.zeros((1, 0)),
        nu=np.zeros((1, 0)),
    )


@pytest.fixture
def node_pd(torus_node):
    return build_period_data(torus_node)


@pytest.fixture
def cusp_pd(torus_cusp):
    return build_period_data(torus_cusp)


def random_riemann_matrix(rng, g):
    """Random symmetric matrix with safely positive definite imaginary part."""
    A = rng.normal(size=(g, g))
    im = A @ A.T + np.eye(g) * (0.8 + rng.uniform(0.0, 0.7))
    re = rng.normal(scale=0.3, size=(g, g))
    re = (re + re.T) / 2.0
    return RiemannMatrix(re + 1j * im)


def random_period_data(rng, g, M, N, w_scale=0.8):
    Z = random_riemann_matrix(rng, g)
    nu = 0.3 * (rng.normal(size=(g, M)) + 1j * rng.normal(size=(g, M)))
    W = w_scale * (rng.normal(size=(g, N)) + 1j * rng.normal(size=(g, N)))
    return PeriodData(Z=Z, Y=2j * np.pi * nu, W=W, nu=nu)
