import numpy as np
import pytest

from conftest import TAU, random_period_data

from gentheta.curves import CurveSpec, SingularPoint
from gentheta.errors import ChartError, SizeError
from gentheta.p1 import ChartIndex, abel_map_p1
from gentheta.periods import PeriodData, abel_map_torus, build_period_data
from gentheta.sections import (
    ShiftParams,
    check_lemma3,
    gen_theta_cusp,
    gen_theta_from_abel,
    gen_theta_general,
    gen_theta_node,
    gen_theta_rational,
    quasi_periodicity_residual,
    transition,
)
from gentheta.theta import RiemannMatrix, riemann_theta, theta_D


def test_x5y2_pullback_product(x5y2):
    b = (0.31 - 0.24j, 0.45 + 0.37j)
    shift = ShiftParams(a=(), b=b, lam=())
    chart = ChartIndex(zeta_at_infinity=frozenset({0, 1}))
    for z in (0.2 + 0.1j, -0.4 + 0.3j, 0.05j):
        ap = abel_map_p1(x5y2, z, chart=chart)
        tv = gen_theta_rational(x5y2, ap, shift, chart)
        want = (1 + b[0] * z) * (1 + 3 * b[1] * z**3)
        assert abs(tv.value - want) < 1e-12 * abs(want)


def test_base_point_vanishing(nodal_cubic):
    shift = ShiftParams(a=(1.0,), b=(), lam=())
    ap = abel_map_p1(nodal_cubic, nodal_cubic.base_point)
    tv = gen_theta_rational(nodal_cubic, ap, shift, ap.chart)
    assert tv.value == 0


def test_nodal_endpoint_values(nodal_cubic):
    from gentheta.curves import INF

    a = 2.3 - 1.1j
    shift = ShiftParams(a=(a,), b=(), lam=())
    at_zero = abel_map_p1(nodal_cubic, 0.0)
    v0 = gen_theta_rational(nodal_cubic, at_zero, shift, at_zero.chart)
    assert v0.chart.empty and abs(v0.value + 1.0) < 1e-14
    at_inf = abel_map_p1(nodal_cubic, INF)
    v1 = gen_theta_rational(nodal_cubic, at_inf, shift, at_inf.chart)
    assert v1.chart.xi_at_infinity == frozenset({0})
    assert abs(v1.value - 1.0 / a) < 1e-14 * abs(1.0 / a)


def test_chart_mismatch_raises(nodal_cubic):
    from gentheta.curves import INF

    at_inf = abel_map_p1(nodal_cubic, INF)
    with pytest.raises(ChartError):
        gen_theta_rational(nodal_cubic, at_inf, ShiftParams(a=(1.5,), b=(), lam=()), ChartIndex())


def test_chart_cocycle(mixed_rational):
    shift = ShiftParams(a=(1.2 + 0.4j,), b=(0.3 - 0.5j,), lam=())
    p = 0.7 + 0.4j
    charts = [
        ChartIndex(),
        ChartIndex(xi_at_infinity=frozenset({0})),
        ChartIndex(zeta_at_infinity=frozenset({0})),
        ChartIndex(frozenset({0}), frozenset({0})),
    ]
    ap = abel_map_p1(mixed_rational, p)
    values = [gen_theta_rational(mixed_rational, ap, shift, c) for c in charts]
    for tv_from in values:
        for chart_to, tv_to in zip(charts, values):
            moved = transition(tv_from, ap, chart_to)
            assert abs(moved.value - tv_to.value) < 1e-12 * abs(tv_to.value)
    # three-chart composition is the identity
    t01 = transition(values[0], ap, charts[1])
    t12 = transition(t01, ap, charts[2])
    t20 = transition(t12, ap, charts[0])
    assert abs(t20.value - values[0].value) < 1e-12 * abs(values[0].value)


def test_node_constructed_zero(node_pd):
    # pick xi so the two summands cancel: exp(xi) = -theta(z-lam)/theta(z-lam+nu)
    shift = ShiftParams(a=(1.0,), b=(), lam=(0.0,))
    z = np.array([0.13 + 0.21j])
    nu = node_pd.nu[:, 0]
    ratio = -riemann_theta(z, node_pd.Z) / riemann_theta(z + nu, node_pd.Z)
    xi = np.log(ratio)
    val = gen_theta_node(xi, z, node_pd, shift)
    assert abs(val) < 1e-12


def test_cusp_constructed_zero(cusp_pd):
    lam = 0.07 - 0.04j
    z = np.array([0.29 + 0.11j])
    zeta = 0.4 - 0.9j
    arg = z - lam
    b = theta_D((0,), arg, cusp_pd.Z, cusp_pd.w_rows()) / riemann_theta(arg, cusp_pd.Z) + zeta
    shift = ShiftParams(a=(), b=(complex(b),), lam=(lam,))
    assert abs(gen_theta_cusp(zeta, z, cusp_pd, shift)) < 1e-12


def test_node_b_shift_random(node_pd):
    rng = np.random.default_rng(23)
    for _ in range(10):
        shift = ShiftParams(
            a=(np.exp(rng.normal(scale=0.5) + 1j * rng.normal(scale=0.5)),),
            b=(),
            lam=(0.2 * (rng.normal() + 1j * rng.normal()),),
        )
        xi = rng.normal() + 1j * rng.normal()
        z = np.array([rng.normal(scale=0.4) + 1j * rng.normal(scale=0.2)])
        r = quasi_periodicity_residual([xi], [], z, node_pd, shift, 0)
        assert r < 1e-9


def test_cusp_b_shift_random(cusp_pd):
    rng = np.random.default_rng(31)
    for _ in range(10):
        shift = ShiftParams(
            a=(),
            b=(rng.normal() + 1j * rng.normal(),),
            lam=(0.2 * (rng.normal() + 1j * rng.normal()),),
        )
        ze = rng.normal() + 1j * rng.normal()
        z = np.array([rng.normal(scale=0.4) + 1j * rng.normal(scale=0.2)])
        assert quasi_periodicity_residual([], [ze], z, cusp_pd, shift, 0) < 1e-9


def test_general_specializes_to_node_and_cusp(node_pd, cusp_pd):
    shift_n = ShiftParams(a=(1.3 - 0.4j,), b=(), lam=(0.11 + 0.07j,))
    xi, z = 0.37 - 0.22j, np.array([0.19 + 0.23j])
    vn = gen_theta_node(xi, z, node_pd, shift_n)
    vg = gen_theta_general([xi], [], z, node_pd, shift_n).value
    assert abs(vn - vg) < 1e-12 * abs(vn)
    shift_c = ShiftParams(a=(), b=(0.5 + 0.2j,), lam=(0.11 + 0.07j,))
    ze = 0.6 - 0.8j
    vc = gen_theta_cusp(ze, z, cusp_pd, shift_c)
    vg = gen_theta_general([], [ze], z, cusp_pd, shift_c).value
    assert abs(vc - vg) < 1e-12 * abs(vc)


def test_general_reduces_to_classical(smooth_pd):
    lam = 0.21 - 0.13j
    z = np.array([0.4 + 0.27j])
    shift = ShiftParams(a=(), b=(), lam=(lam,))
    got = gen_theta_general([], [], z, smooth_pd, shift).value
    want = riemann_theta(z - lam, smooth_pd.Z)
    assert abs(got - want) < 1e-13 * abs(want)


def test_lemma4_random_fixtures():
    rng = np.random.default_rng(37)
    for k in range(20):
        g = 1 + k % 2
        pd = random_period_data(rng, g, 1, 1)
        shift = ShiftParams(
            a=(np.exp(rng.normal(scale=0.5) + 1j * rng.normal(scale=0.5)),),
            b=(rng.normal() + 1j * rng.normal(),),
            lam=tuple(0.1 * (rng.normal(size=g) + 1j * rng.normal(size=g))),
        )
        xi = rng.normal() + 1j * rng.normal()
        ze = rng.normal() + 1j * rng.normal()
        z = rng.normal(scale=0.4, size=g) + 1j * rng.normal(scale=0.2, size=g)
        alpha = int(rng.integers(g))
        assert quasi_periodicity_residual([xi], [ze], z, pd, shift, alpha) < 1e-8


def test_lemma3_cuspidal_sum():
    rng = np.random.default_rng(43)
    for g in (1, 2):
        pd = random_period_data(rng, g, 0, 2)
        z = rng.normal(scale=0.4, size=g) + 1j * rng.normal(scale=0.2, size=g)
        ze = rng.normal(size=2) + 1j * rng.normal(size=2)
        for alpha in range(g):
            assert check_lemma3(ze, z, pd, alpha) < 1e-8


def test_degenerate_genus0_bridge():
    # with an empty base Jacobian the subset sum collapses to a product;
    # the a -> -a substitution aligns it with the standard product section
    pd0 = PeriodData(
        Z=RiemannMatrix(np.zeros((0, 0))),
        Y=np.zeros((0, 2)),
        W=np.zeros((0, 1)),
        nu=np.zeros((0, 2)),
    )
    rng = np.random.default_rng(47)
    for _ in range(5):
        xi = rng.normal(size=2) + 1j * rng.normal(size=2)
        ze = rng.normal() + 1j * rng.normal()
        a = np.exp(rng.normal(size=2) + 1j * rng.normal(size=2))
        b = rng.normal() + 1j * rng.normal()
        shift_neg = ShiftParams(a=tuple(-a), b=(b,), lam=())
        got = gen_theta_general(xi, [ze], [], pd0, shift_neg).value
        product = np.prod(np.exp(xi) / a - 1.0) * (ze - b)
        assert abs(got - (-1) ** 2 * product) < 1e-12 * abs(product)


def test_a_period_invariance_in_z():
    rng = np.random.default_rng(53)
    pd = random_period_data(rng, 2, 1, 1)
    shift = ShiftParams(a=(1.1 + 0.3j,), b=(0.2 - 0.4j,), lam=(0.05, 0.02j))
    xi, ze = 0.3 + 0.1j, -0.4 + 0.6j
    z = rng.normal(size=2) + 1j * rng.normal(scale=0.3, size=2)
    base = gen_theta_general([xi], [ze], z, pd, shift).value
    for a in range(2):
        e = np.zeros(2)
        e[a] = 1.0
        moved = gen_theta_general([xi], [ze], z + e, pd, shift).value
        assert abs(moved - base) < 1e-10 * abs(base)


def test_subset_cap():
    g = 1
    M, N = 9, 8
    rng = np.random.default_rng(59)
    pd = random_period_data(rng, g, M, N)
    shift = ShiftParams(a=(1.0,) * M, b=(0.0,) * N, lam=(0.0,))
    with pytest.raises(SizeError):
        gen_theta_general([0.0] * M, [0.0] * N, [0.1j], pd, shift)


def test_gen_theta_from_abel_chart_division(torus_node, node_pd):
    u = 0.66 + 0.31j
    ap = abel_map_torus(torus_node, u)
    shift = ShiftParams(a=(1.2 - 0.3j,), b=(), lam=(0.05 + 0.02j,))
    plain = gen_theta_from_abel(ap, node_pd, shift)
    up = gen_theta_from_abel(ap, node_pd, shift, ChartIndex(xi_at_infinity=frozenset({0})))
    assert abs(up.value * ap.exp_xi[0] - plain.value) < 1e-12 * abs(plain.value)
