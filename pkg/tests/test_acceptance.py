"""Acceptance gate: one test per criterion, each printing a pass line with
the worst observed residual at its stated tolerance."""

import numpy as np
import pytest

from conftest import TAU, random_period_data
from oracles import gl_segment

from gentheta.curves import INF, CurveSpec, SingularPoint, genus_accounting
from gentheta.harness import (
    contour_closure_rational,
    find_zeros_rational,
    find_zeros_torus,
    random_shifts,
    verify_abel_theorem,
)
from gentheta.p1 import ChartIndex, HigherOrder, SimplePair, abel_map_p1
from gentheta.periods import (
    build_period_data,
    lattice_nearest,
    parse_period_data,
    serialize_period_data,
    torus_form_value,
)
from gentheta.sections import (
    ShiftParams,
    check_lemma3,
    gen_theta_rational,
    quasi_periodicity_residual,
)
from gentheta.theta import check_lemma2


def report(criterion, text, worst):
    print(f"PASS criterion {criterion}: {text}: worst {worst:.3e}")


def test_criterion_1_pullback_coefficients(x5y2):
    """Translated-section pullback on the quintic cusp curve reproduces the
    quartic coefficient pattern (b2, 0, 3 b1, 3 b1 b2) to 1e-12 relative."""
    rng = np.random.default_rng(2001)
    chart = ChartIndex(zeta_at_infinity=frozenset({0, 1}))
    sample = 0.5 * np.exp(2j * np.pi * np.arange(4) / 4)  # 4-point interpolation
    V = np.vander(sample, 5, increasing=True)[:, 1:]  # columns z, z^2, z^3, z^4
    worst = 0.0
    for _ in range(20):
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        shift = ShiftParams(a=(), b=tuple(b), lam=())
        vals = []
        for z in sample:
            ap = abel_map_p1(x5y2, z, chart=chart)
            vals.append(gen_theta_rational(x5y2, ap, shift, chart).value)
        coeffs = np.linalg.solve(V, np.array(vals) - 1.0)
        want = np.array([b[0], 0.0, 3 * b[1], 3 * b[0] * b[1]])
        scale = np.maximum(np.abs(want), 1.0)
        worst = max(worst, float(np.max(np.abs(coeffs - want) / scale)))
        assert np.all(np.abs(coeffs - want) <= 1e-12 * scale)
    report(1, "quartic pullback coefficients (20 random shifts)", worst)


def test_criterion_2_nodal_endpoint_values(nodal_cubic):
    """Translated nodal section evaluates to -1 over the finite preimage and
    a^-1 over the infinite one, to 1e-14."""
    rng = np.random.default_rng(2002)
    worst = 0.0
    for _ in range(20):
        a = np.exp(rng.normal(scale=0.5) + 1j * rng.normal(scale=0.5))
        shift = ShiftParams(a=(a,), b=(), lam=())
        at_zero = abel_map_p1(nodal_cubic, 0.0)
        v0 = gen_theta_rational(nodal_cubic, at_zero, shift, at_zero.chart).value
        at_inf = abel_map_p1(nodal_cubic, INF)
        v1 = gen_theta_rational(nodal_cubic, at_inf, shift, at_inf.chart).value
        r0 = abs(v0 + 1.0)
        r1 = abs(v1 - 1.0 / a) / abs(1.0 / a)
        worst = max(worst, r0, r1)
        assert r0 <= 1e-14 and r1 <= 1e-14
    report(2, "nodal endpoint values -1 and 1/a", worst)


def test_criterion_3_quasi_periodicity_suite():
    """Lemma residuals and node/cusp B-shift identities < 1e-8 over 50 seeded
    fixtures with base genus 1 and 2 (genus 2 period data via the file
    format)."""
    rng = np.random.default_rng(2003)
    worst = 0.0
    for k in range(50):
        g = 1 + k % 2
        pd_direct = random_period_data(rng, g, 1, 1)
        # route the data through the document format (the only gate at g = 2)
        pd = parse_period_data(serialize_period_data(pd_direct))
        z = rng.normal(scale=0.4, size=g) + 1j * rng.normal(scale=0.2, size=g)
        alpha = int(rng.integers(g))
        W3 = rng.normal(size=(3, g)) + 1j * rng.normal(size=(3, g))
        for size in range(4):  # lemma 2, |I| <= 3
            worst = max(worst, check_lemma2(tuple(range(size)), alpha, z, pd.Z, W3))
        pd_cusps = random_period_data(rng, g, 0, 2)
        ze2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        worst = max(worst, check_lemma3(ze2, z, pd_cusps, alpha))  # lemma 3
        shift = ShiftParams(
            a=(np.exp(rng.normal(scale=0.5) + 1j * rng.normal(scale=0.5)),),
            b=(rng.normal() + 1j * rng.normal(),),
            lam=tuple(0.1 * (rng.normal(size=g) + 1j * rng.normal(size=g))),
        )
        xi = rng.normal() + 1j * rng.normal()
        ze = rng.normal() + 1j * rng.normal()
        worst = max(
            worst, quasi_periodicity_residual([xi], [ze], z, pd, shift, alpha)
        )  # lemma 4 (M = N = 1)
        pd_node = random_period_data(rng, g, 1, 0)
        shift_n = ShiftParams(a=shift.a, b=(), lam=shift.lam)
        worst = max(
            worst, quasi_periodicity_residual([xi], [], z, pd_node, shift_n, alpha)
        )  # node B-shift
        pd_cusp = random_period_data(rng, g, 0, 1)
        shift_c = ShiftParams(a=(), b=shift.b, lam=shift.lam)
        worst = max(
            worst, quasi_periodicity_residual([], [ze], z, pd_cusp, shift_c, alpha)
        )  # cusp B-shift
        assert worst < 1e-8
    report(3, "lemma 2/3/4 and B-shift residuals, 50 fixtures", worst)


def test_criterion_4_reciprocity(torus_node, torus_cusp2):
    """Constructed genus-1 periods satisfy Y = 2 pi i nu exactly; integrated
    B-periods of the primitives match Y and W within 1e-8."""
    pdn = build_period_data(torus_node)
    assert np.all(pdn.Y == 2j * np.pi * pdn.nu)  # exact by construction
    u0 = 0.93 + 0.02j
    worst = 0.0
    got = gl_segment(
        lambda t: torus_form_value(torus_node, SimplePair(0, 1), t), u0, u0 + TAU, panels=96
    )
    k = np.round(((got - pdn.Y[0, 0]) / (2j * np.pi)).real)
    r = abs(got - pdn.Y[0, 0] - 2j * np.pi * k)
    worst = max(worst, r)
    assert r < 1e-8
    pdc = build_period_data(torus_cusp2)
    for h in range(2):
        got = gl_segment(
            lambda t: torus_form_value(torus_cusp2, HigherOrder(0, 0, h), t),
            u0,
            u0 + TAU,
            panels=96,
        )
        r = abs(got - pdc.W[0, h])
        worst = max(worst, r)
        assert r < 1e-8
    report(4, "reciprocity Y = 2 pi i nu and integrated B-periods", worst)


def test_criterion_5_zero_counts(nodal_cubic, cusp1, cusp3, x5y2,
                                 torus_node, node_pd, torus_cusp, cusp_pd):
    """50 random generic shifts per fixture give exactly the degree-oracle
    count (rational) and base-genus + M + N zeros (torus node/cusp)."""
    for curve in (nodal_cubic, cusp1, cusp3, x5y2):
        rep = genus_accounting(curve)
        for shift in random_shifts(rep.M, rep.N, 0, 50, seed=2005):
            zs = find_zeros_rational(curve, shift)
            assert zs.total_count == rep.section_degree
    # the quintic fixture gives 4 (degree oracle); the arithmetic-genus count
    # of 2 disagrees because of the order-3 generator - logged, not hidden
    rep = genus_accounting(x5y2)
    assert rep.section_degree == 4 and rep.g_arith == 2
    print(
        "note criterion 5: x5y2 zero count follows the degree oracle "
        f"({rep.section_degree}), not the arithmetic genus ({rep.g_arith})"
    )
    for tc, pd, M, N in ((torus_node, node_pd, 1, 0), (torus_cusp, cusp_pd, 0, 1)):
        for shift in random_shifts(M, N, 1, 50, seed=2005):
            zs = find_zeros_torus(tc, pd, shift)
            assert zs.total_count == 1 + M + N
    report(5, "zero counts over 50 shifts x 6 fixtures", 0.0)


def test_criterion_6_abel_invariance(nodal_cubic, cusp1, cusp3, x5y2,
                                     torus_node, node_pd, torus_cusp, cusp_pd,
                                     smooth_torus, smooth_pd):
    """Corrected D-vector deviation across 10 shifts < 1e-6 per fixture,
    with the node theta-ratio and cusp C(lambda) corrections subtracted."""
    worst = 0.0
    for curve in (nodal_cubic, cusp1, cusp3, x5y2):
        rep = genus_accounting(curve)
        rep_report = verify_abel_theorem(
            curve, None, random_shifts(rep.M, rep.N, 0, 10, seed=2006)
        )
        worst = max(worst, rep_report.max_deviation)
        assert rep_report.max_deviation < 1e-6
    for tc, pd, M, N in (
        (torus_node, node_pd, 1, 0),
        (torus_cusp, cusp_pd, 0, 1),
        (smooth_torus, smooth_pd, 0, 0),
    ):
        rep_report = verify_abel_theorem(tc, pd, random_shifts(M, N, 1, 10, seed=2006))
        worst = max(worst, rep_report.max_deviation)
        assert rep_report.max_deviation < 1e-6
    report(6, "kappa invariance across 10 shifts x 7 fixtures", worst)


def test_criterion_7_classical_limit(smooth_torus, smooth_pd):
    """Smooth-torus runs reproduce the classical theorem: the single zero's
    Abel image minus lambda is shift-independent to 1e-8."""
    shifts = random_shifts(0, 0, 1, 10, seed=2007)
    images = []
    for shift in shifts:
        zs = find_zeros_torus(smooth_torus, smooth_pd, shift)
        (q, m), = zs.zeros
        assert m == 1
        images.append((q - smooth_torus.base_point) - shift.lam[0])
    worst = 0.0
    for v in images[1:]:
        worst = max(worst, abs(lattice_nearest(v - images[0], TAU)))
    assert worst < 1e-8
    report(7, "classical single-zero invariance on the smooth torus", worst)


def test_criterion_8_contour_bookkeeping(nodal_cubic, cusp1, cusp3, x5y2):
    """Total C + D contour sums < 1e-7 absolute on every rational fixture."""
    worst = 0.0
    for curve in (nodal_cubic, cusp1, cusp3, x5y2):
        rep = genus_accounting(curve)
        shift = random_shifts(rep.M, rep.N, 0, 1, seed=2008)[0]
        closure = contour_closure_rational(curve, shift)
        for fam, vals in closure.items():
            for v in vals:
                worst = max(worst, v)
                assert v < 1e-7, (fam, vals)
    report(8, "contour C+D closure on rational fixtures", worst)
