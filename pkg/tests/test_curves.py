import json

import numpy as np
import pytest

from gentheta.curves import (
    INF,
    CurveSpec,
    SingularPoint,
    genus_accounting,
    is_inf,
    parse_curve_spec,
    serialize_curve_spec,
)
from gentheta.errors import ParseError, ValidationError

NODAL_DOC = """
{
  "base_genus": 0,
  "base_point": [1.0, 0.0],
  "singular_points": [
    {"preimages": ["inf", [0.0, 0.0]], "higher_orders": [[], []]}
  ]
}
"""

CUSP_DOC = """
{
  "base_genus": 0,
  "base_point": "inf",
  "singular_points": [
    {"preimages": [[0.0, 0.0]], "higher_orders": [[1]]}
  ]
}
"""


def test_parse_nodal_document():
    curve = parse_curve_spec(NODAL_DOC)
    rep = genus_accounting(curve)
    assert (rep.M, rep.N) == (1, 0)
    assert is_inf(curve.singular_points[0].preimages[0])
    assert curve.base_point == 1.0


def test_parse_cusp_document():
    curve = parse_curve_spec(CUSP_DOC)
    rep = genus_accounting(curve)
    assert (rep.M, rep.N) == (0, 1)
    assert is_inf(curve.base_point)


def test_smooth_genus1_is_valid():
    curve = CurveSpec(1, (), 0.2 + 0.1j, tau=0.3 + 1.1j)
    rep = genus_accounting(curve)
    assert (rep.M, rep.N, rep.g_arith, rep.section_degree) == (0, 0, 1, 1)


def test_genus_accounting_nodal(nodal_cubic):
    rep = genus_accounting(nodal_cubic)
    assert (rep.g_tilde, rep.M, rep.N, rep.g_arith, rep.section_degree) == (0, 1, 0, 1, 1)


def test_genus_accounting_x5y2(x5y2):
    rep = genus_accounting(x5y2)
    assert (rep.g_tilde, rep.M, rep.N, rep.g_arith) == (0, 0, 2, 2)
    # degree oracle: the explicit pullback polynomial has exactly this many roots
    b1, b2 = 0.7 + 0.2j, -0.4 + 0.9j
    poly = [3 * b1 * b2, 3 * b1, 0.0, b2, 1.0]  # 1 + b2 z + 3 b1 z^3 + 3 b1 b2 z^4
    assert rep.section_degree == len(np.roots(poly[::-1])) == 4


def test_genus_accounting_genus1_node():
    curve = CurveSpec(
        1,
        (SingularPoint((0.1 + 0.1j, 0.5 + 0.3j), ((), ())),),
        0.7 + 0.2j,
        tau=0.2 + 1.3j,
    )
    rep = genus_accounting(curve)
    assert (rep.g_tilde, rep.M, rep.N, rep.g_arith, rep.section_degree) == (1, 1, 0, 2, 2)


def test_parse_serialize_round_trip(x5y2, nodal_cubic, mixed_rational):
    for curve in (x5y2, nodal_cubic, mixed_rational):
        again = parse_curve_spec(serialize_curve_spec(curve))
        assert again == curve
    torus = CurveSpec(
        1, (SingularPoint((0.2 + 0.1j,), ((1, 2),)),), 0.6 + 0.4j, tau=0.3 + 1.1j
    )
    assert parse_curve_spec(serialize_curve_spec(torus)) == torus


def test_genus_accounting_permutation_invariance():
    sp1 = SingularPoint((1.0, 2.0, 3.0), ((), (1,), (2,)))
    sp2 = SingularPoint((5.0,), ((1, 4),))
    a = genus_accounting(CurveSpec(0, (sp1, sp2), -1.0))
    b = genus_accounting(CurveSpec(0, (sp2, sp1), -1.0))
    assert a == b
    # permuting the non-distinguished preimages (and their order lists) too
    sp1_perm = SingularPoint((1.0, 3.0, 2.0), ((), (2,), (1,)))
    c = genus_accounting(CurveSpec(0, (sp1_perm, sp2), -1.0))
    assert a == c


def test_duplicate_preimages_rejected():
    with pytest.raises(ValidationError, match="collide"):
        CurveSpec(0, (SingularPoint((1.0, 1.0), ((), ())),), 0.0)
    with pytest.raises(ValidationError, match="collide"):
        CurveSpec(0, (SingularPoint((1.0, 2.0), ((), ())),), 1.0)  # base point clash


def test_single_preimage_needs_higher_orders():
    with pytest.raises(ValidationError, match="not singular"):
        SingularPoint((1.0,), ((),)).validate()


def test_orders_strictly_increasing():
    with pytest.raises(ValidationError, match="increasing"):
        SingularPoint((1.0,), ((3, 1),)).validate()
    with pytest.raises(ValidationError, match="positive"):
        SingularPoint((1.0,), ((0,),)).validate()


def test_two_infinite_preimages_rejected():
    with pytest.raises(ValidationError):
        CurveSpec(
            0,
            (
                SingularPoint((INF, 0.0), ((), ())),
                SingularPoint((INF, 1.0), ((), ())),
            ),
            2.0,
        )


def test_infinity_needs_rational_base():
    with pytest.raises(ValidationError, match="infinity"):
        CurveSpec(1, (SingularPoint((INF, 0.0), ((), ())),), 1.0, tau=1j)


def test_higher_orders_at_infinity_rejected():
    with pytest.raises(ValidationError, match="infinite preimage"):
        SingularPoint((INF,), ((1,),)).validate()


def test_tau_required_for_genus1():
    with pytest.raises(ValidationError, match="tau"):
        CurveSpec(1, (), 0.0)
    with pytest.raises(ValidationError, match="imaginary"):
        CurveSpec(1, (), 0.0, tau=1.0 - 0.5j)


def test_parse_errors_name_the_field():
    with pytest.raises(ParseError, match="JSON"):
        parse_curve_spec("{not json")
    with pytest.raises(ParseError, match="base_genus"):
        parse_curve_spec('{"base_point": [0,0], "singular_points": []}')
    with pytest.raises(ParseError, match="base_point"):
        parse_curve_spec('{"base_genus": 0, "base_point": "nope", "singular_points": []}')
    with pytest.raises(ParseError, match="unknown field"):
        parse_curve_spec('{"base_genus": 0, "base_point": [0,0], "singular_points": [], "extra": 1}')
    doc = json.loads(NODAL_DOC)
    doc["singular_points"][0]["higher_orders"] = [[1.5], []]
    with pytest.raises(ParseError, match="integers"):
        parse_curve_spec(json.dumps(doc))
