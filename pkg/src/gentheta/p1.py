"""Closed-form singular differentials and Abel-map primitives on the rational
desingularisation.

With a global coordinate z, the simple-pair differential dual to the pair
(p_i1, p_ij) is ((z - p_ij)^-1 - (z - p_i1)^-1) dz (residue +1 at p_ij, -1 at
the distinguished p_i1), and the order-n generator at q = p_ij is dual to
(z - q)^(-1-n) dz.  The primitives integrate in closed form; points at
infinity are handled by the limit formulas of the same expressions rather
than by a coordinate change, so there is a single formula path.
"""

from dataclasses import dataclass, field

from .curves import is_inf
from .errors import ChartError, PoleError, ValidationError


@dataclass(frozen=True)
class SimplePair:
    """Pair form index: singular point i, non-distinguished preimage j >= 1."""

    i: int
    j: int

    def __post_init__(self):
        if self.j < 1:
            raise ValidationError("SimplePair needs a non-distinguished preimage (j >= 1)")


@dataclass(frozen=True)
class HigherOrder:
    """Higher-order form index: preimage (i, j), order slot h."""

    i: int
    j: int
    h: int


@dataclass(frozen=True)
class ChartIndex:
    """Per-coordinate trivialisation choice: which coordinates sit at infinity.

    Moving a coordinate from the finite chart to the chart at infinity
    divides a section value by exp(xi_j) (respectively zeta_i); the stored
    coordinate representative flips to its reciprocal.
    """

    xi_at_infinity: frozenset = frozenset()
    zeta_at_infinity: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "xi_at_infinity", frozenset(self.xi_at_infinity))
        object.__setattr__(self, "zeta_at_infinity", frozenset(self.zeta_at_infinity))

    @property
    def empty(self):
        return not self.xi_at_infinity and not self.zeta_at_infinity


@dataclass(frozen=True)
class AbelPoint:
    """Value of the Abel map at one point, in a fixed trivialisation chart.

    Coordinates flagged in ``chart`` are stored as their finite reciprocal
    representatives: exp(-xi_j) in the xi slots, 1/zeta_i in the zeta slots.
    Unflagged coordinates are stored directly (exp(xi_j), zeta_i).
    """

    exp_xi: tuple
    zeta: tuple
    z: tuple
    chart: ChartIndex = field(default_factory=ChartIndex)


def enumerate_pairs(curve):
    """Flat list of SimplePair indices, length M, in input order."""
    out = []
    for i, sp in enumerate(curve.singular_points):
        for j in range(1, len(sp.preimages)):
            out.append(SimplePair(i, j))
    return out


def enumerate_higher(curve):
    """Flat list of HigherOrder indices, length N, in input order."""
    out = []
    for i, sp in enumerate(curve.singular_points):
        for j in range(len(sp.preimages)):
            for h in range(len(sp.higher_orders[j])):
                out.append(HigherOrder(i, j, h))
    return out


def pair_points(curve, idx):
    """(distinguished preimage p_i1, preimage p_ij) of a SimplePair."""
    sp = curve.singular_points[idx.i]
    return sp.preimages[0], sp.preimages[idx.j]


def higher_point_order(curve, idx):
    """(pole point q, order n) of a HigherOrder index."""
    sp = curve.singular_points[idx.i]
    return sp.preimages[idx.j], sp.higher_orders[idx.j][idx.h]


def same_point(x, y):
    if is_inf(x) or is_inf(y):
        return is_inf(x) and is_inf(y)
    return x == y


def _cross_ratio(p, zero, pole, p0):
    """(p - zero)(p0 - pole) / ((p - pole)(p0 - zero)) with limit formulas.

    At most one of {p0, zero, pole} is infinite (curve validation); p may
    independently be infinite.  Callers exclude p == pole and p == zero.
    """
    if is_inf(pole):
        # (p0 - pole)/(p - pole) -> 1
        return (p - zero) / (p0 - zero)
    if is_inf(zero):
        # (p - zero)/(p0 - zero) -> 1
        return (p0 - pole) / (p - pole)
    if is_inf(p0):
        # (p0 - pole)/(p0 - zero) -> 1
        return 1.0 + 0j if is_inf(p) else (p - zero) / (p - pole)
    if is_inf(p):
        # (p - zero)/(p - pole) -> 1
        return (p0 - pole) / (p0 - zero)
    return ((p - zero) / (p0 - zero)) * ((p0 - pole) / (p - pole))


def exp_xi(curve, idx, p):
    """exp of the pair primitive, integrated from the base point p0.

    Equals (p - p_ij)(p0 - p_i1) / ((p - p_i1)(p0 - p_ij)): a degree-one map
    with a zero at p_ij, a pole at the distinguished p_i1, and value 1 at p0.
    Single-valued (only the exponential is exposed in the rational case).
    """
    p = complex(p)
    p1, pj = pair_points(curve, idx)
    if same_point(p, p1):
        raise PoleError(f"exp_xi has its pole at the distinguished preimage {p1}", point=p1, index=idx)
    if same_point(p, pj):
        return 0j
    return _cross_ratio(p, pj, p1, curve.base_point)


def exp_xi_inv(curve, idx, p):
    """exp(-xi): reciprocal representative, with zero at p_i1 and pole at p_ij."""
    p = complex(p)
    p1, pj = pair_points(curve, idx)
    if same_point(p, pj):
        raise PoleError(f"exp(-xi) has its pole at the preimage {pj}", point=pj, index=idx)
    if same_point(p, p1):
        return 0j
    return _cross_ratio(p, p1, pj, curve.base_point)


def zeta(curve, idx, p):
    """Primitive of the order-n generator at q = p_ij, vanishing at p0.

    Equals (1/n) ((p0 - q)^-n - (p - q)^-n); the (p0 - q)^-n term drops when
    the base point is at infinity.
    """
    p = complex(p)
    q, n = higher_point_order(curve, idx)
    head = 0.0 if is_inf(curve.base_point) else (curve.base_point - q) ** (-n)
    if is_inf(p):
        return (head - 0.0) / n
    if p == q:
        raise PoleError(f"zeta has a pole at the preimage {q}", point=q, index=idx)
    try:
        tail = (p - q) ** (-n)
    except (OverflowError, ZeroDivisionError) as exc:
        # (p - q)^n underflowed: the value is beyond floating range
        raise PoleError(f"zeta overflows next to the preimage {q}", point=q, index=idx) from exc
    return (head - tail) / n


def zeta_inv(curve, idx, p):
    """1/zeta, computed stably near the pole q (order-n zero there).

    1/zeta = n (p - q)^n / ((p0 - q)^-n (p - q)^n - 1); with the base point
    at infinity this is exactly -n (p - q)^n.
    """
    p = complex(p)
    q, n = higher_point_order(curve, idx)
    if is_inf(p):
        v = zeta(curve, idx, p)
        if v == 0:
            raise PoleError("zeta vanishes at infinity; 1/zeta infinite", point=p, index=idx)
        return 1.0 / v
    head = 0.0 if is_inf(curve.base_point) else (curve.base_point - q) ** (-n)
    w = (p - q) ** n
    den = head * w - 1.0
    if den == 0:
        raise PoleError("zeta vanishes here; 1/zeta infinite", point=p, index=idx)
    return n * w / den


def form_value(curve, idx, t):
    """Coefficient function of the differential at t (the quadrature integrand)."""
    t = complex(t)
    if isinstance(idx, SimplePair):
        p1, pj = pair_points(curve, idx)
        acc = 0j
        if not is_inf(pj):
            if t == pj:
                raise PoleError("t at the pole of the pair form", point=pj, index=idx)
            acc += 1.0 / (t - pj)
        if not is_inf(p1):
            if t == p1:
                raise PoleError("t at the pole of the pair form", point=p1, index=idx)
            acc -= 1.0 / (t - p1)
        return acc
    q, n = higher_point_order(curve, idx)
    if t == q:
        raise PoleError("t at the pole of the higher-order form", point=q, index=idx)
    return (t - q) ** (-1 - n)


#: magnitudes beyond this switch a coordinate to the chart at infinity
_OVERFLOW = 1e150


def abel_map_p1(curve, p, chart=None):
    """Assemble all Abel-map coordinates of p on a rational desingularisation.

    When ``chart`` is given, flagged coordinates are returned as their
    reciprocal representatives (computed from the dedicated stable closed
    forms, not by dividing).  Without a chart, coordinates are kept finite
    except when p sits at a preimage point or a value overflows the floating
    range, in which case the offending coordinates are flagged.
    """
    if curve.base_genus != 0:
        raise ValidationError("abel_map_p1 requires a rational desingularisation")
    p = complex(p)
    pairs = enumerate_pairs(curve)
    highers = enumerate_higher(curve)

    xi_flags = set() if chart is None else set(chart.xi_at_infinity)
    zeta_flags = set() if chart is None else set(chart.zeta_at_infinity)

    exp_vals = []
    for ell, idx in enumerate(pairs):
        if ell in xi_flags:
            exp_vals.append(exp_xi_inv(curve, idx, p))
            continue
        try:
            v = exp_xi(curve, idx, p)
        except PoleError:
            v = None
        if v is not None and abs(v) <= _OVERFLOW:
            exp_vals.append(v)
            continue
        if chart is not None:
            raise ChartError(f"xi coordinate {ell} is infinite but the chart keeps it finite")
        xi_flags.add(ell)
        exp_vals.append(exp_xi_inv(curve, idx, p))

    zeta_vals = []
    for ell, idx in enumerate(highers):
        if ell in zeta_flags:
            zeta_vals.append(zeta_inv(curve, idx, p))
            continue
        try:
            v = zeta(curve, idx, p)
        except PoleError:
            v = None
        if v is not None and abs(v) <= _OVERFLOW:
            zeta_vals.append(v)
            continue
        if chart is not None:
            raise ChartError(f"zeta coordinate {ell} is infinite but the chart keeps it finite")
        zeta_flags.add(ell)
        zeta_vals.append(zeta_inv(curve, idx, p))

    return AbelPoint(
        exp_xi=tuple(exp_vals),
        zeta=tuple(zeta_vals),
        z=(),
        chart=ChartIndex(frozenset(xi_flags), frozenset(zeta_flags)),
    )
