"""Singular-curve descriptions and genus/degree accounting.

A curve is described by its desingularisation data: the genus of the smooth
model, the preimages of each singular point (with the first listed preimage
acting as the distinguished reference for residue conventions), pole-order
generators carried by each preimage, and a base point for the Abel map.

Documents are JSON.  Complex scalars are 2-element arrays ``[re, im]``; the
string ``"inf"`` denotes the point at infinity and is accepted for at most
one preimage (or the base point) when the smooth model is rational.
"""

import cmath
import json
import math
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

INF = complex(math.inf, 0.0)

#: points closer than this are considered to collide during validation
POINT_COLLISION_TOL = 1e-12


def is_inf(z):
    return isinstance(z, complex) and (math.isinf(z.real) or math.isinf(z.imag))


@dataclass(frozen=True)
class SingularPoint:
    """One singular point, given by its preimages on the smooth model.

    ``preimages[0]`` is the distinguished reference preimage: simple-pole
    pair differentials carry residue -1 there and +1 at the others, so the
    listed order is semantically meaningful.  ``higher_orders[j]`` lists the
    pole-order generators at ``preimages[j]`` (the dual differential has
    polar part ``z**(-1-n) dz``), strictly increasing.
    """

    preimages: tuple
    higher_orders: tuple

    def __post_init__(self):
        object.__setattr__(self, "preimages", tuple(complex(p) for p in self.preimages))
        object.__setattr__(
            self, "higher_orders", tuple(tuple(int(n) for n in hs) for hs in self.higher_orders)
        )

    def validate(self):
        if len(self.preimages) < 1:
            raise ValidationError("singular point needs at least one preimage")
        if len(self.higher_orders) != len(self.preimages):
            raise ValidationError(
                "higher_orders must list one (possibly empty) order list per preimage: "
                f"got {len(self.higher_orders)} lists for {len(self.preimages)} preimages"
            )
        if len(self.preimages) == 1 and not any(self.higher_orders):
            raise ValidationError(
                "a single-preimage point with no higher-order generators is not singular"
            )
        for j, orders in enumerate(self.higher_orders):
            if any(n < 1 for n in orders):
                raise ValidationError(f"pole orders must be positive, got {orders} at preimage {j}")
            if any(b <= a for a, b in zip(orders, orders[1:])):
                raise ValidationError(
                    f"pole orders at one preimage must be strictly increasing, got {orders}"
                )
            if orders and is_inf(self.preimages[j]):
                raise ValidationError(
                    "higher-order generators at the infinite preimage are not supported: "
                    "the polar-part normalization is tied to the finite coordinate"
                )


@dataclass(frozen=True)
class CurveSpec:
    """Desingularisation data of an irreducible singular curve."""

    base_genus: int
    singular_points: tuple
    base_point: complex
    tau: complex = None

    def __post_init__(self):
        object.__setattr__(self, "singular_points", tuple(self.singular_points))
        object.__setattr__(self, "base_point", complex(self.base_point))
        if self.tau is not None:
            object.__setattr__(self, "tau", complex(self.tau))
        self.validate()

    def validate(self):
        if self.base_genus < 0:
            raise ValidationError("base_genus must be non-negative")
        if self.base_genus == 1:
            if self.tau is None:
                raise ValidationError("tau is required when base_genus = 1")
            if self.tau.imag <= 0:
                raise ValidationError(f"tau must have positive imaginary part, got {self.tau}")
        elif self.tau is not None:
            raise ValidationError("tau is only meaningful when base_genus = 1")

        for sp in self.singular_points:
            sp.validate()

        points = [self.base_point]
        labels = ["base point p0"]
        for i, sp in enumerate(self.singular_points):
            for j, p in enumerate(sp.preimages):
                points.append(p)
                labels.append(f"preimage ({i},{j})")

        n_inf = sum(1 for p in points if is_inf(p))
        if n_inf > 0 and self.base_genus != 0:
            raise ValidationError("the point at infinity is only allowed when base_genus = 0")
        if sum(1 for p in points[1:] if is_inf(p)) > 1:
            raise ValidationError("at most one preimage may be the point at infinity")

        for k in range(len(points)):
            for l in range(k + 1, len(points)):
                a, b = points[k], points[l]
                if is_inf(a) and is_inf(b):
                    raise ValidationError(f"{labels[k]} and {labels[l]} are both infinite")
                if is_inf(a) or is_inf(b):
                    continue
                if abs(a - b) <= POINT_COLLISION_TOL:
                    raise ValidationError(f"{labels[k]} and {labels[l]} collide at {a}")


@dataclass(frozen=True)
class GenusReport:
    """Genus and zero-count bookkeeping for a curve.

    ``section_degree`` is the total zero count of a generic translated
    pulled-back theta section (the degree oracle: one zero per simple pair
    plus ``n`` per order-``n`` generator plus the base genus).  It exceeds
    ``g_arith`` exactly when some pole order is > 1; both counts are
    reported because they disagree in that case.
    """

    g_tilde: int
    M: int
    N: int
    g_arith: int
    section_degree: int


def genus_accounting(curve):
    """Count the multiplicative/additive Jacobian directions of a curve.

    M counts the C* directions (one per non-distinguished preimage), N the C
    directions (one per pole-order generator).
    """
    M = sum(len(sp.preimages) - 1 for sp in curve.singular_points)
    N = sum(len(hs) for sp in curve.singular_points for hs in sp.higher_orders)
    order_sum = sum(n for sp in curve.singular_points for hs in sp.higher_orders for n in hs)
    g = curve.base_genus
    return GenusReport(
        g_tilde=g,
        M=M,
        N=N,
        g_arith=g + M + N,
        section_degree=g + M + order_sum,
    )


def _complex_from_json(obj, where):
    if obj == "inf":
        return INF
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        try:
            return complex(float(obj[0]), float(obj[1]))
        except (TypeError, ValueError):
            pass
    raise ParseError(f"field '{where}': expected [re, im] or \"inf\", got {obj!r}")


def _complex_to_json(z):
    if is_inf(z):
        return "inf"
    return [z.real, z.imag]


def parse_curve_spec(text):
    """Parse a curve-spec document (JSON text) into a validated CurveSpec."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("curve-spec document must be a JSON object")

    unknown = set(doc) - {"base_genus", "base_point", "tau", "singular_points"}
    if unknown:
        raise ParseError(f"unknown field(s): {sorted(unknown)}")
    for name in ("base_genus", "base_point", "singular_points"):
        if name not in doc:
            raise ParseError(f"missing required field '{name}'")
    if not isinstance(doc["base_genus"], int):
        raise ParseError(f"field 'base_genus': expected integer, got {doc['base_genus']!r}")

    base_point = _complex_from_json(doc["base_point"], "base_point")
    tau = None
    if "tau" in doc and doc["tau"] is not None:
        tau = _complex_from_json(doc["tau"], "tau")

    if not isinstance(doc["singular_points"], list):
        raise ParseError("field 'singular_points': expected a list")
    sps = []
    for i, item in enumerate(doc["singular_points"]):
        if not isinstance(item, dict) or set(item) - {"preimages", "higher_orders"}:
            raise ParseError(f"singular_points[{i}]: expected {{preimages, higher_orders}}")
        if "preimages" not in item:
            raise ParseError(f"singular_points[{i}]: missing 'preimages'")
        preimages = [
            _complex_from_json(p, f"singular_points[{i}].preimages[{j}]")
            for j, p in enumerate(item["preimages"])
        ]
        raw_orders = item.get("higher_orders", [[] for _ in preimages])
        if not isinstance(raw_orders, list) or not all(isinstance(hs, list) for hs in raw_orders):
            raise ParseError(f"singular_points[{i}].higher_orders: expected a list of int lists")
        for hs in raw_orders:
            if not all(isinstance(n, int) for n in hs):
                raise ParseError(f"singular_points[{i}].higher_orders: orders must be integers")
        sps.append(SingularPoint(preimages=tuple(preimages), higher_orders=tuple(tuple(hs) for hs in raw_orders)))

    return CurveSpec(
        base_genus=doc["base_genus"],
        singular_points=tuple(sps),
        base_point=base_point,
        tau=tau,
    )


def serialize_curve_spec(curve):
    """Inverse of parse_curve_spec; parse(serialize(c)) == c."""
    doc = {
        "base_genus": curve.base_genus,
        "base_point": _complex_to_json(curve.base_point),
        "singular_points": [
            {
                "preimages": [_complex_to_json(p) for p in sp.preimages],
                "higher_orders": [list(hs) for hs in sp.higher_orders],
            }
            for sp in curve.singular_points
        ],
    }
    if curve.tau is not None:
        doc["tau"] = _complex_to_json(curve.tau)
    return json.dumps(doc, indent=2, sort_keys=True)
