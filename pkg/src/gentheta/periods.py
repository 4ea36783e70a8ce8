"""Period data (Y, W, Z, nu) and genus-1 singular primitives.

On a torus C/(Z + tau Z) the normalized holomorphic differential is du, the
Abel map is z(p) = p - p0, and the singular primitives are built from the
odd theta function theta1 (simple zeros exactly on the lattice):

* pair primitive: exp(xi(u)) is a ratio of theta1 factors with a zero at the
  preimage p_ij, a pole at the distinguished p_i1, and value 1 at p0;
* order-n primitive: zeta_n(u) = (-1)^n/n! * psi^(n-1)(u - q), normalized to
  vanish at p0, where psi = theta1'/theta1.  Its polar part is exactly
  -(1/n)(u-q)^-n, matching the canonical (u-q)^(-1-n) du generator.

theta1 itself is realized as a shifted, exponentially weighted evaluation of
the plain theta series (odd characteristic folded in explicitly), so there
is a single series implementation in the package.

For genus >= 2 the module only validates externally supplied period data;
no singular forms are constructed there.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import theta as theta_mod
from .curves import is_inf
from .errors import ParseError, PoleError, ValidationError
from .p1 import AbelPoint, ChartIndex, enumerate_higher, enumerate_pairs

TWO_PI_I = 2j * math.pi

RECIPROCITY_TOL = 1e-10

#: distance (after lattice reduction) below which a point counts as a pole hit
LATTICE_TOL = 1e-12


def lattice_reduce(w, tau, center=0.0):
    """Representative of w modulo Z + tau Z with lattice coordinates in
    [center, center + 1)."""
    w = complex(w)
    y = w.imag / tau.imag
    x = w.real - y * tau.real
    x -= math.floor(x - center)
    y -= math.floor(y - center)
    return x + y * tau


def lattice_nearest(w, tau):
    """Representative of w modulo Z + tau Z with minimal lattice coordinates
    (both in [-1/2, 1/2))."""
    return lattice_reduce(w, tau, center=-0.5)


def is_lattice_point(w, tau, tol=LATTICE_TOL):
    return abs(lattice_nearest(w, tau)) <= tol


@dataclass(frozen=True)
class TorusCurve:
    """Singular-curve data over a genus-1 desingularisation.

    Preimage points and the base point are reduced to the fundamental
    domain (real and tau-direction coordinates in [0, 1)) on construction.
    """

    tau: complex
    singular_points: tuple
    base_point: complex

    @classmethod
    def from_curve(cls, curve):
        if curve.base_genus != 1 or curve.tau is None:
            raise ValidationError("TorusCurve requires base_genus = 1 with tau set")
        from .curves import SingularPoint

        tau = curve.tau
        sps = tuple(
            SingularPoint(
                preimages=tuple(lattice_reduce(p, tau) for p in sp.preimages),
                higher_orders=sp.higher_orders,
            )
            for sp in curve.singular_points
        )
        tc = cls(tau=tau, singular_points=sps, base_point=lattice_reduce(curve.base_point, tau))
        tc.validate()
        return tc

    def validate(self):
        pts = [self.base_point]
        for sp in self.singular_points:
            pts.extend(sp.preimages)
        for k in range(len(pts)):
            for l in range(k + 1, len(pts)):
                if is_lattice_point(pts[k] - pts[l], self.tau, tol=1e-10):
                    raise ValidationError(
                        f"points {pts[k]} and {pts[l]} coincide modulo the lattice"
                    )

    @property
    def base_genus(self):
        return 1


# -- odd theta ----------------------------------------------------------------


def _theta_derivs_batch(ws, tau, kmax, pol):
    """theta^(m)(w) for m = 0..kmax at a batch of scalar arguments."""
    ws = np.asarray(ws, dtype=complex).reshape(-1, 1)
    Z = theta_mod.RiemannMatrix([[tau]])
    W_rows = np.array([[TWO_PI_I]])
    subs = [(0,) * m for m in range(kmax + 1)]
    return theta_mod._eval_series(ws, Z, W_rows, subs, pol)  # (kmax+1, B)


def theta1(u, tau, pol=theta_mod.DEFAULT_POLICY):
    """Odd genus-1 theta: simple zeros exactly on Z + tau Z."""
    return complex(theta1_batch([u], tau, pol)[0])


def theta1_batch(us, tau, pol=theta_mod.DEFAULT_POLICY):
    us = np.asarray(us, dtype=complex).reshape(-1)
    c = (1.0 + tau) / 2.0
    vals = _theta_derivs_batch(us + c, tau, 0, pol)[0]
    weight = -np.exp(1j * math.pi * tau / 4.0 + 1j * math.pi * (us + 0.5))
    return weight * vals


def theta1_logderiv_batch(us, tau, k=0, pol=theta_mod.DEFAULT_POLICY):
    """k-th derivative of psi = theta1'/theta1 at a batch of arguments.

    psi(u) = pi i + (theta'/theta)(u + (1+tau)/2); the log-derivative
    derivatives come from truncated power-series division of the theta
    Taylor coefficients, not finite differences.
    """
    us = np.asarray(us, dtype=complex).reshape(-1)
    c = (1.0 + tau) / 2.0
    derivs = _theta_derivs_batch(us + c, tau, k + 1, pol)  # (k+2, B)
    fact = np.array([math.factorial(m) for m in range(k + 2)])
    a = derivs / fact[:, None]  # Taylor coefficients of theta at each point
    b = np.array([(m + 1) for m in range(k + 1)])[:, None] * a[1:]  # coeffs of theta'
    # q = b / a truncated to order k: q_m = (b_m - sum_{r=1}^m a_r q_{m-r}) / a_0
    B = us.shape[0]
    q = np.zeros((k + 1, B), dtype=complex)
    for m in range(k + 1):
        acc = b[m].copy()
        for r in range(1, m + 1):
            acc -= a[r] * q[m - r]
        q[m] = acc / a[0]
    out = math.factorial(k) * q[k]
    if k == 0:
        out = out + 1j * math.pi
    return out


def theta1_logderiv(u, tau, k=0, pol=theta_mod.DEFAULT_POLICY):
    return complex(theta1_logderiv_batch([u], tau, k, pol)[0])


# -- singular primitives ------------------------------------------------------


def _higher_scale(n):
    """Coefficient making zeta_n ~ -(1/n)(u-q)^-n, i.e. d(zeta_n) ~ (u-q)^(-1-n) du."""
    return (-1.0) ** n / math.factorial(n)


def torus_exp_xi(tc, idx, u, pol=theta_mod.DEFAULT_POLICY):
    """exp(xi) for a SimplePair on the torus, normalized to 1 at p0."""
    return complex(torus_exp_xi_batch(tc, idx, [u], pol)[0])


def torus_exp_xi_batch(tc, idx, us, pol=theta_mod.DEFAULT_POLICY):
    sp = tc.singular_points[idx.i]
    p1, pj = sp.preimages[0], sp.preimages[idx.j]
    us = np.asarray(us, dtype=complex).reshape(-1)
    for u in us:
        if is_lattice_point(u - p1, tc.tau):
            raise PoleError("exp_xi has a pole at the distinguished preimage", point=p1, index=idx)
    tau = tc.tau
    num = theta1_batch(us - pj, tau, pol) * theta1(tc.base_point - p1, tau, pol)
    den = theta1_batch(us - p1, tau, pol) * theta1(tc.base_point - pj, tau, pol)
    return num / den


def torus_zeta(tc, idx, u, pol=theta_mod.DEFAULT_POLICY):
    """Order-n primitive at the preimage q, vanishing at p0."""
    return complex(torus_zeta_batch(tc, idx, [u], pol)[0])


def torus_zeta_batch(tc, idx, us, pol=theta_mod.DEFAULT_POLICY):
    sp = tc.singular_points[idx.i]
    q = sp.preimages[idx.j]
    n = sp.higher_orders[idx.j][idx.h]
    us = np.asarray(us, dtype=complex).reshape(-1)
    for u in us:
        if is_lattice_point(u - q, tc.tau):
            raise PoleError("zeta has a pole at the preimage", point=q, index=idx)
    scale = _higher_scale(n)
    vals = theta1_logderiv_batch(us - q, tc.tau, n - 1, pol)
    base = theta1_logderiv(tc.base_point - q, tc.tau, n - 1, pol)
    return scale * (vals - base)


def torus_primitives(tc, idx, u, pol=theta_mod.DEFAULT_POLICY):
    """Value of the Abel-map primitive for one form index at u.

    SimplePair indices return exp(xi) (single-valued); HigherOrder indices
    return zeta.
    """
    from .p1 import SimplePair

    if isinstance(idx, SimplePair):
        return torus_exp_xi(tc, idx, u, pol)
    return torus_zeta(tc, idx, u, pol)


def torus_form_value(tc, idx, u, pol=theta_mod.DEFAULT_POLICY):
    """Coefficient function of the differential at u (integrand for quadrature).

    d xi = (psi(u - p_ij) - psi(u - p_i1)) du for pairs;
    d zeta_n = scale * psi^(n)(u - q) du for order-n generators.
    """
    from .p1 import SimplePair

    if isinstance(idx, SimplePair):
        sp = tc.singular_points[idx.i]
        p1, pj = sp.preimages[0], sp.preimages[idx.j]
        return complex(
            theta1_logderiv(u - pj, tc.tau, 0, pol) - theta1_logderiv(u - p1, tc.tau, 0, pol)
        )
    sp = tc.singular_points[idx.i]
    q = sp.preimages[idx.j]
    n = sp.higher_orders[idx.j][idx.h]
    return complex(_higher_scale(n) * theta1_logderiv(u - q, tc.tau, n, pol))


def abel_map_torus(tc, u, pol=theta_mod.DEFAULT_POLICY):
    """All Abel-map coordinates of u: exp(xi) slots, zeta slots, z = u - p0."""
    pairs = enumerate_pairs(tc)
    highers = enumerate_higher(tc)
    exp_vals = tuple(torus_exp_xi(tc, idx, u, pol) for idx in pairs)
    zeta_vals = tuple(torus_zeta(tc, idx, u, pol) for idx in highers)
    return AbelPoint(
        exp_xi=exp_vals,
        zeta=zeta_vals,
        z=(complex(u) - tc.base_point,),
        chart=ChartIndex(),
    )


# -- period data --------------------------------------------------------------


@dataclass
class PeriodData:
    """B-periods of the singular and holomorphic differentials.

    Z is the Riemann matrix; Y (g x M) holds the B-periods of the pair
    forms, W (g x N) those of the higher-order forms, nu (g x M) the Abel
    images of the pair divisors (Y = 2 pi i nu column by column).  A-periods
    of the singular forms vanish by construction and are not stored.
    """

    Z: theta_mod.RiemannMatrix
    Y: np.ndarray
    W: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=complex))
        self.W = np.atleast_2d(np.asarray(self.W, dtype=complex))
        self.nu = np.atleast_2d(np.asarray(self.nu, dtype=complex))
        if not isinstance(self.Z, theta_mod.RiemannMatrix):
            self.Z = theta_mod.RiemannMatrix(self.Z)

    @property
    def g(self):
        return self.Z.g

    @property
    def M(self):
        return self.Y.shape[1]

    @property
    def N(self):
        return self.W.shape[1]

    def w_rows(self):
        """Derivative directions for the theta operators, one row per form."""
        return np.ascontiguousarray(self.W.T)


def build_period_data(tc):
    """Construct the genus-1 period data of a torus curve.

    nu_j = p_ij - p_i1 (fundamental-domain representatives); Y = 2 pi i nu.
    W columns follow the residue pairing of the primitive u with the polar
    part (u - q)^(-1-n) du: 2 pi i for n = 1, zero for n >= 2.
    """
    pairs = enumerate_pairs(tc)
    highers = enumerate_higher(tc)
    nu = np.zeros((1, len(pairs)), dtype=complex)
    for ell, idx in enumerate(pairs):
        sp = tc.singular_points[idx.i]
        nu[0, ell] = sp.preimages[idx.j] - sp.preimages[0]
    W = np.zeros((1, len(highers)), dtype=complex)
    for ell, idx in enumerate(highers):
        sp = tc.singular_points[idx.i]
        n = sp.higher_orders[idx.j][idx.h]
        W[0, ell] = TWO_PI_I if n == 1 else 0.0
    Z = theta_mod.RiemannMatrix([[tc.tau]])
    return PeriodData(Z=Z, Y=TWO_PI_I * nu, W=W, nu=nu)


def validate_periods(pd):
    """Check the period-data invariants; the only gate for external data.

    Raises ValidationError naming the offending entry; returns a residual
    report when everything passes.
    """
    theta_mod.RiemannMatrix(pd.Z.Z)  # re-checks symmetry and Im Z > 0
    if pd.Y.shape != pd.nu.shape:
        raise ValidationError(f"Y shape {pd.Y.shape} != nu shape {pd.nu.shape}")
    if pd.Y.shape[0] != pd.g or pd.W.shape[0] != pd.g:
        raise ValidationError("Y and W must have one row per genus direction")
    residuals = []
    for col in range(pd.M):
        r = float(np.max(np.abs(pd.Y[:, col] - TWO_PI_I * pd.nu[:, col])))
        residuals.append(r)
        if r > RECIPROCITY_TOL:
            raise ValidationError(
                f"reciprocity Y = 2 pi i nu fails in column {col}: residual {r:.3e}"
            )
    return {"reciprocity_residuals": residuals, "g": pd.g, "M": pd.M, "N": pd.N}


def _matrix_from_json(obj, name):
    if not isinstance(obj, list) or not all(isinstance(row, list) for row in obj):
        raise ParseError(f"field '{name}': expected a list of rows")
    out = []
    for r, row in enumerate(obj):
        vals = []
        for c, entry in enumerate(row):
            if not (isinstance(entry, list) and len(entry) == 2):
                raise ParseError(f"field '{name}[{r}][{c}]': expected [re, im]")
            vals.append(complex(float(entry[0]), float(entry[1])))
        out.append(vals)
    return np.array(out, dtype=complex) if out else np.zeros((0, 0), dtype=complex)


def _matrix_to_json(mat):
    return [[[v.real, v.imag] for v in row] for row in np.atleast_2d(mat)]


def parse_period_data(text):
    """Parse a period-data document (JSON with Z, Y, W, nu matrices)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("period-data document must be a JSON object")
    for name in ("Z", "Y", "W", "nu"):
        if name not in doc:
            raise ParseError(f"missing required field '{name}'")
    Z = _matrix_from_json(doc["Z"], "Z")
    g = Z.shape[0]

    def shaped(name, mat):
        if mat.size == 0:
            return np.zeros((g, 0), dtype=complex)
        if mat.shape[0] != g:
            raise ParseError(f"field '{name}': expected {g} rows, got {mat.shape[0]}")
        return mat

    Y = shaped("Y", _matrix_from_json(doc["Y"], "Y"))
    W = shaped("W", _matrix_from_json(doc["W"], "W"))
    nu = shaped("nu", _matrix_from_json(doc["nu"], "nu"))
    pd = PeriodData(Z=theta_mod.RiemannMatrix(Z), Y=Y, W=W, nu=nu)
    validate_periods(pd)
    return pd


def serialize_period_data(pd):
    doc = {
        "Z": _matrix_to_json(pd.Z.Z),
        "Y": _matrix_to_json(pd.Y),
        "W": _matrix_to_json(pd.W),
        "nu": _matrix_to_json(pd.nu),
    }
    return json.dumps(doc, indent=2)
