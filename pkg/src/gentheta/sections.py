"""Generalized theta sections, their translates, and chart transitions.

The rational case is the explicit product (one factor per compactified
coordinate); the general case is the subset double sum

    theta(exp(xi_j), zeta_i, z) =
        sum_{J, I} prod_{j in J} exp(xi_j) * zeta^I * D_{I^c} theta(z + sum_{j in J} nu_j)

which specializes to the classical node formula (M=1, N=0) and the cusp
formula D theta(z) + theta(z) zeta (M=0, N=1).  Translation acts by
exp(xi_j) -> exp(xi_j)/a_j, zeta_i -> zeta_i - b_i, z -> z - lambda.

Sections live in the degree-(1,..,1) bundle over the compactified Jacobian;
switching one coordinate to the chart at infinity divides the value by that
coordinate.  Evaluation is organized term-by-term so that chart-divided
values stay finite when coordinates sit at infinity.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import theta as theta_mod
from .errors import ChartError, SizeError, ValidationError
from .p1 import AbelPoint, ChartIndex, abel_map_p1, enumerate_higher, enumerate_pairs

TWO_PI_I = 2j * math.pi

#: refuse subset enumeration beyond this many compact directions
SUBSET_CAP = 16


@dataclass(frozen=True)
class ShiftParams:
    """Translation (a, b, lambda) on the generalized Jacobian.

    a acts multiplicatively on the exp(xi) coordinates (all entries nonzero),
    b additively on the zeta coordinates, lambda on the base Jacobian.
    """

    a: tuple = ()
    b: tuple = ()
    lam: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        object.__setattr__(self, "b", tuple(complex(v) for v in self.b))
        object.__setattr__(self, "lam", tuple(complex(v) for v in self.lam))
        if any(v == 0 for v in self.a):
            raise ValidationError("shift coordinates a_j must be nonzero")

    @classmethod
    def identity(cls, M, N, g=0):
        return cls(a=(1.0,) * M, b=(0.0,) * N, lam=(0.0,) * g)


@dataclass(frozen=True)
class ThetaValue:
    """A section value together with the trivialisation it is expressed in."""

    value: complex
    chart: ChartIndex


def chart_transition_factor(ap, old_chart, new_chart):
    """Multiplier turning a value in old_chart into the same section in new_chart.

    Each coordinate moved into the infinity set divides by that coordinate;
    each coordinate moved out multiplies back.  Coordinate values come from
    the AbelPoint (whose own chart tells how its entries are stored).
    """
    factor = 1.0 + 0j
    for ell in new_chart.xi_at_infinity - old_chart.xi_at_infinity:
        factor *= _coord_value(ap.exp_xi[ell], ell in ap.chart.xi_at_infinity, invert=True)
    for ell in old_chart.xi_at_infinity - new_chart.xi_at_infinity:
        factor *= _coord_value(ap.exp_xi[ell], ell in ap.chart.xi_at_infinity, invert=False)
    for ell in new_chart.zeta_at_infinity - old_chart.zeta_at_infinity:
        factor *= _coord_value(ap.zeta[ell], ell in ap.chart.zeta_at_infinity, invert=True)
    for ell in old_chart.zeta_at_infinity - new_chart.zeta_at_infinity:
        factor *= _coord_value(ap.zeta[ell], ell in ap.chart.zeta_at_infinity, invert=False)
    return factor


def _coord_value(stored, stored_is_reciprocal, invert):
    """Coordinate (or its reciprocal) from its stored representative."""
    want_reciprocal = invert
    if stored_is_reciprocal == want_reciprocal:
        return stored
    if stored == 0:
        raise ChartError("coordinate transition through 0/infinity is singular")
    return 1.0 / stored


def transition(tv, ap, new_chart):
    """Re-express a ThetaValue in another chart via the cocycle factor."""
    return ThetaValue(tv.value * chart_transition_factor(ap, tv.chart, new_chart), new_chart)


def gen_theta_rational(curve, ap, shift, chart=None):
    """Translated product section on a rational desingularisation.

    Factors are a_j^-1 exp(xi_j) - 1 (finite chart) or a_j^-1 - exp(-xi_j)
    (chart at infinity) per pair coordinate, and zeta_i - b_i or
    1 - b_i / zeta_i per higher-order coordinate.  The AbelPoint's infinite
    coordinates must be contained in the requested chart's infinity sets.
    """
    if curve.base_genus != 0:
        raise ValidationError("gen_theta_rational requires a rational desingularisation")
    M = len(ap.exp_xi)
    N = len(ap.zeta)
    if len(shift.a) != M or len(shift.b) != N:
        raise ValidationError("shift dimensions do not match the Abel point")
    if chart is None:
        chart = ap.chart
    missing_xi = ap.chart.xi_at_infinity - chart.xi_at_infinity
    missing_zeta = ap.chart.zeta_at_infinity - chart.zeta_at_infinity
    if missing_xi or missing_zeta:
        raise ChartError(
            f"coordinates at infinity not covered by the chart: xi {sorted(missing_xi)}, "
            f"zeta {sorted(missing_zeta)}"
        )

    value = 1.0 + 0j
    for ell in range(M):
        stored_inv = ell in ap.chart.xi_at_infinity
        if ell in chart.xi_at_infinity:
            value *= 1.0 / shift.a[ell] - _coord_value(ap.exp_xi[ell], stored_inv, invert=True)
        else:
            value *= _coord_value(ap.exp_xi[ell], stored_inv, invert=False) / shift.a[ell] - 1.0
    for ell in range(N):
        stored_inv = ell in ap.chart.zeta_at_infinity
        if ell in chart.zeta_at_infinity:
            value *= 1.0 - shift.b[ell] * _coord_value(ap.zeta[ell], stored_inv, invert=True)
        else:
            value *= _coord_value(ap.zeta[ell], stored_inv, invert=False) - shift.b[ell]
    return ThetaValue(value=value, chart=chart)


def gen_theta_node(xi, z, pd, shift, pol=theta_mod.DEFAULT_POLICY):
    """Clebsch-style section for one node over a positive-genus base:
    a^-1 exp(xi) theta(z - lambda + nu) + theta(z - lambda)."""
    if pd.M != 1 or pd.N != 0:
        raise ValidationError("node section needs M = 1, N = 0 period data")
    z = np.asarray(z, dtype=complex).reshape(-1)
    lam = np.asarray(shift.lam, dtype=complex)
    nu = pd.nu[:, 0]
    t_shift = theta_mod.riemann_theta(z - lam + nu, pd.Z, pol)
    t_plain = theta_mod.riemann_theta(z - lam, pd.Z, pol)
    return np.exp(xi) / shift.a[0] * t_shift + t_plain


def gen_theta_cusp(zeta, z, pd, shift, pol=theta_mod.DEFAULT_POLICY):
    """Cusp section: D theta(z - lambda) + theta(z - lambda) (zeta - b)."""
    if pd.M != 0 or pd.N != 1:
        raise ValidationError("cusp section needs M = 0, N = 1 period data")
    z = np.asarray(z, dtype=complex).reshape(-1)
    lam = np.asarray(shift.lam, dtype=complex)
    w_rows = pd.w_rows()
    arg = z - lam
    d_val = theta_mod.theta_D((0,), arg, pd.Z, w_rows, pol)
    t_val = theta_mod.riemann_theta(arg, pd.Z, pol)
    return d_val + t_val * (zeta - shift.b[0])


def _gray_order(M):
    """Subsets of range(M) in Gray-code order (single-element updates)."""
    return [g ^ (g >> 1) for g in range(1 << M)]


def _check_cap(M, N):
    if M + N > SUBSET_CAP:
        raise SizeError(f"subset enumeration over {M + N} directions exceeds cap {SUBSET_CAP}")


def gen_theta_general(xi, zeta, z, pd, shift, chart=None, pol=theta_mod.DEFAULT_POLICY):
    """Translated general section as the subset double sum.

    xi, zeta are the additive primitives (length M and N); z the base
    coordinates.  With a chart, the value is re-expressed by dividing by the
    flagged coordinates, folded into each term so the result stays finite
    for large coordinates.
    """
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    exp_vals = np.exp(xi)
    exp_inv = np.exp(-xi)
    zeta_inv = np.array([1.0 / v if v != 0 else complex(math.inf) for v in zeta])
    value = _general_sum(exp_vals, exp_inv, zeta, zeta_inv, z, pd, shift, chart, pol)
    return ThetaValue(value=value, chart=chart if chart is not None else ChartIndex())


def gen_theta_from_abel(ap, pd, shift, chart=None, pol=theta_mod.DEFAULT_POLICY):
    """General section evaluated at an AbelPoint, honouring its stored chart."""
    if chart is None:
        chart = ap.chart
    M, N = len(ap.exp_xi), len(ap.zeta)

    def both(stored, flagged):
        if flagged:
            inv = stored
            val = 1.0 / stored if stored != 0 else complex(math.inf)
        else:
            val = stored
            inv = 1.0 / stored if stored != 0 else complex(math.inf)
        return val, inv

    exp_vals = np.empty(M, dtype=complex)
    exp_inv = np.empty(M, dtype=complex)
    for ell in range(M):
        exp_vals[ell], exp_inv[ell] = both(ap.exp_xi[ell], ell in ap.chart.xi_at_infinity)
    zeta_vals = np.empty(N, dtype=complex)
    zeta_inv = np.empty(N, dtype=complex)
    for ell in range(N):
        zeta_vals[ell], zeta_inv[ell] = both(ap.zeta[ell], ell in ap.chart.zeta_at_infinity)
    value = _general_sum(exp_vals, exp_inv, zeta_vals, zeta_inv, np.asarray(ap.z, dtype=complex), pd, shift, chart, pol)
    return ThetaValue(value=value, chart=chart)


def _general_sum(exp_vals, exp_inv, zeta_vals, zeta_inv, z, pd, shift, chart, pol):
    M, N = pd.M, pd.N
    if len(exp_vals) != M or len(zeta_vals) != N:
        raise ValidationError("coordinate dimensions do not match the period data")
    if len(shift.a) != M or len(shift.b) != N:
        raise ValidationError("shift dimensions do not match the period data")
    _check_cap(M, N)
    chart = chart if chart is not None else ChartIndex()
    xi_up = chart.xi_at_infinity
    zeta_up = chart.zeta_at_infinity
    for ell in range(M):
        if ell not in xi_up and not np.isfinite(exp_vals[ell]):
            raise ChartError(f"xi coordinate {ell} is infinite but not flagged in the chart")
    for ell in range(N):
        if ell not in zeta_up and not np.isfinite(zeta_vals[ell]):
            raise ChartError(f"zeta coordinate {ell} is infinite but not flagged in the chart")

    z = np.asarray(z, dtype=complex).reshape(-1)
    lam = np.asarray(shift.lam, dtype=complex)
    base = z - lam

    # one lattice pass: all 2^M shifted arguments x all 2^N derivative subsets
    j_masks = _gray_order(M)
    args = np.empty((len(j_masks), pd.g), dtype=complex)
    running = base.astype(complex).copy()
    prev = 0
    for row, mask in enumerate(j_masks):
        flipped = mask ^ prev
        if flipped:
            j = flipped.bit_length() - 1
            sign = 1.0 if mask & flipped else -1.0
            running = running + sign * pd.nu[:, j]
        args[row] = running
        prev = mask
    subsets = [tuple(i for i in range(N) if not (imask >> i & 1)) for imask in range(1 << N)]
    table = theta_mod._eval_series(args, pd.Z, pd.w_rows(), subsets, pol)  # (2^N, 2^M)

    for ell in xi_up:
        if exp_vals[ell] == 0:
            raise ChartError(f"xi coordinate {ell} is 0; the chart at infinity is singular there")
    for ell in zeta_up:
        if zeta_vals[ell] == 0:
            raise ChartError(f"zeta coordinate {ell} is 0; the chart at infinity is singular there")

    total = 0j
    for row, jmask in enumerate(j_masks):
        xi_factor = 1.0 + 0j
        for j in range(M):
            in_J = bool(jmask >> j & 1)
            flagged = j in xi_up
            if in_J:
                xi_factor *= (1.0 / shift.a[j]) if flagged else (exp_vals[j] / shift.a[j])
            elif flagged:
                xi_factor *= exp_inv[j]  # 0 at infinity: kills terms missing j
        for icol, imask in enumerate(range(1 << N)):
            zeta_factor = 1.0 + 0j
            for i in range(N):
                in_I = bool(imask >> i & 1)
                flagged = i in zeta_up
                if in_I:
                    zeta_factor *= (1.0 - shift.b[i] * zeta_inv[i]) if flagged else (zeta_vals[i] - shift.b[i])
                elif flagged:
                    zeta_factor *= zeta_inv[i]
            if xi_factor == 0.0 or zeta_factor == 0.0:
                continue
            total += xi_factor * zeta_factor * table[icol, row]
    return complex(total)


def gen_theta_general_batch(exp_xi_vals, zeta_vals, z_vals, pd, shift, pol=theta_mod.DEFAULT_POLICY):
    """Finite-chart pullback values at a batch of points.

    exp_xi_vals: (B, M) values of exp(xi); zeta_vals: (B, N); z_vals: (B, g).
    Used by the zero finder, which stays away from the preimage poles.
    """
    M, N = pd.M, pd.N
    _check_cap(M, N)
    if pd.g:
        z_vals = np.asarray(z_vals, dtype=complex).reshape(-1, pd.g)
        B = z_vals.shape[0]
    elif M:
        B = np.asarray(exp_xi_vals, dtype=complex).reshape(-1, M).shape[0]
        z_vals = np.zeros((B, 0), dtype=complex)
    else:
        B = np.asarray(zeta_vals, dtype=complex).reshape(-1, N).shape[0]
        z_vals = np.zeros((B, 0), dtype=complex)

    def _cols(arr, k):
        return np.asarray(arr, dtype=complex).reshape(B, k) if k else np.zeros((B, 0), dtype=complex)

    exp_xi_vals = _cols(exp_xi_vals, M)
    zeta_vals = _cols(zeta_vals, N)
    a = np.asarray(shift.a, dtype=complex)
    b = np.asarray(shift.b, dtype=complex)
    lam = np.asarray(shift.lam, dtype=complex)

    j_masks = list(range(1 << M))
    nu_sums = np.array(
        [sum((pd.nu[:, j] for j in range(M) if mask >> j & 1), np.zeros(pd.g, dtype=complex)) for mask in j_masks]
    ).reshape(len(j_masks), pd.g)
    args = (z_vals - lam)[None, :, :] + nu_sums[:, None, :]  # (2^M, B, g)
    flat = args.reshape(-1, pd.g)
    subsets = [tuple(i for i in range(N) if not (imask >> i & 1)) for imask in range(1 << N)]
    table = theta_mod._eval_series(flat, pd.Z, pd.w_rows(), subsets, pol).reshape(
        1 << N, len(j_masks), B
    )

    shifted_zeta = zeta_vals - b  # (B, N)
    shifted_exp = exp_xi_vals / a  # (B, M)
    total = np.zeros(B, dtype=complex)
    for row, jmask in enumerate(j_masks):
        xi_factor = np.ones(B, dtype=complex)
        for j in range(M):
            if jmask >> j & 1:
                xi_factor = xi_factor * shifted_exp[:, j]
        for icol, imask in enumerate(range(1 << N)):
            zeta_factor = np.ones(B, dtype=complex)
            for i in range(N):
                if imask >> i & 1:
                    zeta_factor = zeta_factor * shifted_zeta[:, i]
            total += xi_factor * zeta_factor * table[icol, row]
    return total


def quasi_periodicity_residual(xi, zeta, z, pd, shift, alpha, pol=theta_mod.DEFAULT_POLICY):
    """Residual of the B-shift identity for the translated general section.

    theta_{a,b,lam}(xi + Y_a, zeta + W_a, z + Z_a) should equal
    theta_{a,b,lam}(xi, zeta, z) * exp(-2 pi i (z - lam)_a - pi i Z_aa).
    """
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    z = np.asarray(z, dtype=complex).reshape(-1)
    lam = np.asarray(shift.lam, dtype=complex)
    lhs = gen_theta_general(
        xi + pd.Y[alpha, :],
        zeta + pd.W[alpha, :],
        z + pd.Z.Z[:, alpha],
        pd,
        shift,
        pol=pol,
    ).value
    factor = theta_mod.periodicity_factor(z - lam, pd.Z, alpha)
    rhs = gen_theta_general(xi, zeta, z, pd, shift, pol=pol).value * factor
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1.0)


def check_lemma3(zeta, z, pd, alpha, pol=theta_mod.DEFAULT_POLICY):
    """Residual of the cuspidal-sum quasi-periodicity (M = 0 specialization)."""
    if pd.M != 0:
        raise ValidationError("the cuspidal-sum identity applies to M = 0 period data")
    shift = ShiftParams.identity(0, pd.N, pd.g)
    return quasi_periodicity_residual((), zeta, z, pd, shift, alpha, pol)
