"""Riemann theta series, derivative operators, and quasi-periodicity checks.

The series is the standard one forced by the period relations
``theta(z + e_a) = theta(z)`` and
``theta(z + Z_a) = theta(z) exp(-2 pi i z_a - pi i Z_aa)``:

    theta(z) = sum_{n in Z^g} exp(pi i n.Z.n + 2 pi i n.z)

Arguments are reduced modulo the period lattice before summation (integer
shifts exactly, Z-column shifts with the compensating automorphy factor
tracked in log form), so the summand stays bounded for any input.  The
derivative operators D_i = sum_mu (W[i,mu] / 2 pi i) d/dz_mu act term-wise:
each lattice term picks up one factor (W n)_i per application, never a
finite difference.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import PrecisionError, ValidationError

TWO_PI_I = 2j * math.pi

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class TruncationPolicy:
    """Target absolute tail bound and the lattice-radius cap enforcing it."""

    epsilon: float = 1e-12
    max_radius: int = 64

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.max_radius < 1:
            raise ValidationError("max_radius must be at least 1")


DEFAULT_POLICY = TruncationPolicy()


class RiemannMatrix:
    """A g x g symmetric complex matrix with positive definite imaginary part."""

    def __init__(self, Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if Z.shape[0] != Z.shape[1]:
            raise ValidationError(f"period matrix must be square, got shape {Z.shape}")
        if Z.size:
            asym = np.max(np.abs(Z - Z.T))
            if asym > SYMMETRY_TOL:
                raise ValidationError(f"period matrix not symmetric: |Z - Z^T| = {asym:.3e}")
            eigs = np.linalg.eigvalsh(Z.imag)
            if eigs.min() <= 0:
                raise ValidationError(
                    f"imaginary part not positive definite: min eigenvalue {eigs.min():.3e}"
                )
            self.lambda_min = float(eigs.min())
        else:
            self.lambda_min = math.inf
        self.Z = Z
        self.g = Z.shape[0]

    def __repr__(self):
        return f"RiemannMatrix(g={self.g})"


class MultiIndexSet(frozenset):
    """A subset of derivative-row indices {0, .., N-1} with complement helpers."""

    def complement(self, N):
        return MultiIndexSet(set(range(N)) - self)

    def rel_complement(self, J):
        """I \\ J, the paper-style relative complement of J inside self."""
        return MultiIndexSet(self - frozenset(J))


def _as_riemann(Z):
    return Z if isinstance(Z, RiemannMatrix) else RiemannMatrix(Z)


def _lattice(radius, g):
    """Integer vectors with sup-norm <= radius, ordered shell-by-shell, then
    lexicographically inside each shell (deterministic summation order)."""
    if g == 0:
        return np.zeros((1, 0), dtype=int)
    axes = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([axes] * g), indexing="ij")
    pts = np.stack([a.ravel() for a in grids], axis=1)
    shell = np.max(np.abs(pts), axis=1)
    order = np.lexsort(tuple(pts[:, k] for k in reversed(range(g))) + (shell,))
    return pts[order]


def _choose_radius(Zm, y_norm, tail_scale, deriv_order, w_scale, pol):
    """Smallest shell radius with Gaussian tail bound below pol.epsilon.

    Bound per shell r: count (<= 2g(2r+1)^(g-1)) times the largest summand
    exp(-pi lambda_min (r - y_norm)^2), inflated by tail_scale (the constant
    exp(pi c.Y.c) from recentring) and by the polynomial derivative factor
    (w_scale * r)^deriv_order.
    """
    g = Zm.g
    if g == 0:
        return 0
    lam = Zm.lambda_min

    def shell_bound(r):
        dist = max(r - y_norm, 0.0)
        poly = (2 * g) * (2 * r + 1) ** (g - 1)
        if deriv_order:
            poly *= max(1.0, (w_scale * math.sqrt(g) * r)) ** deriv_order
        return tail_scale * poly * math.exp(-math.pi * lam * dist * dist)

    for R in range(1, pol.max_radius + 1):
        # geometric-style tail: shells decay superexponentially once the
        # Gaussian dominates, so two consecutive small shells certify the sum
        b1, b2 = shell_bound(R + 1), shell_bound(R + 2)
        if b1 < pol.epsilon / 4 and b2 < b1 / 2:
            tail = b1 / (1.0 - max(b2 / b1, 0.5))
            if tail < pol.epsilon:
                return R
    achievable = shell_bound(pol.max_radius + 1) * 2
    raise PrecisionError(
        f"lattice radius {pol.max_radius} cannot reach epsilon={pol.epsilon:.3e}; "
        f"achievable about {achievable:.3e}"
    )


def _reduce_arguments(zs, Zm):
    """Split z = z_red + Z m + k with z_red bounded; return (z_red, m, log_factor).

    theta(z) = exp(log_factor) * theta(z_red) with
    log_factor = -pi i m.Z.m - 2 pi i m.z_red, exactly.
    """
    Z = Zm.Z
    g = Zm.g
    if g == 0:
        B = zs.shape[0]
        return zs, np.zeros((B, 0), dtype=int), np.zeros(B, dtype=complex)
    Y = Z.imag
    m = np.rint(np.linalg.solve(Y, zs.imag.T).T).astype(int)
    z1 = zs - m @ Z
    k = np.rint(z1.real).astype(int)
    z_red = z1 - k
    mZm = np.einsum("bi,ij,bj->b", m, Z, m)
    log_factor = -1j * math.pi * mZm - TWO_PI_I * np.einsum("bi,bi->b", m, z_red)
    return z_red, m, log_factor


def _eval_series(zs, Zm, W_rows, subsets, pol):
    """Evaluate D_S theta(z) for every subset S and every z in the batch.

    Parameters
    ----------
    zs : (B, g) complex array of arguments.
    Zm : RiemannMatrix.
    W_rows : (N, g) complex array of derivative directions (rows W_i), or None.
    subsets : list of tuples of row indices (repeats allowed; empty tuple is
        the plain theta).
    pol : TruncationPolicy.

    Returns
    -------
    (S, B) complex array.
    """
    zs = np.atleast_2d(np.asarray(zs, dtype=complex))
    g = Zm.g
    B = zs.shape[0]
    if zs.shape[1] != g:
        raise ValidationError(f"argument dimension {zs.shape[1]} != genus {g}")
    W_rows = np.zeros((0, g), dtype=complex) if W_rows is None else np.asarray(W_rows, dtype=complex)

    z_red, m, log_factor = _reduce_arguments(zs, Zm)

    if g == 0:
        # empty lattice: theta == 1, any derivative kills the single term
        out = np.zeros((len(subsets), B), dtype=complex)
        for s, sub in enumerate(subsets):
            out[s] = 1.0 if len(sub) == 0 else 0.0
        return out

    Y = Zm.Z.imag
    c = np.linalg.solve(Y, z_red.imag.T).T  # recentring offsets, |c| <= ~1/2
    y_norm = float(np.max(np.linalg.norm(c, axis=1))) if B else 0.0
    tail_scale = float(np.max(np.exp(math.pi * np.einsum("bi,ij,bj->b", c, Y, c)))) if B else 1.0
    deriv_order = max((len(s) for s in subsets), default=0)
    w_scale = float(np.max(np.sum(np.abs(W_rows), axis=1))) if W_rows.size else 0.0

    R = _choose_radius(Zm, y_norm, tail_scale, deriv_order, w_scale, pol)
    n = _lattice(R, g)  # (K, g)

    quad = np.einsum("ki,ij,kj->k", n, Zm.Z, n)
    base = np.exp(1j * math.pi * quad)  # (K,)
    phases = np.exp(TWO_PI_I * (n @ z_red.T))  # (K, B)

    Wn = n @ W_rows.T if W_rows.size else np.zeros((n.shape[0], 0))  # (K, N)

    # D_S theta at the shifted argument mixes lower derivatives at z_red:
    # D_S theta(z) = e^L sum_{J subset S} prod_{i in S-J} (-(W m)_i) D_J theta(z_red)
    Wm = m @ W_rows.T if W_rows.size else np.zeros((B, 0))  # (B, N)

    out = np.empty((len(subsets), B), dtype=complex)
    scale = np.exp(log_factor)
    red_cache = {}

    def reduced_value(sub):
        key = tuple(sorted(sub))
        if key not in red_cache:
            w = base.copy()
            for i in key:
                w = w * Wn[:, i]
            red_cache[key] = w @ phases  # (B,)
        return red_cache[key]

    for s, sub in enumerate(subsets):
        sub = tuple(sub)
        acc = np.zeros(B, dtype=complex)
        for mask in range(1 << len(sub)):
            kept = tuple(sub[t] for t in range(len(sub)) if mask >> t & 1)
            dropped = [sub[t] for t in range(len(sub)) if not mask >> t & 1]
            coef = np.ones(B, dtype=complex)
            for i in dropped:
                coef = coef * (-Wm[:, i])
            acc += coef * reduced_value(kept)
        out[s] = scale * acc
    return out


def riemann_theta(z, Z, pol=DEFAULT_POLICY):
    """theta(z) for a single g-vector argument."""
    Zm = _as_riemann(Z)
    return complex(_eval_series(np.atleast_2d(z), Zm, None, [()], pol)[0, 0])


def riemann_theta_batch(zs, Z, pol=DEFAULT_POLICY):
    """theta at a batch of arguments; zs has shape (B, g)."""
    Zm = _as_riemann(Z)
    return _eval_series(zs, Zm, None, [()], pol)[0]


def theta_D(I, z, Z, W_rows, pol=DEFAULT_POLICY):
    """D_I theta(z): one derivative factor (W n)_i per index in I.

    I may repeat an index, giving higher derivatives in one direction; the
    empty tuple reproduces riemann_theta.
    """
    Zm = _as_riemann(Z)
    return complex(_eval_series(np.atleast_2d(z), Zm, W_rows, [tuple(I)], pol)[0, 0])


def theta_D_batch(I, zs, Z, W_rows, pol=DEFAULT_POLICY):
    Zm = _as_riemann(Z)
    return _eval_series(zs, Zm, W_rows, [tuple(I)], pol)[0]


def theta_D_multi(subsets, z, Z, W_rows, pol=DEFAULT_POLICY):
    """Evaluate D_S theta(z) for many subsets in one lattice pass.

    Returns a dict mapping each subset (as passed) to its value.
    """
    Zm = _as_riemann(Z)
    subs = [tuple(s) for s in subsets]
    vals = _eval_series(np.atleast_2d(z), Zm, W_rows, subs, pol)[:, 0]
    return {s: complex(v) for s, v in zip(subs, vals)}


def periodicity_factor(z, Z, alpha):
    """Automorphy factor R_alpha = exp(-2 pi i z_alpha - pi i Z[alpha,alpha]).

    alpha is a 0-based cycle index.
    """
    Zm = _as_riemann(Z)
    z = np.asarray(z, dtype=complex).reshape(-1)
    if not 0 <= alpha < Zm.g:
        raise ValidationError(f"cycle index {alpha} out of range for genus {Zm.g}")
    return complex(np.exp(-TWO_PI_I * z[alpha] - 1j * math.pi * Zm.Z[alpha, alpha]))


def _subset_product(W_rows, indices, alpha):
    out = 1.0 + 0j
    for i in indices:
        out *= W_rows[i, alpha]
    return out


def check_lemma2(I, alpha, z, Z, W_rows, pol=DEFAULT_POLICY):
    """Residual of the derivative quasi-periodicity identity.

    D_I theta(z + Z_alpha) should equal
    R_alpha * sum_{J subset I} (-1)^{|I - J|} W_{I-J, alpha} D_J theta(z),
    where W_{K,alpha} is the product of W[i, alpha] over K.  Returns
    |LHS - RHS| / (|LHS| + |RHS| + 1).
    """
    Zm = _as_riemann(Z)
    W_rows = np.asarray(W_rows, dtype=complex)
    z = np.asarray(z, dtype=complex).reshape(-1)
    I = tuple(I)

    lhs = theta_D(I, z + Zm.Z[:, alpha], Zm, W_rows, pol)

    needed = []
    for mask in range(1 << len(I)):
        needed.append(tuple(I[t] for t in range(len(I)) if mask >> t & 1))
    vals = theta_D_multi(needed, z, Zm, W_rows, pol)

    acc = 0j
    for mask in range(1 << len(I)):
        J = tuple(I[t] for t in range(len(I)) if mask >> t & 1)
        dropped = [I[t] for t in range(len(I)) if not mask >> t & 1]
        acc += (-1) ** len(dropped) * _subset_product(W_rows, dropped, alpha) * vals[J]
    rhs = acc * periodicity_factor(z, Zm, alpha)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1.0)
