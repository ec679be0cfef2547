"""Geometry of a single horoprism.

Place the apex of the semi-ideal pyramid at infinity of the upper
half-space and the truncating horosphere at Euclidean height 1.  A base
vertex with truncated particle length ``h`` then sits at height
``z = exp(-h)``, and the projections of two base vertices at hyperbolic
distance ``l`` are a Euclidean distance ``E`` apart with

    E**2 = 2 z_u z_v (cosh l - cosh(h_u - h_v)).

Corner conventions for the batched routines: row ``t`` has corners 0, 1, 2
(counterclockwise), and side ``k`` joins corner ``k`` to corner ``k + 1``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DegenerateBase, HeightGapTooLarge, PrismDoesNotExist

CLAMP_TOL = 1e-12



def _tanh_sinh(step, tmax=3.2):
    # nodes s, 1 - s and weights on [0, 1]; both ends are kept exact
    t = np.arange(-tmax, tmax + step / 2, step)
    x = np.pi * np.sinh(t)
    s = 1.0 / (1.0 + np.exp(-x))
    c = 1.0 / (1.0 + np.exp(x))
    w = step * np.pi * np.cosh(t) * s * c
    return s, c, w


_TS_FINE = _tanh_sinh(1 / 16)
_TS_COARSE = _tanh_sinh(1 / 8)
_QUAD_TOL = 1e-13


def _acos(x, what):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + CLAMP_TOL) or np.any(np.isnan(x)):
        raise PrismDoesNotExist(f"{what} out of range")
    return np.arccos(np.clip(x, -1.0, 1.0))


def semi_ideal_rho(ell, h_from, h_to):
    """Angle at the ``from`` vertex between the edge and the particle.

    Cosine law for a semi-ideal triangle: the particle points to the ideal
    apex, the edge has length ``ell``.  Works elementwise on arrays.

    Raises
    ------
    HeightGapTooLarge
        If ``ell <= |h_to - h_from|``.
    """
    ell = np.asarray(ell, dtype=float)
    gap = np.asarray(h_to, dtype=float) - np.asarray(h_from, dtype=float)
    if np.any(ell <= np.abs(gap)):
        raise HeightGapTooLarge("height difference not below edge length")
    c = (np.cosh(ell) - np.exp(gap)) / np.sinh(ell)
    out = np.arccos(np.clip(c, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def interpolate_height(lam, mu, h_i, h_k):
    """Height at the point of segment ``ik`` at distance ``lam`` from ``i``
    and ``mu`` from ``k`` for the distance-like function through ``h_i, h_k``.
    """
    s = math.sinh(lam + mu)
    return math.log(math.sinh(mu) / s * math.exp(h_i)
                    + math.sinh(lam) / s * math.exp(h_k))


def euclidean_sides(L, H):
    """Squared Euclidean lengths of the projected base sides.

    ``L`` holds side lengths, ``H`` corner heights, both shape (..., 3).
    """
    H1 = np.roll(H, -1, axis=-1)
    return 2 * np.exp(-H - H1) * (np.cosh(L) - np.cosh(H - H1))


def existence_mask(L, H):
    """Which prisms exist, plus the squared Euclidean side lengths."""
    E2 = euclidean_sides(L, H)
    ok = np.all(E2 > 0, axis=-1)
    E = np.sqrt(np.where(E2 > 0, E2, 0.0))
    a, b, c = E[..., 0], E[..., 1], E[..., 2]
    ok &= (a < b + c) & (b < c + a) & (c < a + b)
    return ok, E2


def prism_angles(L, H):
    """All angles of a batch of horoprisms.

    Parameters
    ----------
    L, H : ndarray, shape (F, 3)
        Side lengths (side ``k`` from corner ``k`` to ``k + 1``) and corner
        heights.

    Returns
    -------
    dict of ndarray, each shape (F, 3), indexed by corner:
        ``gamma`` face angle of the hyperbolic base,
        ``rho_out`` / ``rho_in`` angle between the particle and the outgoing
        side ``k`` / incoming side ``k - 1``,
        ``omega`` dihedral angle at the particle,
        ``alpha_out`` / ``alpha_in`` dihedral angle at the outgoing /
        incoming base side, computed in the link of this corner,
        ``E`` Euclidean length of side ``k``,
        ``omega_euclid`` Euclidean base angle at the corner.

    Raises
    ------
    PrismDoesNotExist
        When some prism of the batch does not exist; ``details['rows']``
        lists the failing rows.
    """
    L = np.asarray(L, dtype=float)
    H = np.asarray(H, dtype=float)
    ok, E2 = existence_mask(L, H)
    if not np.all(ok):
        rows = np.flatnonzero(~ok)
        raise PrismDoesNotExist("horoprism does not exist",
                                rows=rows.tolist())
    L_in = np.roll(L, 1, axis=-1)
    H_next = np.roll(H, -1, axis=-1)
    H_prev = np.roll(H, 1, axis=-1)
    L_opp = np.roll(L, -1, axis=-1)

    cg = (np.cosh(L) * np.cosh(L_in) - np.cosh(L_opp)) / (np.sinh(L) * np.sinh(L_in))
    gamma = _acos(cg, "face angle")
    c_out = (np.cosh(L) - np.exp(H_next - H)) / np.sinh(L)
    c_in = (np.cosh(L_in) - np.exp(H_prev - H)) / np.sinh(L_in)
    rho_out = _acos(c_out, "rho")
    rho_in = _acos(c_in, "rho")
    s_out, s_in, sg = np.sin(rho_out), np.sin(rho_in), np.sin(gamma)
    omega = _acos((cg - c_out * c_in) / (s_out * s_in), "omega")
    alpha_out = _acos((c_in - cg * c_out) / (sg * s_out), "alpha")
    alpha_in = _acos((c_out - cg * c_in) / (sg * s_in), "alpha")

    E = np.sqrt(E2)
    E_in = np.roll(E, 1, axis=-1)
    E_opp = np.roll(E, -1, axis=-1)
    omega_euclid = np.arccos(np.clip((E * E + E_in * E_in - E_opp * E_opp)
                                     / (2 * E * E_in), -1.0, 1.0))
    return dict(gamma=gamma, rho_out=rho_out, rho_in=rho_in, omega=omega,
                alpha_out=alpha_out, alpha_in=alpha_in, E=E,
                omega_euclid=omega_euclid)


def base_layout(E, omega0):
    """Planar positions of the projected corners, shape (F, 3, 2).

    Corner 0 at the origin, corner 1 on the positive x-axis, counterclockwise.
    """
    F = E.shape[0]
    p = np.zeros((F, 3, 2))
    p[:, 1, 0] = E[:, 0]
    p[:, 2, 0] = E[:, 2] * np.cos(omega0)
    p[:, 2, 1] = E[:, 2] * np.sin(omega0)
    return p


def hemisphere(p, z):
    """Center ``q`` (F, 2) and radius ``R`` (F,) of the hemisphere through
    the embedded corners ``(p, z)``."""
    # |p - q|^2 + z^2 = R^2  <=>  2 p.q + w = |p|^2 + z^2,  w = R^2 - |q|^2
    A = np.concatenate([2 * p, np.ones(p.shape[:2] + (1,))], axis=2)
    rhs = np.sum(p * p, axis=2) + z * z
    try:
        sol = np.linalg.solve(A, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise DegenerateBase("projected base is degenerate") from exc
    q = sol[:, :2]
    R = np.sqrt(sol[:, 2] + np.sum(q * q, axis=1))
    return q, R


def _side_integrals(a, d, za2, zb2, R2, rule):
    """Integral over s in [0, 1] of ``-log(1 - u) / u``, ``u = |a + s d|^2 / R^2``.

    ``1 - u`` is evaluated as ``(za^2 (1-s) + zb^2 s + |d|^2 s (1-s)) / R^2``,
    free of cancellation near the rim of the hemisphere where the integrand
    has a nearly logarithmic singularity.
    """
    s, c, w = rule
    pts = a[:, None, :] + s[None, :, None] * d[:, None, :]
    u = np.sum(pts * pts, axis=2) / R2[:, None]
    dd = np.sum(d * d, axis=1)[:, None]
    one_minus = (za2[:, None] * c + zb2[:, None] * s + dd * s * c) / R2[:, None]
    small = u < 0.5
    safe = np.where(u > 1e-300, u, 1.0)
    num = np.where(small, -np.log1p(-np.where(small, u, 0.0)), -np.log(one_minus))
    g = np.where(u > 1e-300, num / safe, 1.0)
    return g @ w


def semi_ideal_volume(p, z):
    """Volume of semi-ideal pyramids over embedded triangles.

    The pyramid is everything above the hemisphere through the corners and
    over the projected triangle, so the volume is the planar integral of
    ``1 / (2 (R^2 - |x - q|^2))``.  In polar coordinates around ``q`` the
    radial integral is elementary, which leaves one integral per side with
    at worst logarithmic behaviour at its ends; those are done with
    tanh-sinh quadrature, checked against the rule of twice the step, with
    adaptive quadrature as a fallback where the two disagree.

    Parameters
    ----------
    p : ndarray, shape (F, 3, 2)
        Projected corners, counterclockwise.
    z : ndarray, shape (F, 3)
        Euclidean heights of the corners.
    """
    p = np.asarray(p, dtype=float)
    z = np.asarray(z, dtype=float)
    u, v = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area2 = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    if np.any(area2 <= 0):
        raise DegenerateBase("projected base is degenerate or clockwise")
    q, R = hemisphere(p, z)
    R2 = R * R
    F = p.shape[0]
    a = (p - q[:, None, :]).reshape(F * 3, 2)
    b = (np.roll(p, -1, axis=1) - q[:, None, :]).reshape(F * 3, 2)
    d = b - a
    R2s = np.repeat(R2, 3)
    C = a[:, 0] * d[:, 1] - a[:, 1] * d[:, 0]
    za2 = (z * z).reshape(F * 3)
    zb2 = (np.roll(z, -1, axis=1) ** 2).reshape(F * 3)
    args = (a, d, za2, zb2, R2s)
    lo = _side_integrals(*args, _TS_COARSE)
    hi = _side_integrals(*args, _TS_FINE)
    for k in np.flatnonzero(np.abs(hi - lo) > _QUAD_TOL * np.maximum(1.0, np.abs(hi))):
        one = tuple(x[k:k + 1] for x in args)
        hi[k] = integrate.quad(
            lambda s: float(_side_integrals(*one, (np.array([s]), np.array([1 - s]),
                                                    np.ones(1)))[0]),
            0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    contrib = C / (4 * R2s) * hi
    return contrib.reshape(F, 3).sum(axis=1)


def slope(p, z):
    """Largest hyperbolic distance from a corner to the foot of the apex.

    The orthogonal projection of the apex at infinity onto the base plane
    is the top ``(q, R)`` of the hemisphere.
    """
    q, R = hemisphere(p, z)
    dp2 = np.sum((p - q[:, None, :]) ** 2, axis=2)
    c = 1 + (dp2 + (R[:, None] - z) ** 2) / (2 * R[:, None] * z)
    return np.arccosh(np.maximum(c, 1.0)).max(axis=1)


@dataclass(frozen=True)
class Horoprism:
    """One truncated semi-ideal pyramid over a hyperbolic triangle.

    ``lengths[k]`` is the side from corner ``k`` to corner ``k + 1``;
    angle arrays are indexed by corner as in :func:`prism_angles`.
    """

    lengths: np.ndarray
    heights: np.ndarray
    gamma: np.ndarray
    rho_out: np.ndarray
    rho_in: np.ndarray
    omega: np.ndarray
    alpha_out: np.ndarray
    alpha_in: np.ndarray
    E: np.ndarray
    omega_euclid: np.ndarray

    @property
    def z(self):
        return np.exp(-self.heights)

    @property
    def dihedral(self):
        """Dihedral angle along each side (from the outgoing corner)."""
        return self.alpha_out

    def layout(self):
        return base_layout(self.E[None], self.omega_euclid[None, 0])[0]


def build_prism(lengths, heights):
    """Build a :class:`Horoprism` from three side lengths and three heights.

    Raises
    ------
    PrismDoesNotExist
        With ``side`` (a side whose height gap is too large) or
        ``triangle_inequality`` set in the details.
    """
    L = np.asarray(lengths, dtype=float).reshape(1, 3)
    H = np.asarray(heights, dtype=float).reshape(1, 3)
    E2 = euclidean_sides(L, H)[0]
    for k in range(3):
        if not E2[k] > 0:
            raise PrismDoesNotExist("height gap reaches the side length", side=k)
    E = np.sqrt(E2)
    for k in range(3):
        if not E[k] < E[(k + 1) % 3] + E[(k + 2) % 3]:
            raise PrismDoesNotExist("Euclidean base degenerates",
                                    triangle_inequality=k)
    ang = prism_angles(L, H)
    return Horoprism(lengths=L[0].copy(), heights=H[0].copy(),
                     **{k: v[0] for k, v in ang.items()})


def prism_volume(prism):
    """Volume of the full (untruncated) semi-ideal pyramid."""
    p = prism.layout()[None]
    return float(semi_ideal_volume(p, prism.z[None])[0])


def prism_slope(prism):
    return float(slope(prism.layout()[None], prism.z[None])[0])
