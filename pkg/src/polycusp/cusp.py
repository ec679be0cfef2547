"""Cusps with particles over a fixed cone metric.

A state is a triangulation of the metric together with truncated particle
lengths (heights), normalized to sum zero.  Over every triangle sits a
horoprism; the state is feasible (a convex cusp with particles) when all
prisms exist and the total dihedral angle at every edge is at most ``pi``.
"""

from functools import cached_property

import numpy as np

from . import prism as _prism
from .errors import (HeightGapTooLarge, Infeasible, IterationLimit,
                     NotFlippable, PrismDoesNotExist)
from .surface import EPS_ANGLE, flip, point_cosh_gram


def gauge(heights):
    """Sum-zero representative of a height vector."""
    h = np.array(heights, dtype=float)
    return h - h.mean()


class CuspState:
    """Horoprisms over a triangulation, with cached angles.

    Use :func:`build_state` or :func:`make_feasible` rather than the
    constructor; the constructor does not check the dihedral angles.

    Attributes
    ----------
    surface : ConeSurface
    heights : ndarray
        Sum-zero truncated particle lengths, one per vertex.
    alpha : ndarray
        Dihedral angle along every half-edge inside its own prism.
    theta : ndarray
        Total dihedral angle per edge.
    omega, kappa : ndarray
        Total angle around each particle and its curvature ``2*pi - omega``.
    flips : list of int
        Edge ids flipped (in order) to reach this triangulation from the
        one passed to :func:`make_feasible`.
    """

    def __init__(self, surface, heights, flips=()):
        h = gauge(heights)
        if h.shape != (surface.n_vertices,):
            raise ValueError("one height per vertex required")
        self.surface = surface
        self.heights = h
        self.flips = list(flips)
        tv = surface.triangle_vertices()
        L = surface.corner_lengths()
        H = h[tv]
        try:
            ang = _prism.prism_angles(L, H)
        except PrismDoesNotExist as exc:
            rows = exc.details.get("rows", [])
            raise Infeasible("PrismMissing", "a horoprism does not exist",
                             triangles=rows) from None
        self.angles = ang
        tri = surface.triangles
        alpha = np.empty(surface.n_half_edges)
        alpha[tri] = ang["alpha_out"]
        self.alpha = alpha
        self.alpha_check = np.empty(surface.n_half_edges)
        self.alpha_check[tri] = np.roll(ang["alpha_in"], -1, axis=1)
        rho = np.empty(surface.n_half_edges)
        rho[tri] = ang["rho_out"]
        self.rho = rho
        e = surface.edges
        self.theta = alpha[e[:, 0]] + alpha[e[:, 1]]
        self.omega = np.bincount(tv.ravel(), weights=ang["omega"].ravel(),
                                 minlength=surface.n_vertices)
        self.kappa = 2 * np.pi - self.omega

    @property
    def n(self):
        return self.surface.n_vertices

    def bad_edges(self, eps=EPS_ANGLE):
        return np.flatnonzero(self.theta > np.pi + eps)

    def flat_edges(self, eps=EPS_ANGLE):
        """Edges with total dihedral angle ``pi`` up to ``eps``."""
        return np.abs(self.theta - np.pi) <= eps

    @property
    def is_convex(self):
        return len(self.bad_edges()) == 0

    def layout(self):
        """Projected corner positions per triangle, shape (F, 3, 2)."""
        return _prism.base_layout(self.angles["E"], self.angles["omega_euclid"][:, 0])

    @property
    def corner_z(self):
        return np.exp(-self.heights[self.surface.triangle_vertices()])

    @cached_property
    def prism_volumes(self):
        return _prism.semi_ideal_volume(self.layout(), self.corner_z)

    @property
    def volume(self):
        return float(np.sum(self.prism_volumes))

    def prisms(self):
        """Per-triangle :class:`~polycusp.prism.Horoprism` objects."""
        L = self.surface.corner_lengths()
        H = self.heights[self.surface.triangle_vertices()]
        return [_prism.Horoprism(lengths=L[t], heights=H[t],
                                 **{k: v[t] for k, v in self.angles.items()})
                for t in range(self.surface.n_triangles)]

    def __repr__(self):
        return (f"CuspState(n={self.n}, max|kappa|={np.abs(self.kappa).max():.3g}, "
                f"max theta-pi={np.max(self.theta) - np.pi:.3g})")


def build_state(surface, heights):
    """Cusp with particles over the given triangulation.

    Raises
    ------
    Infeasible
        ``PrismMissing`` if some horoprism does not exist, ``BadEdge`` if a
        total dihedral angle exceeds ``pi``.
    """
    state = CuspState(surface, heights)
    bad = state.bad_edges()
    if len(bad):
        e = int(bad[np.argmax(state.theta[bad])])
        raise Infeasible("BadEdge", "edge is not convex", edge=e,
                         theta=float(state.theta[e]))
    return state


def is_bad(state, edge, eps=EPS_ANGLE):
    """Whether the total dihedral angle at ``edge`` exceeds ``pi``."""
    return bool(state.theta[edge] > np.pi + eps)


def make_feasible(surface, heights, rng=None, max_flips=None):
    """Flip bad edges until the cusp with particles is convex.

    Bad edges are flipped largest ``theta`` first, ties broken by the
    smaller edge id; pass a numpy ``Generator`` as ``rng`` for a uniformly
    random order instead.  If the chosen bad edge cannot be flipped, the
    other bad edges are tried before giving up.

    Raises
    ------
    Infeasible
        ``PrismMissing`` when a prism of an intermediate triangulation does
        not exist, ``StuckBadEdge`` when no bad edge can be flipped.
    IterationLimit
        After ``max_flips`` flips (default ``100 * E**2``).
    """
    if max_flips is None:
        max_flips = 100 * surface.n_edges ** 2
    flips = []
    state = CuspState(surface, heights)
    while True:
        bad = state.bad_edges()
        if len(bad) == 0:
            return state
        if len(flips) >= max_flips:
            raise IterationLimit("flip limit reached", flips=len(flips))
        if rng is None:
            order = bad[np.lexsort((bad, -state.theta[bad]))]
        else:
            order = rng.permutation(bad)
        for e in order:
            try:
                new_surface = flip(state.surface, int(e))
            except NotFlippable:
                continue
            break
        else:
            e = int(order[0])
            raise Infeasible("StuckBadEdge", "bad edge cannot be flipped",
                             edge=e, theta=float(state.theta[e]))
        flips.append(int(e))
        state = CuspState(new_surface, state.heights, flips)


def feasibility_margin(state):
    """Distance-like slack to the boundary of the feasible chamber.

    Minimum of ``pi - theta_e`` over edges and ``l - |h_u - h_v|`` over
    sides, clipped at zero.
    """
    s = state.surface
    reps = s.edges[:, 0]
    gap = np.abs(state.heights[s.vertex_of[reps]] - state.heights[s.head(reps)])
    m = min(float(np.min(np.pi - state.theta)),
            float(np.min(s.edge_lengths() - gap)))
    return max(m, 0.0)


def pd_values(state, points):
    """Values of the piecewise distance-like height function at points.

    ``points`` is a :class:`~polycusp.surface.SurfacePoints` located in
    ``state.surface``.  On each triangle ``exp`` of the function is the
    restriction of a linear function of the hyperboloid model, so it is
    the weighted sum of the corner values divided by the norm of the
    weighted corner vectors.
    """
    tv = state.surface.triangle_vertices()[points.tri]
    w = points.weights
    num = np.sum(w * np.exp(state.heights[tv]), axis=1)
    return np.log(num) - 0.5 * np.log(point_cosh_gram(state.surface, points))


def isosceles_state(surface):
    """The convex cusp with all heights zero; ``surface`` should be Delaunay."""
    return build_state(surface, np.zeros(surface.n_vertices))


__all__ = ["CuspState", "build_state", "is_bad", "make_feasible",
           "feasibility_margin", "pd_values", "gauge", "isosceles_state",
           "HeightGapTooLarge"]
