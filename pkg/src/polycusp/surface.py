"""Hyperbolic cone metrics on the torus.

A metric is stored as a triangulation in half-edge form together with
hyperbolic edge lengths.  Rows of :attr:`ConeSurface.triangles` are
counterclockwise, so half-edge ``triangles[t, k]`` runs from the origin of
slot ``k`` to the origin of slot ``k + 1``.  Loops and multiple edges are allowed; vertices
are the orbits of ``h -> next(opposite(h))``.

Surfaces are immutable: :func:`flip` and :func:`delaunay` return new
objects that keep vertex labels and half-edge ids of the input.
"""

import json
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError, IterationLimit, NotFlippable

EPS_ANGLE = 1e-10
LENGTH_RTOL = 1e-12
# Strict convexity margin for the quadrilateral around a flippable edge.
CONVEX_TOL = 1e-12


def cos_law(a, b, c):
    """Cosine of the angle between sides ``a`` and ``b`` opposite ``c``."""
    return (np.cosh(a) * np.cosh(b) - np.cosh(c)) / (np.sinh(a) * np.sinh(b))


class ConeSurface:
    """Triangulated hyperbolic torus with conical singularities.

    Parameters
    ----------
    triangles : array_like, shape (F, 3)
        Half-edge ids of every triangle, counterclockwise.
    opposite : array_like, shape (3F,)
        Fixed-point-free involution pairing half-edges.
    length : array_like, shape (3F,)
        Hyperbolic length of every half-edge.
    vertex_of : array_like, optional
        Vertex label of the origin of every half-edge.  Derived from the
        combinatorics when omitted (vertices numbered by their smallest
        outgoing half-edge).  Passing it keeps labels stable across flips.
    validate : bool
        Run the full geometric validation (triangle inequalities, cone
        angles).  Combinatorial checks always run.

    Raises
    ------
    InputError
        Non-torus topology, bad gluing, triangle inequality failure or a
        cone angle of at least ``2*pi``.
    """

    def __init__(self, triangles, opposite, length, vertex_of=None,
                 validate=True):
        tri = np.array(triangles, dtype=np.int64)
        opp = np.array(opposite, dtype=np.int64)
        lng = np.array(length, dtype=float)
        if tri.ndim != 2 or tri.shape[1] != 3 or tri.shape[0] == 0:
            raise InputError("triangles must be a non-empty list of triples")
        n_half = 3 * tri.shape[0]
        if opp.shape != (n_half,) or lng.shape != (n_half,):
            raise InputError("opposite and length need one entry per half-edge")
        if sorted(tri.ravel().tolist()) != list(range(n_half)):
            raise InputError("every half-edge id 0..3F-1 must appear exactly once")
        if np.any(opp < 0) or np.any(opp >= n_half):
            raise InputError("opposite refers to unknown half-edges")
        idx = np.arange(n_half)
        if np.any(opp[opp] != idx) or np.any(opp == idx):
            raise InputError("opposite must be a fixed-point-free involution")
        if not np.all(np.isfinite(lng)) or np.any(lng <= 0):
            bad = int(np.flatnonzero(~(lng > 0))[0]) if np.any(~(lng > 0)) else -1
            raise InputError("length must be positive", half_edge=bad)
        mismatch = np.abs(lng - lng[opp]) > LENGTH_RTOL * np.maximum(lng, lng[opp])
        if np.any(mismatch):
            h = int(np.flatnonzero(mismatch)[0])
            raise InputError("glued half-edges have different lengths",
                             pair=[h, int(opp[h])])
        # make paired lengths bitwise equal
        lo = idx < opp
        lng[opp[lo]] = lng[lo]

        self._tri = tri
        self._opp = opp
        self._len = lng
        for a in (self._tri, self._opp, self._len):
            a.flags.writeable = False

        tri_of = np.empty(n_half, dtype=np.int64)
        slot = np.empty(n_half, dtype=np.int64)
        tri_of[tri.ravel()] = np.repeat(np.arange(tri.shape[0]), 3)
        slot[tri.ravel()] = np.tile(np.arange(3), tri.shape[0])
        self.tri_of = tri_of
        self.slot = slot
        self.next = tri[tri_of, (slot + 1) % 3]
        self.prev = tri[tri_of, (slot + 2) % 3]

        sigma = self.next[opp]
        if vertex_of is None:
            graph = coo_matrix((np.ones(n_half), (idx, sigma)),
                               shape=(n_half, n_half))
            _, labels = connected_components(graph, directed=True,
                                             connection="weak")
            # renumber by smallest half-edge in each orbit
            first = {}
            for h, lab in enumerate(labels):
                first.setdefault(lab, len(first))
            vertex_of = np.array([first[lab] for lab in labels], dtype=np.int64)
        else:
            vertex_of = np.array(vertex_of, dtype=np.int64)
            if vertex_of.shape != (n_half,) or np.any(vertex_of[sigma] != vertex_of):
                raise InputError("vertex labels inconsistent with the gluing")
        self.vertex_of = vertex_of
        self.n_vertices = int(vertex_of.max()) + 1
        if sorted(set(vertex_of.tolist())) != list(range(self.n_vertices)):
            raise InputError("vertex labels must be 0..V-1")

        reps = np.flatnonzero(idx < opp)
        self.edges = np.stack([reps, opp[reps]], axis=1)
        edge_of = np.empty(n_half, dtype=np.int64)
        edge_of[reps] = np.arange(len(reps))
        edge_of[opp[reps]] = np.arange(len(reps))
        self.edge_of = edge_of

        euler = self.n_vertices - self.n_edges + self.n_triangles
        if euler != 0:
            raise InputError(f"surface is not a torus (Euler characteristic {euler})")

        cosg = cos_law(lng, lng[self.prev], lng[self.next])
        if validate:
            bad = ~(np.abs(cosg) < 1.0)
            if np.any(bad):
                t = int(tri_of[np.flatnonzero(bad)[0]])
                raise InputError("triangle inequality fails", triangle=t)
        self.gamma = np.arccos(np.clip(cosg, -1.0, 1.0))
        self.cone_angle = np.bincount(vertex_of, weights=self.gamma,
                                      minlength=self.n_vertices)
        if validate:
            bad = np.flatnonzero(self.cone_angle >= 2 * math.pi - EPS_ANGLE)
            if len(bad):
                v = int(bad[0])
                raise InputError("cone angle must be below 2*pi", vertex=v,
                                 cone_angle=float(self.cone_angle[v]))

    # -- basic accessors -------------------------------------------------
    @property
    def triangles(self):
        return self._tri

    @property
    def opposite(self):
        return self._opp

    @property
    def length(self):
        return self._len

    @property
    def n_triangles(self):
        return self._tri.shape[0]

    @property
    def n_edges(self):
        return self._tri.size // 2

    @property
    def n_half_edges(self):
        return self._tri.size

    def head(self, h):
        """Vertex at the end of half-edge ``h``."""
        return self.vertex_of[self.next[h]]

    def triangle_vertices(self):
        """Vertex triples of all triangles, shape (F, 3)."""
        return self.vertex_of[self._tri]

    def edge_endpoints(self):
        """Vertex pairs ``(origin, head)`` of the representative half-edges."""
        reps = self.edges[:, 0]
        return np.stack([self.vertex_of[reps], self.head(reps)], axis=1)

    def edge_lengths(self):
        return self._len[self.edges[:, 0]]

    @property
    def curvature(self):
        """Singular curvature ``2*pi - cone_angle`` of every vertex."""
        return 2 * math.pi - self.cone_angle

    @property
    def area(self):
        """Hyperbolic area, summed as angle defects of the triangles."""
        sums = self.gamma[self._tri].sum(axis=1)
        return float(np.sum(math.pi - sums))

    def corner_lengths(self):
        """Side lengths per triangle row; column ``k`` is the side leaving slot ``k``."""
        return self._len[self._tri]

    def to_dict(self):
        """Input-schema document; ``vertex_of`` pins the vertex labels."""
        return {
            "triangles": self._tri.tolist(),
            "opposite": self._opp.tolist(),
            "length": self._len.tolist(),
            "vertex_of": self.vertex_of.tolist(),
        }

    def __repr__(self):
        return (f"ConeSurface(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_triangles})")


def load_surface(document):
    """Parse a surface from a JSON string, bytes, or an already decoded dict.

    The expected shape is ``{"triangles": [[h0, h1, h2], ...],
    "opposite": [...], "length": [...]}``, optionally with ``"vertex_of"``
    giving the vertex label of the origin of every half-edge.
    """
    if isinstance(document, (str, bytes, bytearray)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise InputError("surface document must be a JSON object")
    for key in ("triangles", "opposite", "length"):
        if key not in document:
            raise InputError(f"missing key {key!r}")
    tri, opp, lng = document["triangles"], document["opposite"], document["length"]
    if not (isinstance(tri, list) and all(isinstance(t, list) and len(t) == 3
                                          for t in tri)):
        raise InputError("triangles must be a list of triples")
    for name, seq in (("triangles", [x for t in tri for x in t]),
                      ("opposite", opp)):
        if not isinstance(seq, list) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in seq):
            raise InputError(f"{name} must contain integers")
    if not isinstance(lng, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in lng):
        raise InputError("length must be a list of numbers")
    vertex_of = document.get("vertex_of")
    if vertex_of is not None and not (isinstance(vertex_of, list) and all(
            isinstance(x, int) and not isinstance(x, bool) for x in vertex_of)):
        raise InputError("vertex_of must contain integers")
    return ConeSurface(tri, opp, lng, vertex_of=vertex_of)


def corner_angle(surface, corner):
    """Angle of the triangle of half-edge ``corner`` at its origin."""
    return float(surface.gamma[corner])


def _quad(surface, edge):
    h, g = (int(x) for x in surface.edges[edge])
    return h, g


def develop_quad(surface, edge):
    """Develop the two triangles adjacent to ``edge`` into the Poincare disk.

    Returns
    -------
    points : ndarray, shape (4, 2)
        Disk coordinates of ``i, j, k, l`` where ``ij`` is the edge
        (``i`` the origin of its representative half-edge, placed at the
        center), ``k`` the apex on its left and ``l`` on its right.
    convex : bool
        Whether ``ikjl`` is a strictly convex quadrilateral.

    Raises
    ------
    NotFlippable
        When both sides of the edge belong to the same triangle.
    """
    h, g = _quad(surface, edge)
    if surface.tri_of[h] == surface.tri_of[g]:
        raise NotFlippable("both sides of the edge lie in one triangle",
                           edge=int(edge))
    lng, gam = surface.length, surface.gamma
    ang_i = gam[h] + gam[surface.next[g]]
    ang_j = gam[surface.next[h]] + gam[g]
    convex = bool(ang_i < math.pi - CONVEX_TOL and ang_j < math.pi - CONVEX_TOL)

    def disk(dist, phi):
        r = math.tanh(dist / 2)
        return (r * math.cos(phi), r * math.sin(phi))

    pts = np.array([
        (0.0, 0.0),
        disk(lng[h], 0.0),
        disk(lng[surface.prev[h]], gam[h]),
        disk(lng[surface.next[g]], -gam[surface.next[g]]),
    ])
    return pts, convex


def flipped_length(surface, edge):
    """Length of the other diagonal of the quadrilateral around ``edge``."""
    h, g = _quad(surface, edge)
    a = surface.length[surface.prev[h]]
    b = surface.length[surface.next[g]]
    ang = surface.gamma[h] + surface.gamma[surface.next[g]]
    c = math.cosh(a) * math.cosh(b) - math.sinh(a) * math.sinh(b) * math.cos(ang)
    return math.acosh(max(c, 1.0))


def flip(surface, edge):
    """Replace ``edge`` by the other diagonal of its quadrilateral.

    Half-edge ids and vertex labels are kept; the two triangles keep their
    row indices.

    Raises
    ------
    NotFlippable
        If the edge borders a single triangle or its quadrilateral is not
        strictly convex.
    """
    _, convex = develop_quad(surface, edge)
    if not convex:
        raise NotFlippable("quadrilateral is not strictly convex", edge=int(edge))
    h, g = _quad(surface, edge)
    nx = surface.next
    h1, h2 = nx[h], nx[nx[h]]
    g1, g2 = nx[g], nx[nx[g]]
    t1, t2 = surface.tri_of[h], surface.tri_of[g]
    new_len = flipped_length(surface, edge)

    tri = surface.triangles.copy()
    tri[t1] = (h, h2, g1)
    tri[t2] = (g, g2, h1)
    lng = surface.length.copy()
    lng[h] = lng[g] = new_len
    vo = surface.vertex_of.copy()
    # h now runs l -> k, g runs k -> l
    vo[h] = surface.vertex_of[g2]
    vo[g] = surface.vertex_of[h2]
    return ConeSurface(tri, surface.opposite, lng, vertex_of=vo, validate=False)


def delaunay_defect(surface):
    """Per-edge violation of the local (generalized circle) Delaunay condition.

    For the two triangles ``ijk`` and ``jil`` at an edge, this is half of
    ``(angle_k + angle_l) - (sum of the four angles at i and j)``.  An edge
    is locally Delaunay iff the value is ``<= 0``; in the Euclidean limit it
    reduces to ``angle_k + angle_l - pi``.
    """
    gam, nx, pv = surface.gamma, surface.next, surface.prev
    h, g = surface.edges[:, 0], surface.edges[:, 1]
    opp_sum = gam[pv[h]] + gam[pv[g]]
    adj_sum = gam[h] + gam[nx[h]] + gam[g] + gam[nx[g]]
    return 0.5 * (opp_sum - adj_sum)


def is_delaunay(surface, eps=EPS_ANGLE):
    return bool(np.all(delaunay_defect(surface) <= eps))


def delaunay_with_flips(surface, rng=None, eps=EPS_ANGLE):
    """Flip non-Delaunay edges until none remain.

    Edges are processed worst-first (ties by smallest edge id) unless a
    numpy ``Generator`` is passed, in which case a uniformly random
    offending edge is flipped at each step.

    Returns the Delaunay surface and the list of flipped edge ids.
    """
    cap = 100 * surface.n_edges ** 2
    flips = []
    while True:
        defect = delaunay_defect(surface)
        bad = np.flatnonzero(defect > eps)
        if len(bad) == 0:
            return surface, flips
        if len(flips) >= cap:
            raise IterationLimit("Delaunay flip limit reached", flips=len(flips))
        if rng is None:
            e = int(bad[np.argmax(defect[bad])])
        else:
            e = int(rng.choice(bad))
        surface = flip(surface, e)
        flips.append(e)


def delaunay(surface, rng=None, eps=EPS_ANGLE):
    """Intrinsic Delaunay triangulation of the same metric."""
    return delaunay_with_flips(surface, rng=rng, eps=eps)[0]


# -- points on the surface ---------------------------------------------------

def _hyperboloid_quad(surface, edge):
    """Hyperboloid coordinates of ``i, j, k, l`` around ``edge``."""
    h, g = _quad(surface, edge)
    lng, gam = surface.length, surface.gamma

    def point(dist, phi):
        return np.array([math.sinh(dist) * math.cos(phi),
                         math.sinh(dist) * math.sin(phi), math.cosh(dist)])

    return np.array([
        point(0.0, 0.0),
        point(lng[h], 0.0),
        point(lng[surface.prev[h]], gam[h]),
        point(lng[surface.next[g]], -gam[surface.next[g]]),
    ])


class SurfacePoints:
    """Points of the metric surface located in a triangulation.

    Each point is a triangle index and three non-negative weights; the
    point is the normalization of the weighted sum of the hyperboloid
    vectors of the triangle's corners (in row order).  Weights are
    intrinsic, so they do not depend on how the triangle is placed.
    """

    def __init__(self, tri, weights):
        self.tri = np.array(tri, dtype=np.int64)
        w = np.array(weights, dtype=float)
        self.weights = w / w.sum(axis=1, keepdims=True)

    @classmethod
    def random(cls, surface, count, rng):
        tri = rng.integers(0, surface.n_triangles, size=count)
        w = rng.dirichlet(np.ones(3), size=count)
        return cls(tri, w)

    def copy(self):
        return SurfacePoints(self.tri.copy(), self.weights.copy())

    def __len__(self):
        return len(self.tri)


def track_flip(surface, points, edge):
    """Relocate ``points`` of ``surface`` into ``flip(surface, edge)``.

    Returns a new :class:`SurfacePoints`; points outside the two affected
    triangles are unchanged.
    """
    h, g = _quad(surface, edge)
    nx = surface.next
    t1, t2 = surface.tri_of[h], surface.tri_of[g]
    X = _hyperboloid_quad(surface, edge)
    # quad vertex index (0=i, 1=j, 2=k, 3=l) of every old row slot
    which = {}
    for hh, q in ((h, 0), (nx[h], 1), (nx[nx[h]], 2)):
        which[(t1, int(surface.slot[hh]))] = q
    for gg, q in ((g, 1), (nx[g], 0), (nx[nx[g]], 3)):
        which[(t2, int(surface.slot[gg]))] = q
    new_rows = {t1: (3, 2, 0), t2: (2, 3, 1)}  # (l,k,i) and (k,l,j)
    solve = {t: np.linalg.inv(X[list(q)].T) for t, q in new_rows.items()}

    out = points.copy()
    for idx in np.flatnonzero((points.tri == t1) | (points.tri == t2)):
        t = int(points.tri[idx])
        Y = sum(points.weights[idx, s] * X[which[(t, s)]] for s in range(3))
        best = None
        for tn, inv in solve.items():
            c = inv @ Y
            if best is None or c.min() > best[1].min():
                best = (tn, c)
        tn, c = best
        c = np.clip(c, 0.0, None)
        out.tri[idx] = tn
        out.weights[idx] = c / c.sum()
    return out


def replay_flips(surface, points, flips):
    """Apply a flip sequence to ``surface`` while tracking ``points``."""
    for e in flips:
        points = track_flip(surface, points, e)
        surface = flip(surface, e)
    return surface, points


def point_cosh_gram(surface, points):
    """``-<Y, Y>`` for the unnormalized weighted sums, shape (m,)."""
    L = surface.corner_lengths()[points.tri]  # sides 01, 12, 20
    w = points.weights
    ch = np.cosh(L)
    return (np.sum(w * w, axis=1)
            + 2 * (w[:, 0] * w[:, 1] * ch[:, 0]
                   + w[:, 1] * w[:, 2] * ch[:, 1]
                   + w[:, 2] * w[:, 0] * ch[:, 2]))
