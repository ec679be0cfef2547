"""Ready-made cone metrics on the torus.

Random metrics are produced by triangulating random points on a flat torus
(periodic Euclidean Delaunay triangulation) and reusing the Euclidean edge
lengths, rescaled, as hyperbolic lengths.  A hyperbolic triangle has a
smaller angle sum than the Euclidean one with the same sides, so every
cone angle ends up strictly below ``2*pi``.
"""

import math

import numpy as np
from scipy.spatial import Delaunay

from .errors import InputError
from .surface import ConeSurface


def _torus_from_tagged_triangles(tris):
    """Glue triangles given as ``((v, offset), ...)`` corner triples.

    ``offset`` is the lattice translate (a pair of ints) of vertex ``v``.
    Half-edge ``u -> w`` of one triangle is glued to ``w -> u`` of another
    when the translation difference matches.
    """
    key_to_half = {}
    triangles = []
    for t, corners in enumerate(tris):
        row = []
        for k in range(3):
            (u, ou), (w, ow) = corners[k], corners[(k + 1) % 3]
            h = 3 * t + k
            key = (u, w, ow[0] - ou[0], ow[1] - ou[1])
            if key in key_to_half:
                raise ValueError("duplicate half-edge in periodic triangulation")
            key_to_half[key] = h
            row.append(h)
        triangles.append(row)
    opposite = [0] * (3 * len(tris))
    for (u, w, dx, dy), h in key_to_half.items():
        opposite[h] = key_to_half[(w, u, -dx, -dy)]
    return triangles, opposite


def periodic_delaunay(points, basis):
    """Euclidean Delaunay triangulation of points on the flat torus ``R^2 / basis``.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        Fractional coordinates in ``[0, 1)^2``.
    basis : array_like, shape (2, 2)
        Rows are the lattice generators.

    Returns
    -------
    triangles, opposite, length
        Half-edge description with Euclidean lengths.
    """
    frac = np.asarray(points, dtype=float) % 1.0
    basis = np.asarray(basis, dtype=float)
    n = len(frac)
    reach = 2
    offsets = [(a, b) for a in range(-reach, reach + 1)
               for b in range(-reach, reach + 1)]
    tiled = np.concatenate([frac + np.array(o) for o in offsets])
    cart = tiled @ basis
    dt = Delaunay(cart)
    tris = []
    for simplex in dt.simplices:
        cen = tiled[simplex].mean(axis=0)
        if not np.all((cen >= 0) & (cen < 1)):
            continue
        p = cart[simplex]
        u, v = p[1] - p[0], p[2] - p[0]
        if u[0] * v[1] - u[1] * v[0] < 0:
            simplex = simplex[[0, 2, 1]]
        tris.append(tuple((int(s % n), offsets[s // n]) for s in simplex))
    triangles, opposite = _torus_from_tagged_triangles(tris)
    length = []
    for corners in tris:
        for k in range(3):
            (u, ou), (w, ow) = corners[k], corners[(k + 1) % 3]
            pu = (frac[u] + ou) @ basis
            pw = (frac[w] + ow) @ basis
            length.append(float(np.linalg.norm(pw - pu)))
    return triangles, opposite, length


def _spread_points(n, rng, min_dist):
    pts = []
    for _ in range(10000 * max(n, 1)):
        if len(pts) == n:
            break
        p = rng.random(2)
        ok = True
        for q in pts:
            d = (p - q + 0.5) % 1.0 - 0.5
            if d @ d < min_dist ** 2:
                ok = False
                break
        if ok:
            pts.append(p)
    if len(pts) < n:
        raise RuntimeError("could not place points")
    return np.array(pts)


def random_metric(n, rng, mean_length=None):
    """Random valid cone metric with ``n`` singularities.

    The flat torus has a random reduced lattice of unit area; the points
    keep a minimum separation so no triangle is extremely thin.  Edge
    lengths are rescaled so that their mean is ``mean_length`` (random in
    ``[0.4, 1.2]`` by default).
    """
    if mean_length is None:
        mean_length = rng.uniform(0.4, 1.2)
    for _ in range(100):
        a = rng.uniform(-0.45, 0.45)
        b = rng.uniform(0.85, 1.25)
        basis = np.array([[1.0, 0.0], [a, b]]) / math.sqrt(b)
        pts = _spread_points(n, rng, 0.5 / math.sqrt(n))
        tri, opp, lng = periodic_delaunay(pts, basis)
        lng = np.asarray(lng)
        lng *= mean_length / lng.mean()
        try:
            return ConeSurface(tri, opp, lng)
        except InputError:
            continue
    raise RuntimeError("failed to generate a metric")


def parallelogram_torus(a, b, diagonal):
    """One-vertex torus glued from two triangles.

    The sides of the fundamental quadrilateral have lengths ``a`` and
    ``b``; ``diagonal`` is the edge splitting it.
    """
    triangles = [[0, 1, 2], [3, 4, 5]]
    opposite = [4, 5, 3, 2, 0, 1]
    length = [a, b, diagonal, diagonal, a, b]
    return ConeSurface(triangles, opposite, length)


def equilateral_torus(side=1.0):
    """Two equilateral triangles glued into a one-vertex torus."""
    return parallelogram_torus(side, side, side)


def square_torus(corner_height=1.0, width=1.0):
    """One-vertex metric of the simplest convex parabolic polyhedron.

    The vertex orbit is the square lattice of mesh ``width`` at Euclidean
    height ``corner_height`` of the upper half-space; the torus is the
    base of one isosceles quadrangular pyramid, split by a diagonal.
    """
    z = corner_height
    side = math.acosh(1 + width ** 2 / (2 * z * z))
    diag = math.acosh(1 + 2 * width ** 2 / (2 * z * z))
    return parallelogram_torus(side, side, diag)


def punctured_square(radius=1.5, apex_angle=1.3):
    """The two-vertex particle example with a punctured square face.

    Four congruent triangles ``a b_i b_(i+1)`` with legs ``radius`` and
    angle ``apex_angle`` (< pi/2) at ``a`` are glued cyclically around
    ``a``; opposite sides of the outer quadrilateral are identified.

    Returns
    -------
    surface : ConeSurface
    heights : ndarray
        Particle lengths ``(h_a, h_b)`` of the cusp with particles in which
        the legs are flat edges: ``a`` on top of the unit hemisphere and
        the ``b_i`` on it.
    """
    if not 0 < apex_angle < math.pi / 2:
        raise ValueError("apex angle must lie in (0, pi/2)")
    ch, sh = math.cosh(radius), math.sinh(radius)
    base = math.acosh(ch * ch - sh * sh * math.cos(apex_angle))
    # triangle i: (a, b_i, b_(i+1)); half-edges 3i: a->b_i, 3i+1: b_i->b_(i+1),
    # 3i+2: b_(i+1)->a
    triangles = [[3 * i, 3 * i + 1, 3 * i + 2] for i in range(4)]
    opposite = [0] * 12
    for i in range(4):
        j = (i - 1) % 4
        opposite[3 * i] = 3 * j + 2
        opposite[3 * j + 2] = 3 * i
    # b1b2 ~ b3b4 and b2b3 ~ b4b1 by translation
    opposite[1], opposite[7] = 7, 1
    opposite[4], opposite[10] = 10, 4
    length = [radius, base, radius] * 4
    surface = ConeSurface(triangles, opposite, length)
    heights = np.zeros(surface.n_vertices)
    a = surface.vertex_of[0]
    heights[1 - a] = math.log(ch)
    return surface, heights
