"""Developing a cusp into the upper half-space.

The apex of the cusp is placed at infinity.  Vertical projection maps the
boundary onto a horosphere, where the truncation torus is flat with cone
points at the particles; laying its Euclidean triangles out in the plane
gives the horizontal coordinates ``p`` of the vertices, and the height of
vertex ``v`` is ``z = exp(-h_v)``.  The deck group then acts by Euclidean
motions of the plane, which are translations exactly when every curvature
vanishes.
"""

import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import RequiresZeroCurvature
from .prism import base_layout, hemisphere


def _motion(phi, t):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, t[0]], [s, c, t[1]], [0.0, 0.0, 1.0]])


def _apply(M, P):
    return P @ M[:2, :2].T + M[:2, 2]


def _rotation_angle(M):
    return math.atan2(M[1, 0], M[0, 0])


def _motion_from_pairs(a0, a1, b0, b1):
    """Rigid motion taking ``a0 -> b0`` with ``a1 - a0`` turned onto ``b1 - b0``."""
    da, db = a1 - a0, b1 - b0
    phi = math.atan2(db[1], db[0]) - math.atan2(da[1], da[0])
    M = _motion(phi, (0.0, 0.0))
    M[:2, 2] = b0 - M[:2, :2] @ a0
    return M


@dataclass
class Holonomy:
    """Euclidean motion ``x -> Rot(rot) x + tr`` of the horizontal plane."""

    rot: float
    tr: np.ndarray

    @classmethod
    def from_matrix(cls, M):
        return cls(_rotation_angle(M), M[:2, 2].copy())

    def matrix(self):
        return _motion(self.rot, self.tr)

    def __call__(self, p):
        return _apply(self.matrix(), np.asarray(p, dtype=float))


@dataclass
class DevelopedCusp:
    """A fundamental domain of the cusp in the upper half-space.

    Attributes
    ----------
    state : CuspState
    positions : ndarray, shape (F, 3, 2)
        Horizontal corner positions of every triangle in the cut-open domain.
    p, z : ndarray
        One representative copy ``(p_v, z_v)`` per vertex.
    tree : list of int
        Edges crossed by the spanning tree of triangles used for the layout.
    cut : list of int
        The remaining edges; the domain is glued to its translates along them.
    generators : tuple of int
        The two cut edges whose loops generate the fundamental group of the torus.
    g1, g2 : Holonomy
    transitions : dict
        Motion for every cut edge mapping the domain copy of its second
        triangle onto the continuation across the edge from the first.
    defects : ndarray
        Rotation defect ``2*pi - (total angle)`` at every vertex.
    """

    state: object
    positions: np.ndarray
    p: np.ndarray
    z: np.ndarray
    tree: list
    cut: list
    generators: tuple
    g1: Holonomy
    g2: Holonomy
    transitions: dict
    defects: np.ndarray
    loop_defects: np.ndarray

    @property
    def corner_vertex(self):
        return self.state.surface.triangle_vertices()

    @property
    def corner_z(self):
        return self.z[self.corner_vertex]

    def commutator(self):
        """Displacement of the origin under ``g1 g2 g1^-1 g2^-1``."""
        A, B = self.g1.matrix(), self.g2.matrix()
        C = A @ B @ np.linalg.inv(A) @ np.linalg.inv(B)
        return float(np.hypot(*C[:2, 2])), _rotation_angle(C)


def _tree_cotree(surface):
    """Primal BFS tree on the vertices and a dual BFS tree avoiding it.

    Returns the dual tree as parent half-edges per triangle (or -1) in BFS
    order, plus the set of primal tree edges.
    """
    n, F = surface.n_vertices, surface.n_triangles
    e = surface.edges
    u, v = surface.vertex_of[e[:, 0]], surface.head(e[:, 0])
    keep = u != v
    ids = np.flatnonzero(keep)
    primal = set()
    parent_vertex = {0: None}
    queue = deque([0])
    # adjacency with edge ids in increasing order
    adj = [[] for _ in range(n)]
    for k in ids:
        adj[u[k]].append((int(k), int(v[k])))
        adj[v[k]].append((int(k), int(u[k])))
    while queue:
        a = queue.popleft()
        for k, b in sorted(adj[a]):
            if b not in parent_vertex:
                parent_vertex[b] = a
                primal.add(k)
                queue.append(b)
    parent = np.full(F, -1)
    seen = np.zeros(F, dtype=bool)
    seen[0] = True
    order = [0]
    queue = deque([0])
    tree = []
    while queue:
        t = queue.popleft()
        for h in surface.triangles[t]:
            g = surface.opposite[h]
            t2 = surface.tri_of[g]
            k = surface.edge_of[h]
            if seen[t2] or k in primal:
                continue
            seen[t2] = True
            parent[t2] = g
            order.append(int(t2))
            tree.append(int(k))
            queue.append(t2)
    return order, parent, primal, tree


def develop(state):
    """Lay out a fundamental domain and compute the holonomy.

    Triangles are placed along a breadth-first spanning tree of the dual
    graph starting from triangle 0, chosen disjoint from a spanning tree of
    the vertex graph.  The two edges in neither tree close up the loops
    that generate the fundamental group.  The lowest-id vertex is moved to
    the origin and the plane is rotated so that ``g1`` moves along ``+x``.
    """
    s = state.surface
    ang = state.angles
    canon = base_layout(ang["E"], ang["omega_euclid"][:, 0])
    order, parent, primal, tree = _tree_cotree(s)
    F = s.n_triangles
    M = np.zeros((F, 3, 3))
    M[0] = np.eye(3)

    def glue(t, h):
        # motion carrying the canonical copy of the triangle across h onto
        # its position next to the canonical copy of t
        g = s.opposite[h]
        t2, k, m = s.tri_of[g], s.slot[h], s.slot[g]
        a, b = canon[t], canon[t2]
        return _motion_from_pairs(b[(m + 1) % 3], b[m], a[k], a[(k + 1) % 3])

    for t2 in order[1:]:
        g = parent[t2]
        h = s.opposite[g]
        t = s.tri_of[h]
        M[t2] = M[t] @ glue(t, h)

    tree_set = set(tree)
    cut = sorted(set(range(s.n_edges)) - tree_set)
    generators = tuple(k for k in cut if k not in primal)
    transitions = {}
    for k in cut:
        h = s.edges[k, 0]
        t, t2 = s.tri_of[h], s.tri_of[s.opposite[h]]
        transitions[k] = M[t] @ glue(t, h) @ np.linalg.inv(M[t2])

    # defects by angle sums and by composing motions around each vertex
    tv = s.triangle_vertices()
    angle_sum = np.bincount(tv.ravel(), weights=ang["omega_euclid"].ravel(),
                            minlength=s.n_vertices)
    defects = 2 * np.pi - angle_sum
    loop = np.zeros(s.n_vertices)
    done = np.zeros(s.n_half_edges, dtype=bool)
    for h0 in range(s.n_half_edges):
        if done[h0]:
            continue
        # corners around the origin of h0: h -> next(opposite(h)) ... walk
        # with prev so that the turn is counterclockwise
        R = np.eye(3)
        h = h0
        while True:
            done[h] = True
            t = s.tri_of[h]
            g = s.prev[h]
            R = R @ glue(t, g)
            h = s.opposite[g]
            if h == h0:
                break
        v = s.vertex_of[h0]
        loop[v] = -_rotation_angle(R)

    # normalization
    positions = np.einsum("fij,fkj->fki", M[:, :2, :2], canon) + M[:, None, :2, 2]
    first = {}
    for t in order:
        for k in range(3):
            first.setdefault(int(tv[t, k]), (t, k))
    origin = positions[first[0]]
    g1m = transitions[generators[0]]
    tr = g1m[:2, 2] + (g1m[:2, :2] - np.eye(2)) @ origin
    phi = -math.atan2(tr[1], tr[0])
    N = _motion(phi, (0.0, 0.0)) @ _motion(0.0, -origin)
    Ninv = np.linalg.inv(N)
    positions = _apply(N, positions.reshape(-1, 2)).reshape(F, 3, 2)
    transitions = {k: N @ T @ Ninv for k, T in transitions.items()}
    p = np.array([positions[first[v]] for v in range(s.n_vertices)])
    z = np.exp(-state.heights)
    g1 = Holonomy.from_matrix(transitions[generators[0]])
    g2 = Holonomy.from_matrix(transitions[generators[1]])
    # orient the pair like the plane
    if g1.tr[0] * g2.tr[1] - g1.tr[1] * g2.tr[0] < 0:
        g2 = Holonomy.from_matrix(np.linalg.inv(transitions[generators[1]]))
    return DevelopedCusp(state, positions, p, z, tree, cut, generators, g1, g2,
                         transitions, defects, loop)


def hyperbolic_distance(p1, z1, p2, z2):
    """Distance in the upper half-space between ``(p1, z1)`` and ``(p2, z2)``."""
    d2 = np.sum((np.asarray(p1) - np.asarray(p2)) ** 2, axis=-1)
    return np.arccosh(1 + (d2 + (z1 - z2) ** 2) / (2 * z1 * z2))


def flat_edge_coplanarity(dev):
    """Largest deviation from a common hemisphere across flat edges.

    For each flat edge the far corner of the neighbouring triangle, carried
    next to the first one, is tested against the hemisphere through the
    first triangle's corners; the value is ``(|p - q|^2 + z^2) / R^2 - 1``.
    """
    st = dev.state
    s = st.surface
    flat = np.flatnonzero(st.flat_edges())
    if len(flat) == 0:
        return 0.0
    zc = dev.corner_z
    q, R = hemisphere(dev.positions, zc)
    worst = 0.0
    for k in flat:
        h = s.edges[k, 0]
        t, t2 = s.tri_of[h], s.tri_of[s.opposite[h]]
        far = s.slot[s.prev[s.opposite[h]]]
        P2 = dev.positions[t2]
        if k in dev.transitions:
            P2 = _apply(dev.transitions[k], P2)
        x = P2[far]
        val = (np.sum((x - q[t]) ** 2) + zc[t2, far] ** 2) / R[t] ** 2 - 1.0
        worst = max(worst, abs(val))
    return worst


# model changes -----------------------------------------------------------

def halfspace_to_ball(P):
    """Upper half-space ``(x, y, z)`` to the Poincare ball; infinity goes to
    the north pole ``(0, 0, 1)``."""
    P = np.asarray(P, dtype=float)
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    den = x * x + y * y + (z + 1) ** 2
    sq = x * x + y * y + z * z
    return np.stack([2 * x, 2 * y, sq - 1], axis=-1) / den[..., None]


def ball_to_halfspace(B):
    B = np.asarray(B, dtype=float)
    x, y, z = B[..., 0], B[..., 1], B[..., 2]
    den = x * x + y * y + (1 - z) ** 2
    return np.stack([2 * x, 2 * y, 1 - x * x - y * y - z * z], axis=-1) / den[..., None]


def ball_to_klein(B):
    B = np.asarray(B, dtype=float)
    return 2 * B / (1 + np.sum(B * B, axis=-1))[..., None]


def klein_to_ball(K):
    K = np.asarray(K, dtype=float)
    return K / (1 + np.sqrt(1 - np.sum(K * K, axis=-1)))[..., None]


def halfspace_to_klein(P):
    return ball_to_klein(halfspace_to_ball(P))


def klein_to_halfspace(K):
    return ball_to_halfspace(klein_to_ball(K))


def klein_distance(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    num = 1 - np.sum(a * b, axis=-1)
    den = np.sqrt((1 - np.sum(a * a, axis=-1)) * (1 - np.sum(b * b, axis=-1)))
    return np.arccosh(np.maximum(num / den, 1.0))


KLEIN_CENTER = np.array([0.0, 0.0, 1.0])


@dataclass
class KleinModel:
    """Orbit of the fundamental vertices under ``g1^a g2^b``, ``|a|, |b| <= copies``.

    Vertex ``index(v, a, b)`` is the copy of vertex ``v``; faces are the
    triangles of the development whose corners all lie in the grid, listed
    with outward normals (pointing away from the apex).
    """

    vertices: np.ndarray
    halfspace: np.ndarray
    faces: np.ndarray
    copies: int
    n: int

    def index(self, v, a, b):
        c, w = self.copies, 2 * self.copies + 1
        return ((a + c) * w + (b + c)) * self.n + v


def _lattice_coords(dev):
    """Integer coordinates of every triangle corner relative to its vertex."""
    T = np.column_stack([dev.g1.tr, dev.g2.tr])
    v = dev.corner_vertex
    diff = dev.positions - dev.p[v]
    m = np.linalg.solve(T, diff.reshape(-1, 2).T).T
    r = np.rint(m)
    if np.abs(m - r).max() > 1e-6:
        raise RuntimeError("corner is not a lattice translate of its vertex")
    return r.astype(int).reshape(v.shape + (2,))


def to_klein(dev, copies=1, atol=1e-9):
    """Vertex cloud and faces of the convex polyhedron in the Klein model.

    Raises
    ------
    RequiresZeroCurvature
        If some particle has nonzero curvature (the holonomy is not a
        lattice of translations).
    """
    kappa = dev.state.kappa
    if np.max(np.abs(kappa)) > atol:
        raise RequiresZeroCurvature("orbit export needs all curvatures zero",
                                    max_abs_kappa=float(np.max(np.abs(kappa))))
    if copies < 0:
        raise ValueError("copies must be nonnegative")
    n = dev.state.n
    t1, t2 = dev.g1.tr, dev.g2.tr
    rng = np.arange(-copies, copies + 1)
    A, B = np.meshgrid(rng, rng, indexing="ij")
    shift = A.reshape(-1, 1) * t1 + B.reshape(-1, 1) * t2
    p = (shift[:, None, :] + dev.p[None]).reshape(-1, 2)
    z = np.tile(dev.z, len(shift))
    P = np.column_stack([p, z])
    model = KleinModel(halfspace_to_klein(P), P, np.zeros((0, 3), int), copies, n)
    lat = _lattice_coords(dev)
    cv = dev.corner_vertex
    faces = []
    for a in rng:
        for b in rng:
            for t in range(len(cv)):
                ab = lat[t] + (a, b)
                if np.all(np.abs(ab) <= copies):
                    # reversed: the development is counterclockwise seen from
                    # the apex, so this makes the normals point away from it
                    faces.append([model.index(cv[t, k], ab[k, 0], ab[k, 1])
                                  for k in (0, 2, 1)])
    model.faces = np.array(faces, dtype=int).reshape(-1, 3)
    return model


# export ------------------------------------------------------------------

def _fmt(x):
    return float(format(float(x), ".17g"))


def to_json_dict(dev):
    return {
        "vertices": [{"p": [_fmt(a), _fmt(b)], "z": _fmt(z)}
                     for (a, b), z in zip(dev.p, dev.z)],
        "holonomy": {
            name: {"rot": _fmt(g.rot), "tr": [_fmt(g.tr[0]), _fmt(g.tr[1])]}
            for name, g in (("g1", dev.g1), ("g2", dev.g2))
        },
        "defects": {str(v): _fmt(k) for v, k in enumerate(dev.defects)},
    }


def export_json(dev, path=None):
    text = json.dumps(to_json_dict(dev), indent=2) + "\n"
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text


def export_obj(model, path=None):
    lines = [f"# {len(model.vertices)} vertices, {len(model.faces)} faces"]
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in model.vertices]
    lines += ["f {} {} {}".format(*(f + 1)) for f in model.faces]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text
