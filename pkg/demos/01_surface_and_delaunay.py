"""
Cone metrics on the torus and intrinsic Delaunay flips
======================================================

A boundary metric is a triangulated torus with a length on every edge.
Each triangle is hyperbolic, so the angles around a vertex add up to less
than ``2*pi`` and every vertex is a cone point of positive curvature.
"""

# %%
# The simplest metric: two equilateral triangles glued into a torus.
# All six corners meet at a single vertex.
import numpy as np

from polycusp.catalog import equilateral_torus, random_metric
from polycusp.surface import delaunay_with_flips, develop_quad, flip, is_delaunay

s = equilateral_torus()
print("vertices", s.n_vertices, "edges", s.n_edges, "triangles", s.n_triangles)
print("cone angle", s.cone_angle, "curvature", s.curvature)

# %%
# Gauss-Bonnet: the total curvature equals the hyperbolic area.
m = random_metric(6, np.random.default_rng(0))
print("sum of curvatures", m.curvature.sum(), "area", m.area)

# %%
# Flipping an edge replaces it by the other diagonal of its quadrilateral.
# Random flips usually leave the Delaunay triangulation; the flip algorithm
# brings it back, and the metric itself never changes.
rng = np.random.default_rng(1)
t = m
for _ in range(30):
    e = int(rng.integers(t.n_edges))
    if develop_quad(t, e)[1]:
        t = flip(t, e)
print("after random flips, Delaunay:", is_delaunay(t))
d, flips = delaunay_with_flips(t)
print("restored with", len(flips), "flips, Delaunay:", is_delaunay(d))
print("area unchanged:", np.isclose(d.area, m.area))
