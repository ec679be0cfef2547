"""
Horoprisms: the pieces of a cusp
================================

Over every triangle of the boundary sits a semi-ideal pyramid with its
apex at the cusp.  In the upper half-space with the apex at infinity the
vertex of particle length ``h`` sits at height ``z = exp(-h)``.
"""

# %%
from polycusp.prism import build_prism, prism_slope, prism_volume

p = build_prism([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
print("isosceles prism, angles at the particles:", p.omega)

# %%
# Raising one vertex changes the shape of the Euclidean base triangle.
# The angles at the particles are always the angles of that base triangle.
q = build_prism([1.0, 1.2, 0.9], [0.1, -0.2, 0.15])
print("omega", q.omega, "sum", q.omega.sum())
print("base side lengths", q.E)
print("dihedral angles along the base edges", q.alpha_out)

# %%
# Volume above the hemisphere through the three vertices, and the slope.
for h in ([0, 0, 0], [0.3, 0, 0], [0.6, 0, 0]):
    r = build_prism([1.0, 1.0, 1.0], h)
    print(h, "volume %.6f" % prism_volume(r), "slope %.6f" % prism_slope(r))

# %%
# A height gap larger than an edge length has no prism at all.
try:
    build_prism([1.0, 1.0, 1.0], [1.2, 0.0, 0.0])
except Exception as exc:
    print(type(exc).__name__, exc)
