"""
Developing the cusp and exporting it
====================================

Laying the Euclidean base triangles out in the plane gives a fundamental
domain of the cusp in the upper half-space.  When every curvature is zero
the two gluing motions are translations; the orbit of the vertices under
them is a convex polyhedral surface, written here in the Klein model.
"""

# %%
import os
import tempfile

import numpy as np

from polycusp.catalog import random_metric
from polycusp.develop import develop, export_json, export_obj, to_klein
from polycusp.solver import solve_cusp

rep = solve_cusp(random_metric(4, np.random.default_rng(8)))
dev = develop(rep.state)
print("g1 translation", dev.g1.tr, "rotation %.1e" % dev.g1.rot)
print("g2 translation", dev.g2.tr, "rotation %.1e" % dev.g2.rot)
print("commutator (displacement, angle)", dev.commutator())

# %%
# Two copies in each direction: 25 translates of the fundamental vertices.
model = to_klein(dev, copies=2)
print(len(model.vertices), "vertices,", len(model.faces), "faces")
print("all inside the unit ball:", np.all(np.linalg.norm(model.vertices, axis=1) < 1))

# %%
# Export for a mesh viewer, plus the JSON description of the development.
out = tempfile.mkdtemp()
export_obj(model, os.path.join(out, "cusp.obj"))
export_json(dev, os.path.join(out, "cusp.json"))
print("written to", out)
print(open(os.path.join(out, "cusp.obj")).readline().strip())
