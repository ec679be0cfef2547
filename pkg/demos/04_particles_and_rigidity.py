"""
Prescribed curvatures and rigidity
==================================

Maximizing ``S(h) - <kappa, h>`` gives a cusp with particles whose
curvatures are ``kappa``.  The Hessian is a weighted graph Laplacian on
the true edges, so its kernel counts the components of that graph.
"""

# %%
import numpy as np

from polycusp.catalog import punctured_square, random_metric
from polycusp.cusp import CuspState
from polycusp.solver import random_feasible_heights, rigidity_report, solve_particles

s = random_metric(5, np.random.default_rng(6))
target = random_feasible_heights(s, np.random.default_rng(7), radius=0.4)
print("target curvatures", np.round(target.kappa, 6))
rep = solve_particles(s, target.kappa)
print("recovered heights agree to %.1e"
      % np.abs(rep.heights - target.heights).max())
print(rigidity_report(rep.state)["verdict"])

# %%
# Curvatures must add up to zero.
try:
    solve_particles(s, np.full(5, 0.1))
except Exception as exc:
    print(type(exc).__name__, exc.details)

# %%
# The punctured square: four triangles around a vertex ``a`` whose legs
# are flat, and a square face whose sides are loops.  No true edge joins
# the two particles, so the cusp is not infinitesimally rigid.
sq, h = punctured_square()
st = CuspState(sq, h)
info = rigidity_report(st)
print("curvatures", st.kappa)
print("components", info["components"], "deficiency", info["deficiency"])
print(info["verdict"])
