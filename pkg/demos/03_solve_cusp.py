"""
Solving for the convex cusp
===========================

The cusp with a given boundary metric is the maximum of the total scalar
curvature ``S(h)`` over feasible particle lengths.  Its gradient is the
vector of particle curvatures, so at the maximum every curvature vanishes.
"""

# %%
import numpy as np

from polycusp.catalog import random_metric, square_torus
from polycusp.functional import hessian, total_scalar_curvature
from polycusp.solver import SolveOptions, random_feasible_heights, solve_cusp

s = random_metric(10, np.random.default_rng(3))
rep = solve_cusp(s)
for t in rep.trace:
    print("iter %d  residual %.3e  S %.12f" % (t["iter"], t["residual"], t["S"]))
print("heights", np.round(rep.heights, 6))
print("volume %.6f, flips %d" % (rep.volume, rep.flips))

# %%
# The answer does not depend on the starting point.
rng = np.random.default_rng(4)
for _ in range(3):
    start = random_feasible_heights(s, rng).heights
    other = solve_cusp(s, SolveOptions(start=start))
    print("max height difference %.1e" % np.abs(other.heights - rep.heights).max())

# %%
# S is strictly concave on the heights with zero sum.
H = hessian(rep.state).toarray()
print("rows sum to zero:", np.all(H.sum(axis=1) == 0))
print("largest eigenvalue off the constants:", np.sort(np.linalg.eigvalsh(H))[-2])
print("S at the maximum", total_scalar_curvature(rep.state))

# %%
# With one vertex the symmetric heights already solve the problem.  The
# square torus is the boundary of a single quadrangular pyramid, whose
# diagonal is a flat edge.
sq = solve_cusp(square_torus())
print("iterations", sq.iterations, "flat edges", sq.flat_edges)
