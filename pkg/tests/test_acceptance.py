"""Acceptance criteria, one test per criterion.

Each test records a single ``criterion N: PASS|FAIL`` line; the lines are
printed at the end of the pytest run (see ``conftest.py``) and when this
file is run as a script.
"""

import math
import time

import numpy as np
import pytest
from scipy import optimize
from scipy.spatial import ConvexHull

from conftest import interior_state
from oracles import halfspace_distance
from polycusp.catalog import (equilateral_torus, parallelogram_torus,
                              punctured_square, random_metric, square_torus)
from polycusp.cusp import CuspState, gauge, make_feasible, pd_values
from polycusp.develop import develop, to_klein
from polycusp.errors import Infeasible
from polycusp.functional import (edge_coefficients, gauge_eigenvalues, hessian,
                                 nullspace_analysis, total_scalar_curvature)
from polycusp.solver import (SolveOptions, random_feasible_heights, solve_cusp,
                             solve_particles)
from polycusp.surface import SurfacePoints, delaunay, replay_flips

SIZES = (1, 2, 3, 5, 10, 25, 50)
PER_SIZE = 8
DELTA = 1e-5

RESULTS = {}


def record(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    """Valid metrics with every size in SIZES, half of them with long edges."""
    rng = np.random.default_rng(2024)
    out = []
    for n in SIZES:
        for k in range(PER_SIZE):
            mean = rng.uniform(0.3, 2.5) if k % 2 else None
            out.append(random_metric(n, rng, mean_length=mean))
    return out


@pytest.fixture(scope="module")
def solved(corpus):
    """``(report, seconds)`` per corpus metric."""
    out = []
    for s in corpus:
        t = time.perf_counter()
        rep = solve_cusp(s)
        out.append((rep, time.perf_counter() - t))
    return out


def _states(seed, sizes, per_metric):
    rng = np.random.default_rng(seed)
    out = []
    for n in sizes:
        s = random_metric(n, rng)
        out += [interior_state(s, rng) for _ in range(per_metric)]
    return out


def test_criterion_01_gradient():
    worst, count = 0.0, 0
    for st in _states(101, (2, 3, 5, 8, 12), 4):
        s, h = st.surface, st.heights
        fd = np.zeros(st.n)
        for j in range(st.n):
            e = np.zeros(st.n)
            e[j] = DELTA
            fd[j] = (total_scalar_curvature(CuspState(s, h + e))
                     - total_scalar_curvature(CuspState(s, h - e))) / (2 * DELTA)
        worst = max(worst, np.abs(fd - st.kappa).max() / np.abs(st.kappa).max())
        count += 1
    record(1, count >= 20 and worst <= 1e-5,
           f"{count} states, max relative error {worst:.2e} (bound 1e-5)")


def test_criterion_02_hessian():
    fd_err = sym = 0.0
    rows_ok = off_ok = True
    count = 0
    for st in _states(102, (2, 3, 5, 8, 12), 4):
        H = hessian(st).toarray()
        J = np.zeros_like(H)
        for j in range(st.n):
            e = np.zeros(st.n)
            e[j] = DELTA
            J[:, j] = (CuspState(st.surface, st.heights + e).kappa
                       - CuspState(st.surface, st.heights - e).kappa) / (2 * DELTA)
        scale = np.abs(H).max()
        fd_err = max(fd_err, np.abs(J - H).max() / scale)
        sym = max(sym, np.abs(H - H.T).max() / scale)
        rows_ok &= bool(np.all(H.sum(axis=1) == 0.0))
        off_ok &= bool(np.all(H - np.diag(np.diag(H)) >= 0))
        count += 1
    # flat edges: the punctured square and the diagonal of the square torus
    flat_zero = True
    s, h = punctured_square()
    for st in (CuspState(s, h), solve_cusp(square_torus()).state):
        _, _, coef = edge_coefficients(st)
        a = st.alpha + st.alpha[st.surface.opposite]
        flat = np.abs(a - np.pi) <= 1e-10
        flat_zero &= bool(flat.any() and np.all(coef[flat] == 0.0))
    ok = fd_err <= 1e-5 and sym <= 1e-9 and rows_ok and off_ok and flat_zero
    record(2, ok, f"{count} states, FD {fd_err:.1e}, symmetry {sym:.1e}, "
                  f"rows exact {rows_ok}, off-diagonal >= 0 {off_ok}, "
                  f"flat edges zero {flat_zero}")


def test_criterion_03_concavity():
    rng = np.random.default_rng(103)
    segments, worst_gap, worst_eig = 0, math.inf, -math.inf
    for n in (2, 3, 4, 6, 9):
        s = random_metric(n, rng)
        # flips start from the Delaunay triangulation, as in the solver
        d = delaunay(s)
        done = 0
        while done < 21:
            a = random_feasible_heights(s, rng, radius=rng.uniform(0.05, 0.6))
            b = random_feasible_heights(s, rng, radius=rng.uniform(0.05, 0.6))
            if np.abs(a.heights - b.heights).max() < 1e-3:
                continue  # not a segment
            done += 1
            m = make_feasible(d, (a.heights + b.heights) / 2)
            fa, fb = total_scalar_curvature(a), total_scalar_curvature(b)
            worst_gap = min(worst_gap, total_scalar_curvature(m) - (fa + fb) / 2)
            H = hessian(m)
            lam = gauge_eigenvalues(H).max()
            worst_eig = max(worst_eig, lam / np.abs(H.toarray()).max())
            segments += 1
    record(3, segments >= 100 and worst_gap > 0 and worst_eig <= 1e-9,
           f"{segments} segments, min midpoint excess {worst_gap:.2e}, "
           f"max gauge eigenvalue / |H| {worst_eig:.2e}")


def test_criterion_04_schlafli():
    rng = np.random.default_rng(104)
    worst, count = 0.0, 0
    for st in _states(104, (2, 3, 5, 8, 12), 4):
        xi = gauge(rng.normal(size=st.n))
        # fourth-order central differences in the direction xi
        at = [CuspState(st.surface, st.heights + k * DELTA * xi)
              for k in (-2, -1, 1, 2)]
        w = np.array([1, -8, 8, -1]) / (12 * DELTA)
        dvol = sum(c * x.volume for c, x in zip(w, at))
        dk = sum(c * x.kappa for c, x in zip(w, at))
        dth = sum(c * x.theta for c, x in zip(w, at))
        want = 0.5 * st.heights @ dk - 0.5 * st.surface.edge_lengths() @ dth
        worst = max(worst, abs(dvol - want) / abs(want))
        count += 1
    record(4, count >= 20 and worst <= 1e-5,
           f"{count} states, max relative error {worst:.2e}")


def test_criterion_05_existence(solved):
    sizes = sorted({rep.state.n for rep, _ in solved})
    kappa = max(np.abs(rep.kappa).max() for rep, _ in solved)
    theta = max((rep.theta - np.pi).max() for rep, _ in solved)
    slowest = max(dt for _, dt in solved)
    ok = (len(solved) >= 50 and sizes == list(SIZES) and kappa <= 1e-10
          and theta <= 1e-10 and slowest <= 5.0
          and all(rep.converged for rep, _ in solved))
    record(5, ok, f"{len(solved)} metrics, n in {sizes}, max |kappa| {kappa:.1e}, "
                  f"max theta - pi {theta:.1e}, slowest {slowest:.2f} s")


def test_criterion_06_uniqueness(corpus, solved):
    rng = np.random.default_rng(106)
    worst = 0.0
    for s, (rep, _) in zip(corpus, solved):
        for _ in range(3):
            start = random_feasible_heights(s, rng).heights
            other = solve_cusp(s, SolveOptions(start=start))
            worst = max(worst, np.abs(gauge(other.heights) - rep.heights).max())
    record(6, worst <= 1e-7,
           f"{len(corpus)} metrics x 3 random starts, max |dh| {worst:.1e}")


def test_criterion_07_particles():
    worst, count = 0.0, 0
    for st in _states(107, (2, 3, 5, 8, 12), 4):
        rep = solve_particles(st.surface, st.kappa)
        worst = max(worst, np.abs(rep.heights - gauge(st.heights)).max())
        count += 1
    record(7, count >= 20 and worst <= 1e-7,
           f"{count} states, max |h - h*| {worst:.1e}")


def test_criterion_08_flip_order():
    rng = np.random.default_rng(108)
    worst, count, with_flips = 0.0, 0, 0
    for n in (3, 4, 5, 6, 8, 10, 12):
        s = random_metric(n, rng)
        for _ in range(3):
            base = interior_state(s, rng)
            xi = gauge(rng.normal(size=n))
            xi /= np.abs(xi).max()
            scale = 0.5
            # the feasible set can be thin: shrink until the heights are feasible
            while True:
                h = base.heights + scale * xi
                try:
                    make_feasible(base.surface, h)
                    break
                except Infeasible:
                    scale /= 2
            a = make_feasible(base.surface, h, rng=np.random.default_rng(count))
            b = make_feasible(base.surface, h, rng=np.random.default_rng(count + 99))
            pts = SurfacePoints.random(base.surface, 100, rng)
            _, pa = replay_flips(base.surface, pts, a.flips)
            _, pb = replay_flips(base.surface, pts, b.flips)
            worst = max(worst, np.abs(pd_values(a, pa) - pd_values(b, pb)).max())
            with_flips += bool(a.flips or b.flips)
            count += 1
    record(8, count >= 20 and worst <= 1e-9,
           f"{count} perturbed states ({with_flips} needing flips), "
           f"max PD difference {worst:.1e} at 100 points each")


def test_criterion_09_rigidity(solved):
    bad = []
    for rep, _ in solved:
        info = nullspace_analysis(rep.state)
        H = hessian(rep.state)
        rank = int(np.sum(np.abs(gauge_eigenvalues(H))
                          > 1e-8 * max(np.abs(H.toarray()).max(), 1e-300)))
        if len(info["components"]) != 1 or rank != rep.state.n - 1:
            bad.append(rep.state.n)
    s, h = punctured_square()
    deficiency = nullspace_analysis(CuspState(s, h))["deficiency"]
    record(9, not bad and deficiency == 1,
           f"{len(solved)} solved cusps connected with rank n-1 "
           f"({len(bad)} failures); punctured square deficiency {deficiency}")


def _convex_position(points):
    """All points extreme: qhull first, linear programs for any it drops."""
    hull = set(ConvexHull(points).vertices.tolist())
    for i in set(range(len(points))) - hull:
        others = np.delete(points, i, axis=0)
        A = np.vstack([others.T, np.ones(len(others))])
        res = optimize.linprog(np.zeros(len(others)), A_eq=A,
                               b_eq=np.append(points[i], 1.0),
                               bounds=(0, None), method="highs")
        if res.status == 0:
            return False
    return True


def test_criterion_10_development(solved):
    rot = comm = edge = 0.0
    convex = 0
    for rep, _ in solved:
        dev = develop(rep.state)
        rot = max(rot, abs(dev.g1.rot), abs(dev.g2.rot))
        d, r = dev.commutator()
        comm = max(comm, d, abs(r))
        s = rep.state.surface
        for t in range(s.n_triangles):
            for k in range(3):
                a, b = k, (k + 1) % 3
                got = halfspace_distance(dev.positions[t, a], dev.corner_z[t, a],
                                         dev.positions[t, b], dev.corner_z[t, b])
                edge = max(edge, abs(got - s.length[s.triangles[t, k]]))
        convex += _convex_position(to_klein(dev, copies=2).vertices)
    ok = rot < 1e-9 and comm < 1e-9 and edge <= 1e-9 and convex == len(solved)
    record(10, ok, f"{len(solved)} cusps, rotation {rot:.1e}, commutator "
                   f"{comm:.1e}, edge error {edge:.1e}, convex orbits "
                   f"{convex}/{len(solved)}")


def test_criterion_11_one_vertex():
    rng = np.random.default_rng(111)
    metrics = [equilateral_torus(), square_torus(), square_torus(0.4, 1.7),
               parallelogram_torus(0.7, 1.3, 1.1)]
    metrics += [random_metric(1, rng, mean_length=m) for m in (None, 0.5, 2.0)]
    ok = True
    for s in metrics:
        rep = solve_cusp(s)
        ok &= (rep.iterations == 0 and rep.heights.tolist() == [0.0]
               and abs(rep.kappa[0]) <= 1e-10)
    record(11, ok, f"{len(metrics)} one-vertex metrics: 0 iterations, h = [0], "
                   f"kappa = [0] (to 1e-10)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
