import math

import numpy as np
import pytest
from scipy import sparse

from conftest import interior_state, metric_corpus
from polycusp.catalog import equilateral_torus, punctured_square, random_metric
from polycusp.cusp import CuspState, gauge, make_feasible
from polycusp.functional import (edge_coefficients, gauge_eigenvalues, hessian,
                                 hessian_coo_text, nullspace_analysis,
                                 sum_zero_basis, total_scalar_curvature)
from polycusp.solver import solve_cusp

DELTA = 1e-5


def _S(surface, h):
    return total_scalar_curvature(CuspState(surface, h))


def _fd_gradient(state):
    s, h = state.surface, state.heights
    g = np.zeros(state.n)
    for j in range(state.n):
        e = np.zeros(state.n)
        e[j] = DELTA
        g[j] = (_S(s, h + e) - _S(s, h - e)) / (2 * DELTA)
    return g


def _fd_hessian(state):
    s, h = state.surface, state.heights
    J = np.zeros((state.n, state.n))
    for j in range(state.n):
        e = np.zeros(state.n)
        e[j] = DELTA
        J[:, j] = (CuspState(s, h + e).kappa - CuspState(s, h - e).kappa) / (2 * DELTA)
    return J


def test_gradient_is_curvature(rng):
    for s in metric_corpus(21, [2, 3, 5, 8]):
        st = interior_state(s, rng)
        g = _fd_gradient(st)
        assert np.abs(g - st.kappa).max() <= 1e-5 * max(np.abs(st.kappa).max(), 1e-3)


def test_hessian_matches_finite_differences(rng):
    for s in metric_corpus(22, [2, 4, 7]):
        st = interior_state(s, rng)
        H = hessian(st).toarray()
        J = _fd_hessian(st)
        assert np.abs(J - H).max() <= 1e-5 * np.abs(H).max()


def test_hessian_structure(rng):
    for s in metric_corpus(23, [3, 6, 12]):
        st = interior_state(s, rng)
        H = hessian(st).toarray()
        assert np.abs(H - H.T).max() <= 1e-9 * np.abs(H).max()
        assert np.all(H.sum(axis=1) == 0.0)
        assert np.all(H @ np.ones(st.n) == 0.0)
        off = H - np.diag(np.diag(H))
        assert np.all(off >= 0)


def test_row_sums_exact(rng):
    st = interior_state(random_metric(9, rng), rng)
    H = hessian(st).toarray()
    for row in H:
        assert math.fsum(row) == 0.0


def test_flat_edges_contribute_nothing():
    s, h = punctured_square()
    st = CuspState(s, h)
    src, dst, coef = edge_coefficients(st)
    flat = np.abs(st.alpha + st.alpha[s.opposite] - np.pi) < 1e-10
    assert flat.sum() == 8
    assert np.all(coef[flat] == 0.0)
    H = hessian(st).toarray()
    assert np.all(H == 0.0)


def test_quadratic_form_is_edge_sum(rng):
    # x^T H x = -sum over half-edges of coef * (x_i - x_j)^2 / 2
    st = interior_state(random_metric(6, rng), rng)
    src, dst, coef = edge_coefficients(st)
    H = hessian(st)
    x = rng.normal(size=st.n)
    want = -0.5 * np.sum(coef * (x[src] - x[dst]) ** 2)
    assert x @ (H @ x) == pytest.approx(want, rel=1e-12)


def test_schlafli(rng):
    for s in metric_corpus(24, [2, 4, 6, 10]):
        st = interior_state(s, rng)
        xi = gauge(rng.normal(size=st.n))
        a = CuspState(st.surface, st.heights + DELTA * xi)
        b = CuspState(st.surface, st.heights - DELTA * xi)
        dvol = (a.volume - b.volume) / (2 * DELTA)
        dk = (a.kappa - b.kappa) / (2 * DELTA)
        dth = (a.theta - b.theta) / (2 * DELTA)
        want = 0.5 * st.heights @ dk - 0.5 * st.surface.edge_lengths() @ dth
        assert dvol == pytest.approx(want, rel=1e-5, abs=1e-9)


def test_concavity_along_segments(rng):
    checked = 0
    for s in metric_corpus(25, [2, 3, 5]):
        for _ in range(4):
            a = interior_state(s, rng)
            b = interior_state(s, rng)
            if np.abs(a.heights - b.heights).max() < 1e-6:
                continue
            fa = total_scalar_curvature(a)
            fb = total_scalar_curvature(b)
            m = make_feasible(s, (a.heights + b.heights) / 2)
            assert total_scalar_curvature(m) >= (fa + fb) / 2 - 1e-12
            checked += 1
    assert checked > 5


def test_gauge_hessian_negative_definite(rng):
    for s in metric_corpus(26, [2, 5, 9]):
        st = interior_state(s, rng)
        H = hessian(st)
        lam = gauge_eigenvalues(H)
        assert lam.max() <= 1e-9 * np.abs(H.toarray()).max()
        assert lam.max() < 0


def test_S_gauge_invariant(rng):
    st = interior_state(random_metric(5, rng), rng)
    shifted = CuspState(st.surface, st.heights + 0.8)
    assert total_scalar_curvature(shifted) == pytest.approx(
        total_scalar_curvature(st), abs=1e-12)


def test_sum_zero_basis():
    Q = sum_zero_basis(5)
    assert Q.T @ Q == pytest.approx(np.eye(4), abs=1e-14)
    assert Q.sum(axis=0) == pytest.approx(np.zeros(4), abs=1e-14)
    assert sum_zero_basis(1).shape == (1, 0)


def test_nullspace_solved_cusp_rigid():
    s = random_metric(6, np.random.default_rng(3))
    rep = solve_cusp(s)
    info = nullspace_analysis(rep.state)
    assert info["deficiency"] == 0
    assert info["numerical_deficiency"] == 0
    assert len(info["components"]) == 1


def test_nullspace_punctured_square():
    s, h = punctured_square()
    info = nullspace_analysis(CuspState(s, h))
    assert info["deficiency"] == 1
    assert info["numerical_deficiency"] == 1
    assert sorted(map(len, info["components"])) == [1, 1]


def test_one_vertex_hessian():
    st = CuspState(equilateral_torus(), [0.0])
    H = hessian(st)
    assert H.shape == (1, 1)
    assert H.toarray()[0, 0] == 0.0
    assert nullspace_analysis(st)["deficiency"] == 0


def test_coo_text_round_trip(rng):
    st = interior_state(random_metric(4, rng), rng)
    H = hessian(st)
    text = hessian_coo_text(H)
    lines = text.splitlines()
    n, m, nnz = map(int, lines[0].lstrip("% ").split())
    assert (n, m) == H.shape and nnz == len(lines) - 1
    rows = [l.split() for l in lines[1:]]
    back = sparse.coo_array(([float(r[2]) for r in rows],
                             ([int(r[0]) for r in rows], [int(r[1]) for r in rows])),
                            shape=(n, m)).toarray()
    assert np.array_equal(back, H.toarray())
