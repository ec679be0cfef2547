"""Total scalar curvature of a cusp with particles and its derivatives.

``S = -2 Vol + sum_i h_i kappa_i + sum_e l_e (pi - theta_e)``.  Its gradient
with respect to the heights is the curvature vector and its Hessian is a
weighted graph Laplacian (with a minus sign) on the graph of true edges.
"""

import math

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .surface import EPS_ANGLE


def curvature_vector(state):
    """Curvatures ``2*pi - omega_v`` of the particles; the gradient of S."""
    return state.kappa.copy()


def volume(state):
    """Hyperbolic volume of the truncated cusp (sum of prism volumes)."""
    return state.volume


def total_scalar_curvature(state):
    s = state.surface
    vol = math.fsum(state.prism_volumes)
    edge_term = math.fsum(s.edge_lengths() * (np.pi - state.theta))
    return -2.0 * vol + math.fsum(state.heights * state.kappa) + edge_term


def edge_coefficients(state, eps=EPS_ANGLE):
    """Per-half-edge Hessian coefficients.

    Entry ``h`` (from ``i`` to ``j``) is ``d kappa_i / d h_j`` contributed by
    the edge of ``h``, computed from the quantities seen at ``i``.  Loops and
    flat edges give zero.

    Returns
    -------
    src, dst, coef : ndarray
    """
    s = state.surface
    hs = np.arange(s.n_half_edges)
    src = s.vertex_of[hs]
    dst = s.head(hs)
    opp = s.opposite
    a1, a2 = state.alpha, state.alpha[opp]
    cot_sum = np.sin(a1 + a2) / (np.sin(a1) * np.sin(a2))
    ell = s.length
    h = state.heights
    coef = (np.exp(h[dst] - h[src]) * cot_sum
            / (np.sinh(ell) * np.sin(state.rho) ** 2))
    flat = np.abs(a1 + a2 - np.pi) <= eps
    coef[flat | (src == dst)] = 0.0
    return src, dst, coef


def hessian(state, eps=EPS_ANGLE):
    """Sparse Hessian of S with respect to the heights.

    Off-diagonal ``(i, j)`` sums the coefficients over all edges between
    ``i`` and ``j``, each taken from the ``i`` end; the diagonal is minus the
    off-diagonal row sum.  Off-diagonal entries are snapped to a dyadic grid
    on which every partial row sum is representable, so rows sum to zero
    exactly in any summation order (relative change about ``n * 2**-52``).

    Returns
    -------
    scipy.sparse.csr_array, shape (n, n)
    """
    n = state.n
    src, dst, coef = edge_coefficients(state, eps)
    keep = src != dst
    # accumulate in half-edge order for reproducible sums
    off = np.zeros((n, n))
    np.add.at(off, (src[keep], dst[keep]), coef[keep])
    big = np.abs(off).max() if n > 1 else 0.0
    if big > 0:
        q = 2.0 ** (math.ceil(math.log2(big * n)) - 52)
        off = np.round(off / q) * q
    diag = -np.array([math.fsum(row) for row in off])
    dense = off + np.diag(diag)
    return sparse.csr_array(dense)


def hessian_coo_text(H):
    """Coordinate-list text of a sparse matrix: ``i j value`` per line."""
    coo = sparse.coo_array(H)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"% {coo.shape[0]} {coo.shape[1]} {len(order)}"]
    lines += [f"{coo.row[k]} {coo.col[k]} {coo.data[k]:.17g}" for k in order]
    return "\n".join(lines) + "\n"


def sum_zero_basis(n):
    """Orthonormal basis (n, n-1) of the vectors with zero sum."""
    if n == 1:
        return np.zeros((1, 0))
    # e_k - 1/n for k < n-1 span the subspace
    q, _ = np.linalg.qr(np.eye(n, n - 1) - 1.0 / n)
    return q


def gauge_eigenvalues(H):
    """Eigenvalues of the Hessian restricted to the sum-zero subspace."""
    Hd = H.toarray() if sparse.issparse(H) else np.asarray(H)
    Q = sum_zero_basis(Hd.shape[0])
    return np.linalg.eigvalsh(Q.T @ Hd @ Q)


def true_edge_graph(state, eps=EPS_ANGLE):
    """Adjacency of the graph of non-flat, non-loop edges on the particles."""
    s = state.surface
    e = s.edges[:, 0]
    u, v = s.vertex_of[e], s.head(e)
    keep = (state.theta < np.pi - eps) & (u != v)
    data = np.ones(int(keep.sum()))
    return sparse.coo_array((data, (u[keep], v[keep])), shape=(state.n, state.n))


def nullspace_analysis(state, eps=EPS_ANGLE):
    """Kernel of the Hessian on the sum-zero subspace.

    Returns
    -------
    dict
        ``components`` (list of vertex lists of the true-edge graph),
        ``deficiency`` (number of components minus one),
        ``numerical_deficiency`` (eigenvalues below ``1e-8 * ||H||`` in
        magnitude) and the sorted gauge ``eigenvalues``.
    """
    ncomp, labels = connected_components(true_edge_graph(state, eps),
                                         directed=False)
    components = [np.flatnonzero(labels == c).tolist() for c in range(ncomp)]
    components.sort(key=lambda c: c[0])
    H = hessian(state, eps)
    lam = gauge_eigenvalues(H)
    scale = np.abs(H.toarray()).max() if state.n > 1 else 0.0
    small = int(np.sum(np.abs(lam) < 1e-8 * scale)) if scale > 0 else len(lam)
    return {
        "components": components,
        "deficiency": ncomp - 1,
        "numerical_deficiency": small,
        "eigenvalues": lam,
    }
