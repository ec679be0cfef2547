"""Newton ascent for the total scalar curvature.

The maximum of ``S`` over feasible heights is the convex polyhedral cusp
with the given boundary metric; the maximum of ``S - <kappa*, h>`` is the
cusp with particles whose curvatures are ``kappa*``.  Every trial point of
the line search is made convex by edge flips before it is evaluated.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .cusp import (CuspState, build_state, feasibility_margin, gauge,
                   make_feasible)
from .errors import (BoundaryStall, Infeasible, IterationLimit,
                     MaxIterExceeded, TargetSumNonzero)
from .functional import (hessian, nullspace_analysis, sum_zero_basis,
                         total_scalar_curvature)
from .surface import EPS_ANGLE, delaunay


@dataclass
class SolveOptions:
    """Solver settings.

    ``levenberg`` is relative to the largest Hessian entry.  ``start`` is an
    initial height vector, applied over the Delaunay triangulation (zero
    when ``None``).  ``residual_factor`` lets a step be accepted without
    Armijo ascent when it shrinks the curvature residual by this factor,
    which matters once ``S`` differences fall below rounding.
    """

    tol_kappa: float = 1e-10
    max_iter: int = 200
    armijo: float = 1e-4
    backtrack: float = 0.5
    levenberg: float = 1e-8
    max_halvings: int = 60
    residual_factor: float = 0.9
    start: object = None

    def __post_init__(self):
        if not (self.tol_kappa > 0 and self.max_iter >= 0 and self.armijo > 0
                and self.levenberg > 0 and self.max_halvings > 0):
            raise ValueError("solver options must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if not 0 < self.residual_factor < 1:
            raise ValueError("residual factor must lie in (0, 1)")


@dataclass
class SolveReport:
    """Result of a solve.

    ``trace`` has one entry per iterate with ``iter``, ``residual`` (max-abs
    curvature error) and ``S``; accepted steps add the step length, the
    flips made, the Levenberg shift used and ``rejected``, the number of
    infeasible trial points per failure reason.
    """

    state: CuspState
    kappa_target: np.ndarray
    iterations: int
    residual: float
    S: float
    volume: float
    flips: int
    converged: bool
    boundary_stall: bool = False
    trace: list = field(default_factory=list)

    @property
    def heights(self):
        return self.state.heights

    @property
    def kappa(self):
        return self.state.kappa

    @property
    def theta(self):
        return self.state.theta

    @property
    def flat_edges(self):
        return np.flatnonzero(self.state.flat_edges()).tolist()

    def certify(self, tol_kappa):
        """Independent check of the result: rebuild and test all conditions."""
        st = build_state(self.state.surface, self.state.heights)
        res = np.max(np.abs(st.kappa - self.kappa_target))
        return bool(res <= tol_kappa and np.all(st.theta <= np.pi + EPS_ANGLE))


def _objective(state, target):
    return total_scalar_curvature(state) - float(target @ state.heights)


def _newton_direction(state, residual, Q, eps):
    """Ascent direction and the regularization actually used."""
    H = hessian(state).toarray()
    A = -(Q.T @ H @ Q)
    g = Q.T @ residual
    scale = max(np.abs(H).max(), 1e-300)
    lam = np.linalg.eigvalsh(A)
    used = 0.0
    if lam[0] < 1e-10 * scale:
        used = eps * scale
        A = A + (used - min(lam[0], 0.0)) * np.eye(len(A))
    c = linalg.cho_factor(A)
    return Q @ linalg.cho_solve(c, g), used


def _run(surface, target, opts):
    n = surface.n_vertices
    base = delaunay(surface)
    h0 = np.zeros(n) if opts.start is None else np.asarray(opts.start, float)
    state = make_feasible(base, h0)
    Q = sum_zero_basis(n)
    eps = opts.levenberg
    flips = len(state.flips)
    trace = []
    F = _objective(state, target)
    it = 0
    while True:
        r = state.kappa - target
        res = float(np.max(np.abs(r)))
        S = total_scalar_curvature(state)
        trace.append({"iter": it, "residual": res, "S": S})
        if res <= opts.tol_kappa or n == 1:
            return SolveReport(state, target, it, res, S, state.volume, flips,
                               converged=True, trace=trace)
        if it >= opts.max_iter:
            rep = SolveReport(state, target, it, res, S, state.volume, flips,
                              converged=False, trace=trace)
            raise MaxIterExceeded("iteration limit reached", report=rep,
                                  residual=res)
        step, used = _newton_direction(state, r, Q, eps)
        slope = float(r @ step)
        t = 1.0
        rejected = {}
        for _ in range(opts.max_halvings):
            try:
                trial = make_feasible(state.surface, state.heights + t * step)
            except (Infeasible, IterationLimit) as exc:
                why = getattr(exc, "reason", "IterationLimit")
                rejected[why] = rejected.get(why, 0) + 1
                t *= opts.backtrack
                continue
            Ft = _objective(trial, target)
            rt = float(np.max(np.abs(trial.kappa - target)))
            if Ft >= F + opts.armijo * t * slope or rt <= opts.residual_factor * res:
                break
            t *= opts.backtrack
        else:
            rep = SolveReport(state, target, it, res, S, state.volume, flips,
                              converged=False, boundary_stall=True, trace=trace)
            raise BoundaryStall("no feasible ascent step", report=rep,
                                residual=res)
        if used:
            eps = eps / 10 if t == 1.0 else eps * 10
        trace[-1].update(step=t, flips=len(trial.flips), regularization=used,
                         rejected=rejected)
        flips += len(trial.flips)
        state = CuspState(trial.surface, trial.heights)
        F = Ft
        it += 1


def solve_cusp(surface, opts=None):
    """Convex polyhedral cusp with the given boundary metric.

    Raises
    ------
    MaxIterExceeded, BoundaryStall
        The exception's ``report`` holds the last state reached.
    """
    opts = opts or SolveOptions()
    return _run(surface, np.zeros(surface.n_vertices), opts)


def solve_particles(surface, kappa_target, opts=None, atol=1e-9):
    """Cusp with particles of prescribed curvatures.

    ``kappa_target`` must sum to zero (to ``atol``); it is then projected
    onto the sum-zero vectors.
    """
    opts = opts or SolveOptions()
    k = np.asarray(kappa_target, dtype=float)
    if k.shape != (surface.n_vertices,):
        raise ValueError("one target curvature per vertex required")
    if abs(k.sum()) > atol:
        raise TargetSumNonzero("target curvatures must sum to zero",
                               sum=float(k.sum()))
    return _run(surface, gauge(k), opts)


def random_feasible_heights(surface, rng, radius=0.5, min_margin=1e-6):
    """Random heights admitting a convex cusp with particles.

    A random sum-zero direction is scaled by ``radius``, halved until the
    flip algorithm succeeds from the Delaunay triangulation with a margin.

    Returns
    -------
    CuspState
    """
    n = surface.n_vertices
    base = delaunay(surface)
    xi = gauge(rng.normal(size=n))
    if n > 1:
        xi /= np.linalg.norm(xi)
    r = radius
    for _ in range(60):
        try:
            st = make_feasible(base, r * xi)
        except (Infeasible, IterationLimit):
            r /= 2
            continue
        if feasibility_margin(st) > min_margin or n == 1:
            return st
        r /= 2
    return make_feasible(base, np.zeros(n))


def rigidity_report(state):
    """Nullspace analysis of the Hessian plus a rigidity verdict."""
    out = nullspace_analysis(state)
    lam = np.abs(out["eigenvalues"])
    H = hessian(state)
    scale = np.abs(H.toarray()).max() if state.n > 1 else 0.0
    nonzero = lam[lam >= 1e-8 * scale] if scale > 0 else lam[:0]
    out["smallest_nonzero"] = float(nonzero.min()) if len(nonzero) else None
    out["rigid"] = out["deficiency"] == 0
    out["verdict"] = ("infinitesimally rigid" if out["rigid"]
                      else "not infinitesimally rigid")
    return out
