import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polycusp.catalog import random_metric  # noqa: E402
from polycusp.errors import Infeasible, IterationLimit  # noqa: E402
from polycusp.cusp import make_feasible, feasibility_margin, gauge  # noqa: E402
from polycusp.surface import delaunay  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def metric_corpus(seed, sizes, long_edges=False):
    rng = np.random.default_rng(seed)
    out = []
    for n in sizes:
        mean = rng.uniform(0.3, 2.5) if long_edges else None
        out.append(random_metric(n, rng, mean_length=mean))
    return out


def interior_state(surface, rng, radius=0.3, min_margin=1e-3):
    """Random feasible state with a margin, away from chamber walls."""
    base = delaunay(surface)
    n = surface.n_vertices
    for _ in range(60):
        xi = gauge(rng.normal(size=n))
        if n > 1:
            xi /= np.linalg.norm(xi)
        try:
            st = make_feasible(base, radius * xi)
        except (Infeasible, IterationLimit):
            radius /= 2
            continue
        flat = np.min(np.abs(st.theta - np.pi))
        if feasibility_margin(st) > min_margin and flat > min_margin:
            return st
        radius /= 2
    return make_feasible(base, np.zeros(n))


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[k])
