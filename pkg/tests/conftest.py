import numpy as np
import pytest

from collar.jet import BoundaryJet, conformal_torus, jet_from_analytic, sphere_circle_warped
from collar.tensors import BoundaryGrid, SymTensorField

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


class UnitWarp:
    """``alpha = 1 + s t^2`` with a deliberately adjustable slope sign.

    ``s = 0`` gives the trivial warp; ``flip`` reports ``-alpha'`` to the
    slice formula while the true ``alpha^2 - 1`` still reaches the oracle.
    """

    t_I = 0.0

    def __init__(self, s=0.0, flip=False):
        self.s = s
        self.flip = flip

    def alpha(self, t):
        t = np.asarray(t, dtype=float)
        a = 1 + self.s * t * t
        ad = 2 * self.s * t
        return a, -ad if self.flip else ad

    def alpha_sq_excess(self, t):
        u = self.s * np.asarray(t) ** 2
        return u * (2 + u)

    def arclength(self, t):
        return t + self.s * t**3 / 3


def diagonal_jet(grid, h0, h0p, h0pp=None):
    """Jet with node-independent diagonal entries."""
    d = grid.dim
    h0pp = np.zeros(d) if h0pp is None else h0pp
    fields = [SymTensorField.constant(grid, np.diag(np.asarray(v, dtype=float))) for v in (h0, h0p, h0pp)]
    return BoundaryJet(grid, *fields)


@pytest.fixture(scope="session")
def grid16():
    return BoundaryGrid.uniform(2, 16)


@pytest.fixture(scope="session")
def sphere_jet16(grid16):
    return jet_from_analytic(sphere_circle_warped(), grid16)


@pytest.fixture(scope="session")
def torus_jet16(grid16):
    return jet_from_analytic(conformal_torus(grid16), grid16)


@pytest.fixture(scope="session")
def flat_conformal_jet(grid16):
    """``h(t) = (1 + 2t) I`` along the convex path."""
    return diagonal_jet(grid16, [1, 1], [2, 2])


@pytest.fixture(scope="session")
def sphere_convex16(sphere_jet16):
    """Convex collar on the 16^2 sphere jet, built the way ``extend`` does."""
    from collar.constants import SampleSpec, delta0, find_delta1_t1
    from collar.pipeline import build_convex

    spec = SampleSpec(n_delta=8, n_t=16)
    bounds = find_delta1_t1(sphere_jet16, spec)
    delta = min(delta0(sphere_jet16), *bounds) / 4
    return build_convex(sphere_jet16, delta, bounds, spec)[2]
