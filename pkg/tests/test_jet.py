import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collar.errors import ArgumentError, MeanConvexityViolation
from collar.jet import (
    BoundaryJet,
    NegativeInitialCurvature,
    custom_diagonal,
    flat_product,
    initial_scalar_curvature,
    jet_from_analytic,
    mean_curvature_floor,
    sphere_circle_warped,
)
from collar.pipeline import sphere_circle_scalar
from collar.tensors import BoundaryGrid, SymTensorField

from .conftest import diagonal_jet


def test_sphere_jet_closed_form(sphere_jet16):
    eps, r0 = 0.01, np.pi / 6
    f = 1 + eps * np.cos(4 * r0)
    h0 = sphere_jet16.h0.comp[0, 0]
    h0p = sphere_jet16.h0p.comp[0, 0]
    np.testing.assert_allclose(np.diag(h0), [np.sin(r0) ** 2, f**2], rtol=1e-15)
    np.testing.assert_allclose(np.diag(h0p), [np.sin(2 * r0), 2 * f * (-4 * eps * np.sin(4 * r0))], rtol=1e-15)
    # mean convex although h0' is indefinite
    assert h0p[1, 1] < 0 < h0p[0, 0]
    assert mean_curvature_floor(sphere_jet16) > 0


def test_fd_jet_matches_closed_form(grid16):
    spec = sphere_circle_warped()
    closed = jet_from_analytic(spec, grid16, method="closed")
    fd = jet_from_analytic(spec, grid16, method="fd")
    for a, b in zip((closed.h0, closed.h0p, closed.h0pp), (fd.h0, fd.h0p, fd.h0pp)):
        np.testing.assert_allclose(a.comp, b.comp, atol=1e-7)


@pytest.mark.parametrize(
    "spec",
    [flat_product(), sphere_circle_warped(eps=0.0, r0=np.pi / 2)],
    ids=["flat_product", "equator"],
)
def test_non_mean_convex_rejected(spec, grid16):
    with pytest.raises(MeanConvexityViolation) as info:
        jet_from_analytic(spec, grid16)
    assert info.value.value <= 1e-12


def test_zero_trace_at_one_node_reports_it(grid16):
    h0 = np.ones((2,) + grid16.shape)
    h0p = np.ones_like(h0)
    h0p[:, 3, 5] = [1.0, -1.0]
    with pytest.raises(MeanConvexityViolation) as info:
        jet_from_analytic(custom_diagonal(h0, h0p, np.zeros_like(h0)), grid16)
    assert tuple(info.value.node) == (3, 5)


def test_mean_curvature_floor_example(flat_conformal_jet):
    assert mean_curvature_floor(flat_conformal_jet) == 2.0


def test_initial_curvature_examples(grid16, flat_conformal_jet):
    flat = BoundaryJet(grid16, *(SymTensorField.constant(grid16, m) for m in (np.eye(2), 0 * np.eye(2), 0 * np.eye(2))), check=False)
    assert np.all(initial_scalar_curvature(flat) == 0)
    np.testing.assert_allclose(initial_scalar_curvature(flat_conformal_jet), 2.0, rtol=1e-15)


@settings(max_examples=10, deadline=None)
@given(r0=st.floats(0.3, 2.8))
def test_initial_curvature_matches_ambient(r0):
    grid = BoundaryGrid.uniform(2, 8)
    jet = BoundaryJet(grid, *(SymTensorField(grid, c) for c in sphere_circle_warped(0.01, r0).jet(grid.coords())), check=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NegativeInitialCurvature)
        R0 = initial_scalar_curvature(jet)
    np.testing.assert_allclose(R0, sphere_circle_scalar(0.01, r0), rtol=1e-12)


def test_negative_initial_curvature_warns(grid16):
    jet = diagonal_jet(grid16, [1, 1], [1, 1], [5, 5])
    with pytest.warns(NegativeInitialCurvature):
        R0 = initial_scalar_curvature(jet)
    assert R0.max() < 0


def test_conformal_torus_is_non_uniform(grid16, torus_jet16):
    assert not torus_jet16.is_uniform()
    assert torus_jet16.mean_trace().min() > 0
    R0 = initial_scalar_curvature(torus_jet16)
    assert R0.min() > 0
    # R0 = rate^2 (d-1) d / 4 + R(h0) and R(h0) averages to zero on the torus
    assert R0.mean() == pytest.approx(2.0, abs=0.05)


def test_custom_tables_shape_checked(grid16):
    bad = np.ones((2, 8, 8))
    with pytest.raises(ArgumentError):
        jet_from_analytic(custom_diagonal(bad, bad, bad), grid16)
    with pytest.raises(ArgumentError):
        custom_diagonal(bad, np.ones((2, 8, 4)), bad)


def test_custom_callback_uses_fd(grid16):
    spec = custom_diagonal(None, metric=lambda s, c: np.stack([np.full(np.shape(c[0]), (1 + s) ** 2)] * 2))
    jet = jet_from_analytic(spec, grid16)
    np.testing.assert_allclose(np.diagonal(jet.h0p.comp, axis1=-2, axis2=-1), 2.0, atol=1e-9)
    np.testing.assert_allclose(np.diagonal(jet.h0pp.comp, axis1=-2, axis2=-1), 2.0, atol=1e-7)


def test_sphere_radius_validated():
    with pytest.raises(ArgumentError):
        sphere_circle_warped(r0=0.0)
