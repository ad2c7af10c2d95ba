from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collar.errors import ResolutionError
from collar.geometry import intrinsic_batch, periodic_differ, scalar_curvature, sce_summands
from collar.jet import intrinsic_scalar
from collar.stencils import bounded_diff, diff_matrix, fd_weights, periodic_diff
from collar.tensors import BoundaryGrid, SymTensorField


def round_patch(n):
    """``diag(1, sin^2 x1)`` sampled half a cell off the poles, and the band mask."""
    g = BoundaryGrid.uniform(2, n)
    x = g.coords()[0] + g.spacing[0] / 2
    h = np.zeros(g.shape + (2, 2))
    h[..., 0, 0] = 1
    h[..., 1, 1] = np.sin(x) ** 2
    return g, h, (x >= 0.5) & (x <= np.pi - 0.5)


def test_central_weights_exact():
    assert fd_weights((-2, -1, 0, 1, 2), 1) == (Fraction(1, 12), Fraction(-2, 3), 0, Fraction(2, 3), Fraction(-1, 12))
    assert sum(fd_weights((0, 1, 2, 3, 4), 2)) == 0


@settings(max_examples=30, deadline=None)
@given(coef=st.lists(st.floats(-3, 3), min_size=5, max_size=5), dx=st.floats(0.01, 0.5))
def test_bounded_diff_exact_on_quartics(coef, dx):
    x = np.arange(9) * dx
    f = np.polynomial.polynomial.polyval(x, coef)
    df = np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(coef))
    scale = max(1.0, np.abs(coef).max()) / dx
    np.testing.assert_allclose(bounded_diff(f, 0, dx), df, atol=1e-10 * scale)
    np.testing.assert_allclose(diff_matrix(9, dx) @ f, df, atol=1e-10 * scale)


def test_diff_matrix_needs_stencil_width():
    with pytest.raises(ResolutionError):
        diff_matrix(4, 0.1)


def test_periodic_diff_fourth_order():
    errs = []
    for n in (32, 64):
        x = np.arange(n) * 2 * np.pi / n
        errs.append(np.abs(periodic_diff(np.sin(3 * x), 0, 2 * np.pi / n) - 3 * np.cos(3 * x)).max())
    assert np.log2(errs[0] / errs[1]) > 3.9


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), d=st.integers(2, 3))
def test_constant_metric_is_exactly_flat(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d))
    g = BoundaryGrid(tuple(rng.uniform(1, 7, size=d)), (8,) * d)
    h = SymTensorField.constant(g, a @ a.T + np.eye(d))
    assert np.all(intrinsic_scalar(h) == 0)


def test_constant_sphere_slice_metric_flat():
    g = BoundaryGrid.uniform(2, 16)
    h = SymTensorField.constant(g, np.diag([np.sin(np.pi / 6) ** 2, 1.0]))
    assert np.all(intrinsic_scalar(h) == 0)


def test_round_patch_curvature_two_fourth_order():
    errs = []
    for n in (256, 512):
        g, h, band = round_patch(n)
        R = scalar_curvature(h, periodic_differ(g.spacing))
        errs.append(np.abs(R[band] - 2).max())
    assert errs[1] < 1e-5
    assert np.log2(errs[0] / errs[1]) >= 4.0


def test_intrinsic_batch_matches_single_and_uniform_shortcut():
    g, h, _ = round_patch(32)
    batch = np.stack([h, 2 * h])
    out = intrinsic_batch(batch, g.spacing, chunk=1)
    single = scalar_curvature(h, periodic_differ(g.spacing))
    np.testing.assert_allclose(out[0], single, rtol=1e-13)
    np.testing.assert_allclose(out[1], single / 2, rtol=1e-12, atol=1e-12)
    assert np.all(intrinsic_batch(batch, g.spacing, uniform=True) == 0)


def test_summands_flat_conformal():
    # h = (1 + 2t) I, alpha = 1: alpha^2 R = 3/4 * 8/(1+2t)^2 - 1/4 * 16/(1+2t)^2
    t = np.linspace(0, 1, 7)
    w = 1 + 2 * t
    h = w[:, None, None] * np.eye(2)
    hd = np.broadcast_to(2 * np.eye(2), h.shape)
    S = sce_summands(h, hd, np.zeros_like(h), np.ones_like(t), np.zeros_like(t), np.zeros_like(t))
    np.testing.assert_allclose(S.sum(axis=-1), 2 / w**2, rtol=1e-14)
    np.testing.assert_allclose(S[:, 0], 0)
    np.testing.assert_allclose(S[:, 1], 0)
