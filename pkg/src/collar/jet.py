"""Second-order boundary jets (h0, h0', h0'') and the analytic collar families.

A jet is the slice metric of the boundary together with its first two
one-sided normal derivatives, taken along the outgoing unit normal.  This is
the only input the extension needs; the interior manifold is never stored.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import tensors as tf
from .errors import ArgumentError, MeanConvexityViolation
from .geometry import periodic_differ, scalar_curvature
from .stencils import weights_array
from .tensors import BoundaryGrid, SymTensorField

FAMILIES = ("flat_product", "sphere_circle_warped", "custom_diagonal")
# traces this small are rounding noise of O(1) data (e.g. sin(pi) at an equator)
MEAN_CONVEX_FLOOR = 1e-12


class NegativeInitialCurvature(RuntimeWarning):
    """The boundary scalar curvature R0 is negative somewhere."""


@dataclass(frozen=True)
class BoundaryJet:
    grid: BoundaryGrid
    h0: SymTensorField
    h0p: SymTensorField
    h0pp: SymTensorField
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        for f in (self.h0, self.h0p, self.h0pp):
            if f.grid != self.grid:
                raise ArgumentError("jet components must live on the jet grid")
        if self.check:
            tf.assert_positive_definite(self.h0.comp, "h0")
            _require_mean_convex(self.mean_trace())

    @property
    def n(self) -> int:
        """Dimension of the ambient manifold."""
        return self.grid.dim + 1

    def mean_trace(self):
        """``tr_h0 h0'`` per node (twice the boundary mean curvature)."""
        return tf.trace(self.h0p, self.h0)

    def shear(self) -> SymTensorField:
        """Traceless part of ``h0'`` relative to ``h0``."""
        return tf.traceless_part(self.h0p, self.h0)

    def is_uniform(self) -> bool:
        """True when every component is the same at all nodes."""
        return all(np.ptp(f.comp.reshape(-1, *f.comp.shape[-2:]), axis=0).max() == 0 for f in (self.h0, self.h0p, self.h0pp))


def _require_mean_convex(tr):
    k = int(np.argmin(tr))
    worst = float(tr.flat[k])
    if not worst > MEAN_CONVEX_FLOOR:
        node = tuple(int(i) for i in np.unravel_index(k, tr.shape))
        raise MeanConvexityViolation(
            f"boundary is not strictly mean convex: tr_h0 h0' = {worst:.6g} at node {node}",
            node=node,
            value=worst,
        )


@dataclass(frozen=True)
class AnalyticCollarSpec:
    """A metric ``ds^2 + hbar(s)`` near the boundary ``s = 0`` (interior ``s < 0``).

    ``metric(s, coords)`` returns the slice components with shape
    ``(*grid, d, d)``; ``jet`` optionally returns the closed-form
    ``(h0, h0', h0'')`` component arrays for the given coordinates.
    """

    family: str
    params: dict
    metric: Callable
    jet: Callable | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown family {self.family!r}; expected one of {FAMILIES}")


def _diag(*entries):
    shape = np.broadcast(*entries).shape
    d = len(entries)
    out = np.zeros(shape + (d, d))
    for i, e in enumerate(entries):
        out[..., i, i] = e
    return out


def sphere_circle_warped(eps=0.01, r0=np.pi / 6):
    """``dr^2 + sin^2 r dphi^2 + (1 + eps cos 4r)^2 dtheta^2`` cut at ``r = r0``.

    Boundary coordinates are ``(phi, theta)``; use a grid with periods
    ``(2 pi, 2 pi)``.
    """
    if not 0 < r0 < np.pi:
        raise ArgumentError(f"r0 must lie in (0, pi) to avoid the polar singularities, got {r0}")

    def metric(s, coords):
        r = r0 + s
        shape = np.shape(coords[0])
        return _diag(np.full(shape, np.sin(r) ** 2), np.full(shape, (1 + eps * np.cos(4 * r)) ** 2))

    def jet(coords):
        shape = np.shape(coords[0])
        f = 1 + eps * np.cos(4 * r0)
        fp = -4 * eps * np.sin(4 * r0)
        fpp = -16 * eps * np.cos(4 * r0)
        full = lambda v: np.full(shape, v)  # noqa: E731
        return (
            _diag(full(np.sin(r0) ** 2), full(f**2)),
            _diag(full(np.sin(2 * r0)), full(2 * f * fp)),
            _diag(full(2 * np.cos(2 * r0)), full(2 * fp**2 + 2 * f * fpp)),
        )

    return AnalyticCollarSpec("sphere_circle_warped", {"eps": eps, "r0": r0}, metric, jet)


def flat_product(length=1.0):
    """``[0, length] x T^d`` with the flat product metric; boundary at ``x = length``."""

    def metric(s, coords):
        d = len(coords)
        return np.broadcast_to(np.eye(d), np.shape(coords[0]) + (d, d)).copy()

    def jet(coords):
        g = metric(0.0, coords)
        return g, np.zeros_like(g), np.zeros_like(g)

    return AnalyticCollarSpec("flat_product", {"length": length}, metric, jet)


def custom_diagonal(h0, h0p=None, h0pp=None, metric=None):
    """User-supplied diagonal data.

    Either three tables of shape ``(d, *grid)`` holding the diagonal of
    ``h0, h0', h0''``, or a callback ``metric(s, coords) -> (d, *grid)`` of
    diagonal entries that is differentiated numerically.
    """
    if metric is not None:

        def full(s, coords):
            return _diag(*np.asarray(metric(s, coords)))

        return AnalyticCollarSpec("custom_diagonal", {"source": "callback"}, full, None)
    tables = [np.asarray(a, dtype=float) for a in (h0, h0p, h0pp)]
    if any(t.shape != tables[0].shape for t in tables):
        raise ArgumentError("custom_diagonal tables must share one shape (d, *grid)")

    def jet(coords):
        if tables[0].shape[1:] != np.shape(coords[0]):
            raise ArgumentError(f"table shape {tables[0].shape[1:]} does not match grid {np.shape(coords[0])}")
        return tuple(_diag(*t) for t in tables)

    def taylor(s, coords):
        a, b, c = jet(coords)
        return a + s * b + 0.5 * s * s * c

    return AnalyticCollarSpec("custom_diagonal", {"source": "tables"}, taylor, jet)


def conformal_torus(grid: BoundaryGrid, amplitude=0.1, rate=2.0):
    """Jet ``(h0, rate h0, 0)`` with ``h0 = e^{2 phi} I`` and ``phi = amplitude sin x1``.

    Built as diagonal tables, so it exercises the non-uniform code paths: the
    boundary metric has intrinsic curvature of both signs, while
    ``R0 = rate^2 (d - 1) d / 4 + R(h0)`` stays positive for small amplitude.
    """
    x1 = grid.coords()[0]
    w = np.exp(2 * amplitude * np.sin(x1))
    d = grid.dim
    h0 = np.stack([w] * d)
    return custom_diagonal(h0, rate * h0, np.zeros_like(h0))


def one_sided_derivatives(metric, coords, step, order=6):
    """First and second s-derivatives at ``s = 0`` from samples at ``s <= 0``."""
    n1, n2 = order + 1, order + 2
    w1 = weights_array(tuple(range(0, -n1, -1)), 1)
    w2 = weights_array(tuple(range(0, -n2, -1)), 2)
    samples = [np.asarray(metric(-k * step, coords), dtype=float) for k in range(n2)]
    d1 = sum(w * samples[k] for k, w in enumerate(w1)) / step
    d2 = sum(w * samples[k] for k, w in enumerate(w2)) / step**2
    return samples[0], d1, d2


def jet_from_analytic(spec: AnalyticCollarSpec, grid: BoundaryGrid, method="auto", step=0.02) -> BoundaryJet:
    """Sample a jet from an analytic family.

    ``method`` is ``"closed"`` (family-provided derivatives), ``"fd"``
    (sixth-order one-sided differences with the given ``step``) or ``"auto"``.
    """
    coords = grid.coords()
    if method == "auto":
        method = "closed" if spec.jet is not None else "fd"
    if method == "closed":
        if spec.jet is None:
            raise ArgumentError(f"family {spec.family} provides no closed-form jet")
        comps = spec.jet(coords)
    elif method == "fd":
        comps = one_sided_derivatives(spec.metric, coords, step)
    else:
        raise ArgumentError(f"unknown method {method!r}")
    h0, h0p, h0pp = (SymTensorField(grid, c) for c in comps)
    return BoundaryJet(grid, h0, h0p, h0pp)


def mean_curvature_floor(jet: BoundaryJet) -> float:
    """``theta_0 = min(tr_h0 h0') / 2``, a lower bound of the mean curvature."""
    tr = jet.mean_trace()
    _require_mean_convex(tr)
    return 0.5 * float(tr.min())


def intrinsic_scalar(h: SymTensorField, strict=True):
    """Scalar curvature of ``h`` as a metric on the boundary torus."""
    if strict:
        tf.assert_positive_definite(h.comp, "h")
    return scalar_curvature(h.comp, periodic_differ(h.grid.spacing))


def initial_scalar_curvature(jet: BoundaryJet):
    """Ambient scalar curvature on the boundary, from the jet alone.

    ``R0 = -tr h0'' + 3/4 |h0'|^2 - 1/4 (tr h0')^2 + R(h0)`` with all traces
    and norms taken with respect to ``h0``.  Emits
    :class:`NegativeInitialCurvature` if ``min R0 < 0``.
    """
    hinv = tf.inverse(jet.h0.comp)
    tr1 = tf.trace_raw(jet.h0p.comp, hinv)
    R0 = (
        -tf.trace_raw(jet.h0pp.comp, hinv)
        + 0.75 * tf.inner_raw(jet.h0p.comp, jet.h0p.comp, hinv)
        - 0.25 * tr1**2
        + intrinsic_scalar(jet.h0)
    )
    if R0.min() < 0:
        warnings.warn(f"boundary scalar curvature is negative (min R0 = {R0.min():.3e})", NegativeInitialCurvature, stacklevel=2)
    return R0
