"""The path of slice metrics h(t) and the assembled collar ``alpha^2 dt^2 + h``.

``h(t) = h0 + k T(t) h0 + F(t) S + G(t) h0''`` where ``k = tr_h0 h0' / (n-1)``,
``S`` is the traceless part of ``h0'`` and ``T(t)`` is ``t`` (convex) or the
bend profile H (geodesic, concave).  All t-derivatives are closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensors as tf
from .errors import ArgumentError
from .jet import BoundaryJet
from .profiles import ProfileSet
from .tensors import SymTensorField

VARIANTS = ("convex", "geodesic", "concave")


def path_arrays(jet: BoundaryJet, profiles: ProfileSet, t, dtype=float, increment=False):
    """``(h, h', h'')`` component arrays for a 1-d array of times.

    Output shapes are ``(len(t), *grid, d, d)``.  With ``increment`` the first
    array is ``h(t) - h0``, free of the rounding that adding ``h0`` brings.
    """
    t = np.atleast_1d(np.asarray(t, dtype=dtype))
    h0 = jet.h0.comp.astype(dtype)
    S = jet.shear().comp.astype(dtype)
    h2 = jet.h0pp.comp.astype(dtype)
    k = (jet.mean_trace() / (jet.n - 1)).astype(dtype)[..., None, None]
    T = profiles.T(t)
    F = profiles.F(t)
    G = profiles.G(t)
    pad = (slice(None),) + (None,) * (h0.ndim)
    out = []
    for j in range(3):
        term = T[j][pad] * (k * h0) + F[j][pad] * S + G[j][pad] * h2
        if j == 0 and not increment:
            term = term + h0
        out.append(term)
    return tuple(out)


def path_h(jet, profiles, t):
    """``(h, h', h'')`` at a single time as tensor fields."""
    if np.ndim(t):
        raise ArgumentError("path_h takes a scalar time; use path_arrays for batches")
    if t < 0 or t > profiles.t_end * (1 + 1e-12):
        raise ArgumentError(f"t={t} outside [0, {profiles.t_end}]")
    h, hd, hdd = (a[0] for a in path_arrays(jet, profiles, [t]))
    tf.assert_positive_definite(h, "h(t)")
    return tuple(SymTensorField(jet.grid, a) for a in (h, hd, hdd))


@dataclass(frozen=True)
class CollarMetric:
    """``alpha(t)^2 dt^2 + h(t)`` on ``[0, t_end] x boundary``."""

    jet: BoundaryJet
    profiles: ProfileSet
    warp: object
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown variant {self.variant!r}")
        convex = self.profiles.H is None
        if convex != (self.variant == "convex"):
            raise ArgumentError(f"profiles do not match variant {self.variant}")
        if self.variant == "geodesic" and self.profiles.eps_bar:
            raise ArgumentError("the geodesic collar ends exactly at t_plus")

    @property
    def t_end(self) -> float:
        return self.profiles.t_end

    @property
    def n(self) -> int:
        return self.jet.n

    def path(self, t, dtype=float, increment=False):
        return path_arrays(self.jet, self.profiles, t, dtype=dtype, increment=increment)

    def alpha(self, t):
        return self.warp.alpha(t)

    def junctions(self):
        """Times where h or alpha lose a derivative (C^2 profiles, C^1 warp)."""
        pts = set(self.profiles.junctions())
        pts.add(self.warp.t_I)
        return sorted(p for p in pts if 0 < p < self.t_end)

    def sample_times(self, n=256):
        """Uniform samples plus every junction point."""
        ts = np.concatenate([np.linspace(0.0, self.t_end, n), self.junctions()])
        return np.unique(ts)

    def second_fundamental_form(self, t) -> SymTensorField:
        """``Theta = h'(t) / (2 alpha(t))`` on the slice ``{t} x boundary``."""
        _, hd, _ = self.path([t])
        a, _ = self.alpha(np.array([t]))
        return SymTensorField(self.jet.grid, hd[0] / (2 * a[0]))

    def slice_metric(self, t) -> SymTensorField:
        return SymTensorField(self.jet.grid, self.path([t])[0][0])

    def arclength(self, t):
        return self.warp.arclength(t)


def second_fundamental_form(metric: CollarMetric, t) -> SymTensorField:
    return metric.second_fundamental_form(t)


def positivity_margin(metric: CollarMetric, ts):
    """Smallest relative Cholesky pivot of h(t) over the given times."""
    h, _, _ = metric.path(ts)
    return float(tf.cholesky_pivots(h).min())
