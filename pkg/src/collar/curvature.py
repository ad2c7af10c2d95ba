"""Scalar curvature of the collar ``alpha^2 dt^2 + h(t)``.

Two independent engines:

* :func:`slice_scalar` combines closed-form t-derivatives of ``h`` and
  ``alpha`` with the finite-difference curvature of each slice;
* :func:`oracle_scalar` differentiates the full n-dimensional metric on the
  (t, x) product grid and knows nothing about the slice decomposition.

The oracle works in extended precision: the path is piecewise cubic in t, so
4th-order t-stencils are nearly exact and double-precision cancellation would
otherwise dominate the comparison.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import tensors as tf
from .errors import ResolutionError
from .geometry import intrinsic_batch, ricci, sce_summands
from .stencils import bounded_diff, periodic_diff
from .tensors import BoundaryGrid

ORACLE_DTYPE = np.longdouble
HALO = 4  # two nested 5-point derivatives
MEMORY_BUDGET = 1536 * 2**20


@dataclass(frozen=True)
class CurvatureField:
    """Slice-formula curvature on a set of times over every boundary node."""

    t: np.ndarray
    grid: BoundaryGrid
    R: np.ndarray
    summands: np.ndarray
    calR: np.ndarray
    alpha: np.ndarray
    R_oracle: np.ndarray | None = field(default=None, compare=False)

    def minimum(self):
        """``(min R, t, node)`` over the sampled field."""
        k = int(np.argmin(self.R))
        idx = np.unravel_index(k, self.R.shape)
        return float(self.R.flat[k]), float(self.t[idx[0]]), tuple(int(i) for i in idx[1:])

    def reassembly_residual(self):
        """Relative gap between the stored summands and ``alpha^2 R``."""
        a2 = (self.alpha**2).reshape((-1,) + (1,) * self.grid.dim)
        total = self.summands.sum(axis=-1)
        scale = np.maximum(np.abs(self.summands).max(axis=-1), 1.0)
        return float((np.abs(total - a2 * self.R) / scale).max())

    def with_oracle(self, R_oracle):
        R_oracle = np.asarray(R_oracle, dtype=float)
        if R_oracle.shape != self.R.shape:
            raise ValueError(f"oracle shape {R_oracle.shape} does not match {self.R.shape}")
        return CurvatureField(self.t, self.grid, self.R, self.summands, self.calR, self.alpha, R_oracle)

    def csv_rows(self):
        coords = self.grid.coords()
        flat_x = [c.ravel() for c in coords]
        nn = self.grid.size
        for i, t in enumerate(self.t):
            R = self.R[i].ravel()
            Ro = self.R_oracle[i].ravel() if self.R_oracle is not None else None
            S = self.summands[i].reshape(nn, 4)
            for k in range(nn):
                yield [repr(float(t)), *(repr(float(x[k])) for x in flat_x), repr(float(R[k])), "" if Ro is None else repr(float(Ro[k])), *(repr(float(v)) for v in S[k])]

    def header(self):
        d = self.grid.dim
        return ["t", *(f"x{i + 1}" for i in range(d)), "R_slice", "R_oracle", *(f"summand_{i}" for i in range(1, 5))]

    def to_csv(self, path=None):
        """Write (or return, when ``path`` is None) the field as CSV text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.csv_rows())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def slice_scalar(metric, t) -> CurvatureField:
    """``R`` of the collar on the slices ``{t} x boundary`` via the slice formula."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h, hd, hdd = metric.path(t)
    jet = metric.jet
    calR = intrinsic_batch(h, jet.grid.spacing, uniform=jet.is_uniform())
    alpha, alpha_dot = metric.alpha(t)
    pad = (slice(None),) + (None,) * jet.grid.dim
    S = sce_summands(h, hd, hdd, alpha[pad], alpha_dot[pad], calR)
    R = S.sum(axis=-1) / (alpha**2)[pad]
    return CurvatureField(t, jet.grid, R, S, calR, np.asarray(alpha, dtype=float))


def riccati_terms(metric, t):
    """Mean curvature and ``|Theta|^2`` of the slices, from ``Theta`` and from ``h'``.

    Returns ``(theta, norm_theta, norm_hdot_scaled)`` where the last two agree
    analytically: ``|Theta|^2 = |h'|^2 / (4 alpha^2)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h, hd, _ = metric.path(t)
    alpha, _ = metric.alpha(t)
    pad = (slice(None),) + (None,) * (metric.jet.grid.dim + 2)
    theta_field = hd / (2 * alpha[pad])
    hinv = tf.inverse(h)
    theta = tf.trace_raw(theta_field, hinv)
    norm_theta = tf.inner_raw(theta_field, theta_field, hinv)
    norm_hd = tf.inner_raw(hd, hd, hinv) / (4 * alpha[pad[:-2]] ** 2)
    return theta, norm_theta, norm_hd


# ---------------------------------------------------------------------------
# oracle


@dataclass(frozen=True)
class OracleField:
    """Full-metric curvature on the split (t, x) grid.

    ``t`` concatenates the pieces; a junction time appears once per adjacent
    piece, each carrying its own one-sided value.
    """

    t: np.ndarray
    piece: np.ndarray
    R: np.ndarray
    ric_nn: np.ndarray | None = None

    @property
    def interior(self):
        """Mask excluding the two ends of the collar."""
        return (self.t > self.t[0]) & (self.t < self.t[-1])


def t_pieces(metric, n_t=128, min_nodes=12):
    """Node counts and bounds of the t-pieces between regularity breaks."""
    cuts = [0.0, *metric.junctions(), metric.t_end]
    total = cuts[-1]
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = max(min_nodes, int(round(n_t * (hi - lo) / total)) + 1)
        out.append((lo, hi, n))
    return out


def _metric_block(metric, ts, dtype):
    """Increment ``g - g(0)`` of ``alpha^2 dt^2 + h`` at times ``ts``, and ``g(0)``.

    The t-derivatives are taken of the increment, whose rounding error scales
    with its own (small) size rather than with ``|g|``; on very short pieces
    this is what keeps the second t-difference above the rounding floor.
    """
    grid = metric.jet.grid
    d = grid.dim
    inc = np.zeros((len(ts),) + grid.shape + (d + 1, d + 1), dtype=dtype)
    for s0, s1 in _chunks(len(ts), 16):
        inc[s0:s1, ..., 1:, 1:] = metric.path(ts[s0:s1], dtype=dtype, increment=True)[0]
    excess = np.asarray(metric.warp.alpha_sq_excess(ts), dtype=dtype)
    inc[..., 0, 0] = excess.reshape((-1,) + (1,) * d)
    base = np.zeros(grid.shape + (d + 1, d + 1), dtype=dtype)
    base[..., 0, 0] = 1
    base[..., 1:, 1:] = metric.jet.h0.comp
    return inc, base


def _slab_curvature(inc, base, dt, spacing, want_ric):
    def diff(arr, k):
        if k == 0:
            return bounded_diff(arr, 0, dt)
        return periodic_diff(arr, k, spacing[k - 1])

    g = base + inc
    n = g.shape[-1]
    dg = np.stack([diff(inc, 0)] + [diff(g, k) for k in range(1, n)], axis=-3)
    ric, ginv = ricci(g, diff, dg=dg)
    R = tf.trace_raw(ric, ginv)
    nn = ric[..., 0, 0] / g[..., 0, 0] if want_ric else None
    return R, nn


def _chunks(n, width):
    return [(s, min(n, s + width)) for s in range(0, n, width)]


def oracle_scalar(metric, n_t=128, dtype=ORACLE_DTYPE, with_ricci=False, budget=MEMORY_BUDGET) -> OracleField:
    """Brute-force ``R`` of the collar on a product grid split at every junction.

    Each piece gets a uniform t-grid including both endpoints, so no stencil
    straddles a point where ``h`` or ``alpha`` loses smoothness.  Large grids
    are processed in slabs along the last boundary axis with a periodic halo.
    """
    jet = metric.jet
    grid = jet.grid
    spacing = grid.spacing
    d = grid.dim
    n = d + 1
    per_point = 5 * n**3 * np.dtype(dtype).itemsize  # measured peak is about 4 n^3
    ts_all, piece_all, R_all, nn_all = [], [], [], []
    for p, (lo, hi, m) in enumerate(t_pieces(metric, n_t)):
        if m < 5:
            raise ResolutionError(f"piece [{lo}, {hi}] has {m} nodes, fewer than the stencil width")
        ts = np.linspace(np.asarray(lo, dtype=dtype), np.asarray(hi, dtype=dtype), m)
        dt = (ts[-1] - ts[0]) / (m - 1)
        inc_full, base = _metric_block(metric, ts, dtype)
        N_last = grid.shape[-1]
        column = m * grid.size // N_last
        width = max(1, int(budget // (per_point * column)) - 2 * HALO)
        R = np.empty((m,) + grid.shape, dtype=dtype)
        nn = np.empty_like(R) if with_ricci else None
        if width >= N_last:
            R[...], nn_block = _slab_curvature(inc_full, base, dt, spacing, with_ricci)
            if with_ricci:
                nn[...] = nn_block
        else:
            for s0, s1 in _chunks(N_last, width):
                idx = np.arange(s0 - HALO, s1 + HALO) % N_last
                Rc, nnc = _slab_curvature(np.take(inc_full, idx, axis=d), np.take(base, idx, axis=d - 1), dt, spacing, with_ricci)
                keep = (Ellipsis, slice(HALO, HALO + s1 - s0))
                R[..., s0:s1] = Rc[keep]
                if with_ricci:
                    nn[..., s0:s1] = nnc[keep]
        ts_all.append(ts)
        piece_all.append(np.full(m, p))
        R_all.append(R)
        if with_ricci:
            nn_all.append(nn)
    return OracleField(
        t=np.concatenate(ts_all).astype(float),
        piece=np.concatenate(piece_all),
        R=np.concatenate(R_all).astype(float),
        ric_nn=np.concatenate(nn_all).astype(float) if with_ricci else None,
    )


def oracle_discrepancy(metric, n_t=128, oracle=None):
    """Largest ``|R_slice - R_oracle|`` over interior oracle nodes."""
    oracle = oracle_scalar(metric, n_t) if oracle is None else oracle
    field_ = slice_scalar(metric, oracle.t)
    diff = np.abs(field_.R - oracle.R)[oracle.interior]
    return float(diff.max()), field_.with_oracle(oracle.R), oracle


def riccati_identity_check(metric, t=None, n_t=128, oracle=None):
    """Residuals of two identities linking slice data with the full metric.

    ``theta_identity``: ``|Theta|^2_h - |h'|^2_h / (4 alpha^2)``.
    ``gauss``: ``2 Ric(N, N) - (R - calR + theta^2 - |Theta|^2)`` with the
    Ricci term from the oracle and everything else from the slice formula.
    When ``t`` is given only the first residual is computed.
    """
    if t is not None:
        theta, nth, nhd = riccati_terms(metric, t)
        return {"theta_identity": float(np.abs(nth - nhd).max())}
    oracle = oracle_scalar(metric, n_t, with_ricci=True) if oracle is None else oracle
    theta, nth, nhd = riccati_terms(metric, oracle.t)
    sl = slice_scalar(metric, oracle.t)
    gauss = 2 * oracle.ric_nn - (sl.R - sl.calR + theta**2 - nth)
    mask = oracle.interior
    return {
        "theta_identity": float(np.abs(nth - nhd).max()),
        "gauss": float(np.abs(gauss[mask]).max()),
    }
