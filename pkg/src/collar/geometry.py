"""Scalar curvature of a metric sampled on a structured grid.

The metric array has shape ``(*lead, n, n)``; ``diff(arr, k)`` must return
the derivative of ``arr`` along coordinate ``k``.  Coordinates the metric does
not depend on can be handled by a ``diff`` that returns zeros.  The chain is
metric -> Christoffel symbols -> (finite-differenced) Ricci -> trace.
"""

import numpy as np

from .stencils import periodic_diff
from .tensors import inner_raw, inverse, trace_raw


def christoffel(ginv, dg):
    """``Gamma^a_bc`` from the inverse metric and ``dg[..., k, i, j] = d_k g_ij``."""
    lower = np.einsum("...bdc->...dbc", dg) + np.einsum("...cdb->...dbc", dg) - dg
    return 0.5 * np.einsum("...ad,...dbc->...abc", ginv, lower)


def ricci(g, diff, ginv=None, dg=None):
    """Ricci tensor and inverse metric of ``g`` using the supplied derivative.

    ``dg[..., k, i, j]`` may be passed in when the caller can differentiate
    the metric more accurately than ``diff(g, k)``.
    """
    n = g.shape[-1]
    if ginv is None:
        ginv = inverse(g)
    if dg is None:
        dg = np.stack([diff(g, k) for k in range(n)], axis=-3)
    gam = christoffel(ginv, dg)
    del dg
    div = sum(diff(gam[..., a, :, :], a) for a in range(n))
    v = np.einsum("...aab->...b", gam)
    dv = np.stack([diff(v, c) for c in range(n)], axis=-2)  # [..., c, b] = d_c V_b
    ric = div - np.swapaxes(dv, -1, -2)
    ric += np.einsum("...d,...dbc->...bc", v, gam)
    ric -= np.einsum("...acd,...dab->...bc", gam, gam)
    return 0.5 * (ric + np.swapaxes(ric, -1, -2)), ginv


def scalar_curvature(g, diff):
    ric, ginv = ricci(g, diff)
    return trace_raw(ric, ginv)


def periodic_differ(spacing, lead=0):
    """``diff`` for a metric on a periodic grid with ``lead`` batch axes in front."""

    def diff(arr, k):
        return periodic_diff(arr, lead + k, spacing[k])

    return diff


def sce_summands(h, hd, hdd, alpha, alpha_dot, calR):
    """The four groups whose sum is ``alpha^2 R`` for ``alpha^2 dt^2 + h(t)``.

    ``[(alpha'/alpha) tr h', -tr h'', 3/4 |h'|^2 - 1/4 (tr h')^2, alpha^2 R(h)]``
    stacked on a trailing axis; ``alpha`` and ``alpha_dot`` must broadcast
    against the node axes of ``h``.
    """
    hinv = inverse(h)
    tr1 = trace_raw(hd, hinv)
    tr2 = trace_raw(hdd, hinv)
    nrm = inner_raw(hd, hd, hinv)
    return np.stack(
        [alpha_dot / alpha * tr1, -tr2, 0.75 * nrm - 0.25 * tr1**2, alpha**2 * calR],
        axis=-1,
    )


def intrinsic_batch(h, spacing, uniform=False, chunk=32):
    """Scalar curvature of a batch of slice metrics of shape ``(nb, *grid, d, d)``.

    ``uniform`` marks node-independent data, whose curvature vanishes.
    """
    if uniform:
        return np.zeros(h.shape[:-2], dtype=h.dtype)
    diff = periodic_differ(spacing, lead=1)
    return np.concatenate([scalar_curvature(h[i : i + chunk], diff) for i in range(0, len(h), chunk)])
