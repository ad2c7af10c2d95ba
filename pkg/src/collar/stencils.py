"""Finite-difference weights and derivative operators on uniform grids."""

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ResolutionError


@lru_cache(maxsize=None)
def fd_weights(offsets, m):
    """Exact weights for the ``m``-th derivative at 0 from integer ``offsets``.

    Fornberg's recursion carried out in rational arithmetic, so the weights
    sum to zero exactly (for ``m >= 1``) in any floating precision.
    """
    x = [Fraction(o) for o in offsets]
    n = len(x)
    c = [[Fraction(0)] * (m + 1) for _ in range(n)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    for i in range(1, n):
        c2 = Fraction(1)
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            for k in range(min(i, m), -1, -1):
                prev = c[i - 1][k - 1] if k else 0
                c[i][k] = c1 * (k * prev - x[i - 1] * c[i - 1][k]) / c2
            for k in range(min(i, m), -1, -1):
                prev = c[j][k - 1] if k else 0
                c[j][k] = (x[i] * c[j][k] - k * prev) / c3
        c1 = c2
    return tuple(c[j][m] for j in range(n))


def weights_array(offsets, m, dtype=float):
    return np.array([w.numerator for w in fd_weights(tuple(offsets), m)], dtype=dtype) / np.array(
        [w.denominator for w in fd_weights(tuple(offsets), m)], dtype=dtype
    )


def periodic_diff(f, axis, dx):
    """Fourth-order central first derivative along a periodic axis."""
    return (
        8 * (np.roll(f, -1, axis) - np.roll(f, 1, axis)) - (np.roll(f, -2, axis) - np.roll(f, 2, axis))
    ) / (12 * dx)


def diff_matrix(n, dx, width=5, dtype=float):
    """Dense first-derivative matrix on ``n`` uniform nodes.

    Centred ``width``-point stencils in the interior, shifted one-sided
    stencils of the same width near the ends (order ``width - 1``).
    """
    if n < width:
        raise ResolutionError(f"need at least {width} nodes for the stencil, got {n}")
    D = np.zeros((n, n), dtype=dtype)
    half = width // 2
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        idx = np.arange(start, start + width)
        D[i, idx] = weights_array(tuple(int(j - i) for j in idx), 1, dtype=dtype)
    return D / np.asarray(dx, dtype=dtype)


def apply_matrix(D, f, axis):
    out = np.tensordot(D, f, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def bounded_diff(f, axis, dx, width=5):
    """First derivative on a non-periodic uniform axis.

    Same stencils as :func:`diff_matrix`, applied by slicing instead of a
    dense product.
    """
    n = f.shape[axis]
    if n < width:
        raise ResolutionError(f"need at least {width} nodes for the stencil, got {n}")
    f = np.moveaxis(f, axis, 0)
    half = width // 2
    out = np.empty_like(f)
    w = weights_array(tuple(range(-half, half + 1)), 1, dtype=f.dtype)
    out[half : n - half] = sum(w[j] * f[j : n - width + 1 + j] for j in range(width))
    for i in (*range(half), *range(n - half, n)):
        start = min(max(i - half, 0), n - width)
        wi = weights_array(tuple(range(start - i, start - i + width)), 1, dtype=f.dtype)
        out[i] = sum(wi[j] * f[start + j] for j in range(width))
    return np.moveaxis(out / np.asarray(dx, dtype=f.dtype), 0, axis)
