"""Symmetric 2-tensor fields on a periodic coordinate torus.

A field stores one symmetric ``d x d`` matrix per grid node in an array of
shape ``(*grid.shape, d, d)``.  Scalar fields are plain arrays of shape
``grid.shape``.  All contractions go through the inverse of a reference
metric, so they are frame independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, PositivityError

PIVOT_TOL = 1e-13


@dataclass(frozen=True)
class BoundaryGrid:
    """Uniform periodic grid ``x_i = k L_i / N_i`` on the torus ``T^d``."""

    periods: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        periods = tuple(float(p) for p in self.periods)
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "shape", shape)
        if len(periods) != len(shape):
            raise ArgumentError("periods and shape must have the same length")
        if len(shape) < 2:
            raise ArgumentError(f"boundary dimension must be >= 2, got {len(shape)}")
        for p in periods:
            if not (np.isfinite(p) and p > 0):
                raise ArgumentError(f"periods must be positive, got {periods}")
        for n in shape:
            if n < 8 or n % 2:
                raise ArgumentError(f"node counts must be even and >= 8, got {shape}")

    @classmethod
    def uniform(cls, d, n, period=2 * np.pi):
        return cls((period,) * d, (n,) * d)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(p / n for p, n in zip(self.periods, self.shape))

    def axis_coords(self, i):
        return np.arange(self.shape[i]) * self.spacing[i]

    def coords(self):
        """Node coordinates as a list of ``d`` arrays of shape ``self.shape``."""
        return np.meshgrid(*[self.axis_coords(i) for i in range(self.dim)], indexing="ij")

    def refined(self, factor=2):
        return BoundaryGrid(self.periods, tuple(n * factor for n in self.shape))


@dataclass(frozen=True)
class SymTensorField:
    """Per-node symmetric matrices on a :class:`BoundaryGrid`.

    The component array is symmetrized on construction and must be finite.
    """

    grid: BoundaryGrid
    comp: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.grid.dim
        comp = np.asarray(self.comp)
        if not np.issubdtype(comp.dtype, np.floating):
            comp = comp.astype(float)
        expected = self.grid.shape + (d, d)
        if comp.shape != expected:
            comp = np.broadcast_to(comp, expected)
        comp = 0.5 * (comp + np.swapaxes(comp, -1, -2))
        if not np.all(np.isfinite(comp)):
            raise ArgumentError("tensor field has non-finite entries")
        comp.setflags(write=False)
        object.__setattr__(self, "comp", comp)

    @classmethod
    def constant(cls, grid, matrix):
        return cls(grid, np.broadcast_to(np.asarray(matrix, dtype=float), grid.shape + (grid.dim, grid.dim)))

    @classmethod
    def diagonal(cls, grid, diag):
        """Build from ``d`` scalar fields (or scalars) on the diagonal."""
        d = grid.dim
        if len(diag) != d:
            raise ArgumentError(f"expected {d} diagonal entries, got {len(diag)}")
        comp = np.zeros(grid.shape + (d, d))
        for i, v in enumerate(diag):
            comp[..., i, i] = np.broadcast_to(v, grid.shape)
        return cls(grid, comp)

    @classmethod
    def identity(cls, grid):
        return cls.constant(grid, np.eye(grid.dim))

    @classmethod
    def zeros(cls, grid):
        return cls.constant(grid, np.zeros((grid.dim, grid.dim)))

    def _check(self, other):
        if other.grid != self.grid:
            raise ArgumentError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return SymTensorField(self.grid, self.comp + other.comp)

    def __sub__(self, other):
        self._check(other)
        return SymTensorField(self.grid, self.comp - other.comp)

    def __neg__(self):
        return SymTensorField(self.grid, -self.comp)

    def __mul__(self, factor):
        f = np.asarray(factor, dtype=float)
        if f.ndim:
            f = f[..., None, None]
        return SymTensorField(self.grid, self.comp * f)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.comp)))


# -- raw array kernels (shape (..., d, d)) ----------------------------------


def cholesky_pivots(a):
    """Smallest relative Cholesky pivot per node.

    Returns an array over the leading axes; a value ``<= PIVOT_TOL`` means the
    matrix is not (numerically) positive definite.
    """
    a = np.asarray(a)
    d = a.shape[-1]
    scale = np.max(np.abs(np.diagonal(a, axis1=-2, axis2=-1)), axis=-1)
    scale = np.where(scale > 0, scale, 1.0)
    L = np.zeros_like(a)
    worst = np.full(a.shape[:-2], np.inf, dtype=a.dtype)
    for j in range(d):
        piv = a[..., j, j] - np.sum(L[..., j, :j] ** 2, axis=-1)
        worst = np.minimum(worst, piv / scale)
        root = np.sqrt(np.where(piv > 0, piv, np.nan))
        L[..., j, j] = root
        for i in range(j + 1, d):
            L[..., i, j] = (a[..., i, j] - np.sum(L[..., i, :j] * L[..., j, :j], axis=-1)) / root
    return np.where(np.isnan(worst), -np.inf, worst)


def assert_positive_definite(a, what="metric"):
    piv = cholesky_pivots(a)
    bad = ~(piv > PIVOT_TOL)
    if np.any(bad):
        flat = np.where(np.isnan(piv), -np.inf, piv)
        node = np.unravel_index(int(np.argmin(flat)), piv.shape)
        node = tuple(int(i) for i in node)
        raise PositivityError(
            f"{what} is not positive definite at node {node} (relative pivot {float(flat[node]):.3e})",
            node=node,
            value=float(flat[node]),
        )


def inverse(a):
    """Batched inverse of small matrices; works for extended precision too."""
    a = np.asarray(a)
    if a.dtype in (np.float64, np.float32):
        try:
            return np.linalg.inv(a)
        except np.linalg.LinAlgError:
            pass  # singular nodes: fall through and let them become inf/nan
    d = a.shape[-1]
    m = np.concatenate([a.copy(), np.broadcast_to(np.eye(d, dtype=a.dtype), a.shape)], axis=-1)
    for j in range(d):
        piv = m[..., j, j].copy()  # no pivoting: callers pass SPD matrices
        m[..., j, :] = m[..., j, :] / piv[..., None]
        for i in range(d):
            if i != j:
                m[..., i, :] = m[..., i, :] - m[..., i, j][..., None] * m[..., j, :]
    return m[..., d:]


def trace_raw(u, hinv):
    return np.einsum("...ij,...ij->...", u, hinv)


def inner_raw(u, v, hinv):
    """``u_ab v_cd h^ac h^bd`` evaluated as ``tr(h^-1 u h^-1 v)``."""
    return np.einsum("...ij,...ji->...", hinv @ u, hinv @ v)


# -- field operations ---------------------------------------------------------


def _inv_checked(h: SymTensorField, what):
    assert_positive_definite(h.comp, what)
    return inverse(h.comp)


def inner0(U: SymTensorField, V: SymTensorField, h0: SymTensorField):
    """Pointwise inner product ``U_ab V_cd h0^ac h0^bd``."""
    U._check(V)
    U._check(h0)
    hinv = _inv_checked(h0, "h0")
    return inner_raw(U.comp, V.comp, hinv)


def trace(U: SymTensorField, h: SymTensorField):
    """``tr_h U = U_ij h^ij`` at every node."""
    U._check(h)
    return trace_raw(U.comp, _inv_checked(h, "h"))


def traceless_part(U: SymTensorField, h0: SymTensorField) -> SymTensorField:
    """``U - (tr_h0 U / d) h0``."""
    tr = trace(U, h0)
    return SymTensorField(U.grid, U.comp - (tr / U.grid.dim)[..., None, None] * h0.comp)


def norm_h(U: SymTensorField, h: SymTensorField):
    """Squared pointwise norm ``|U|_h^2``."""
    return inner0(U, U, h)


def _generalized_eigvals(U: SymTensorField, h: SymTensorField):
    U._check(h)
    assert_positive_definite(h.comp, "h")
    L = np.linalg.cholesky(h.comp)
    Linv = np.linalg.inv(L)
    M = Linv @ U.comp @ np.swapaxes(Linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))


def min_eigenvalue(U: SymTensorField, h: SymTensorField):
    """Smallest root of ``det(U - lambda h) = 0`` at every node."""
    return _generalized_eigvals(U, h)[..., 0]


def max_eigenvalue(U: SymTensorField, h: SymTensorField):
    return _generalized_eigvals(U, h)[..., -1]


def inverse_field(h: SymTensorField) -> SymTensorField:
    """The field ``h^{-1}`` with components ``h^ij``."""
    return SymTensorField(h.grid, _inv_checked(h, "h"))


def vector_norm0(v, h0: SymTensorField):
    """``|v|_0`` for a per-node vector array of shape ``(*grid, d)``."""
    return np.sqrt(np.einsum("...i,...ij,...j->...", v, h0.comp, v))


def evaluate(U: SymTensorField, v, w):
    """``U(v, w)`` at every node."""
    return np.einsum("...i,...ij,...j->...", v, U.comp, w)
