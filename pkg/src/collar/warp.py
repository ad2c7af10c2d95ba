"""The warp factor alpha(t) relating construction time t to normal distance s.

Near the boundary ``alpha_1 = 1 + a^2 t^2``; further out ``alpha_2`` solves
``alpha'/alpha = c1/delta + c2 alpha^2`` with ``alpha_2(b) = 1``.  The two are
glued C^1 at the point ``t_I`` where their graphs touch tangentially.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ArgumentError, DenominatorVanished, NonConvergence, TangencyAtEndpoint
from .geometry import intrinsic_batch, sce_summands
from .metric import path_arrays

log = logging.getLogger(__name__)

MATCH_TOL = 1e-9
BISECT_TOL = 1e-10
QUAD_TOL = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def alpha2_denominator(c1, c2, delta, b, t):
    K = c1 / delta
    return (K + c2) * np.exp(-2 * (t - b) * K) - c2


def alpha2_blowup(c1, c2, delta, b):
    """First time where the denominator of ``alpha_2`` vanishes (inf if never)."""
    if c2 <= 0:
        return np.inf
    K = c1 / delta
    return b + np.log((K + c2) / c2) / (2 * K)


def alpha2(c1, c2, delta, b, t):
    """``(alpha_2, alpha_2')`` at ``t >= b``; derivative from the explicit formula."""
    if not c1 > 0:
        raise ArgumentError(f"c1 must be positive, got {c1}")
    t = np.asarray(t)
    D = alpha2_denominator(c1, c2, delta, b, t)
    if np.any(D <= 0):
        raise DenominatorVanished(
            f"alpha_2 blows up at t = {alpha2_blowup(c1, c2, delta, b):.6g}",
            t=float(alpha2_blowup(c1, c2, delta, b)),
        )
    K = c1 / delta
    a = np.sqrt(K / D)
    # D' = -2K (D + c2), hence alpha' = alpha K (D + c2) / D
    return a, a * K * (D + c2) / D


def alpha1(a, t):
    t = np.asarray(t)
    return 1 + a * a * t * t, 2 * a * a * t


@dataclass(frozen=True)
class WarpFactor:
    a: float
    b: float
    t_I: float
    t_plus: float
    delta: float
    c1: float
    c2: float

    def __post_init__(self):
        if not (0 < self.b < self.t_I < 1 / self.a):
            raise ArgumentError(f"need 0 < b < t_I < 1/a, got b={self.b}, t_I={self.t_I}, 1/a={1 / self.a}")

    def alpha(self, t):
        """``(alpha, alpha')`` for an array of times."""
        t = np.asarray(t)
        inner = t <= self.t_I
        a1, d1 = alpha1(self.a, np.where(inner, t, 0))
        a2, d2 = alpha2(self.c1, self.c2, self.delta, self.b, np.where(inner, self.t_I, t))
        return np.where(inner, a1, a2), np.where(inner, d1, d2)

    def alpha_sq_excess(self, t):
        """``alpha^2 - 1`` without cancellation near ``t = 0`` and ``t = b``."""
        t = np.asarray(t)
        inner = t <= self.t_I
        ti = np.where(inner, t, 0)
        a2t2 = self.a * self.a * ti * ti
        K = self.c1 / self.delta
        to = np.where(inner, self.t_I, t)
        D = alpha2_denominator(self.c1, self.c2, self.delta, self.b, to)
        # alpha_2^2 = K / D, and K - D = -(K + c2) expm1(-2K(t - b))
        outer = -(K + self.c2) * np.expm1(-2 * K * (to - self.b)) / D
        return np.where(inner, a2t2 * (2 + a2t2), outer)

    def match_residuals(self):
        v1, s1 = alpha1(self.a, self.t_I)
        v2, s2 = alpha2(self.c1, self.c2, self.delta, self.b, self.t_I)
        return float(abs(v1 - v2)), float(abs(s1 - s2))

    def _integral(self, lo, hi, f):
        if hi <= lo:
            return 0.0
        m = max(1, int(np.ceil((hi - lo) / (self.delta / 8))))
        edges = np.linspace(lo, hi, m + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        return float(np.sum(half * _GL_W * f(mid + half * _GL_X)))

    def arclength(self, t):
        """``s(t) = int_0^t alpha`` by composite Gauss-Legendre per smooth piece."""
        if np.ndim(t):
            return np.array([self.arclength(float(x)) for x in np.ravel(t)]).reshape(np.shape(t))
        if t < 0:
            raise ArgumentError("t must be >= 0")
        s = self._integral(0.0, min(t, self.t_I), lambda x: alpha1(self.a, x)[0])
        s += self._integral(self.t_I, t, lambda x: alpha2(self.c1, self.c2, self.delta, self.b, x)[0])
        return s


def check_denominator(c1, c2, delta, t_end=None):
    """Positivity of ``alpha_2``'s denominator on the whole admissible range.

    With ``t_end = 4 delta`` and ``b >= 0`` this is ``(c1/delta) e^{-8 c1} - c2 > 0``.
    """
    t_end = 4 * delta if t_end is None else t_end
    worst = alpha2_denominator(c1, c2, delta, 0.0, t_end)
    if worst <= 0:
        raise DenominatorVanished(
            f"alpha_2 denominator {worst:.3e} <= 0 on [0, {t_end:.4g}]; delta too large",
            t=float(alpha2_blowup(c1, c2, delta, 0.0)),
        )
    return float(worst)


def alpha1_rhs(jet, profiles, a, n_t=64):
    """``alpha^2 R`` with ``alpha = alpha_1`` on ``n_t`` times in ``[0, 1/a]``."""
    t = np.linspace(0.0, 1.0 / a, n_t)
    h, hd, hdd = path_arrays(jet, profiles, t)
    calR = intrinsic_batch(h, jet.grid.spacing, uniform=jet.is_uniform())
    al, ad = alpha1(a, t)
    pad = (slice(None),) + (None,) * jet.grid.dim
    return sce_summands(h, hd, hdd, al[pad], ad[pad], calR).sum(axis=-1)


def find_a0(jet, profiles, n_t=64, max_doublings=60):
    """Smallest ``a = (4/delta)(1+1e-6) 2^k`` making ``alpha_1``'s slice curvature non-negative."""
    delta = profiles.delta
    a = 4 / delta * (1 + 1e-6)
    for k in range(max_doublings + 1):
        rhs = alpha1_rhs(jet, profiles, a, n_t)
        floor = -1e-12 * max(1.0, float(np.abs(rhs).max()))
        if rhs.min() >= floor:
            log.debug("a0 = %g after %d doublings (min rhs %g)", a, k, rhs.min())
            return a
        a *= 2
    raise NonConvergence(f"no a up to {a / 2:.3e} makes the alpha_1 collar non-negatively curved", stage="find_a0")


def alpha2_slope_bound(c1, c2, delta, t_end):
    """Uniform bound for ``alpha_2'`` over ``b`` in ``[0, delta/4]``, attained at ``b = 0``."""
    t = np.linspace(0.0, t_end, 513)
    return float(alpha2(c1, c2, delta, 0.0, t)[1].max())


def _gap(a, c1, c2, delta, b):
    """Minimum of ``alpha_1 - alpha_2(.; b)`` over ``[b, 1/a]`` and where it sits."""
    hi = 1.0 / a

    def D(t):
        return alpha1(a, t)[0] - alpha2(c1, c2, delta, b, t)[0]

    def dD(t):
        return alpha1(a, t)[1] - alpha2(c1, c2, delta, b, t)[1]

    ts = np.linspace(b, hi, 257)
    slope = dD(ts)
    cands = [b, hi]
    for i in np.nonzero((slope[:-1] < 0) & (slope[1:] >= 0))[0]:
        cands.append(brentq(dD, ts[i], ts[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400))
    vals = [float(D(t)) for t in cands]
    k = int(np.argmin(vals))
    return vals[k], cands[k]


def match_tangency(a, c1, c2, delta, t_end=None, max_steps=200):
    """Shift ``b`` until ``alpha_2(.; b)`` touches ``alpha_1`` from below.

    Returns ``(a, b, t_I)``; ``a`` is doubled first if ``2a`` does not exceed the
    uniform slope bound of ``alpha_2``.
    """
    t_end = 4 * delta if t_end is None else t_end
    bound = alpha2_slope_bound(c1, c2, delta, t_end)
    while 2 * a <= bound:
        a *= 2
        log.debug("inflated a to %g (slope bound %g)", a, bound)
    lo, hi = 0.0, min(delta / 4, 1.0 / a)
    m_hi, _ = _gap(a, c1, c2, delta, hi)
    if m_hi <= 0:
        raise NonConvergence("alpha_2 already crosses alpha_1 at b = 1/a", stage="match_tangency")
    best = None
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        m, t = _gap(a, c1, c2, delta, mid)
        if best is None or abs(m) < abs(best[0]):
            best = (m, mid, t)
        if m > 0:
            hi = mid
        else:
            lo = mid
    if best is None or abs(best[0]) > BISECT_TOL:
        raise NonConvergence(f"tangency bisection stalled at gap {best and best[0]}", stage="match_tangency")
    _, b, t_I = best
    if not (b < t_I < 1.0 / a) or t_I in (b, 1.0 / a):
        raise TangencyAtEndpoint(f"touching point t_I={t_I} is not interior to ({b}, {1 / a})")
    return a, b, t_I
