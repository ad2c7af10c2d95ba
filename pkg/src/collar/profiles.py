"""Closed-form cutoff profiles F, G and the bending profile H.

F and G are C^2 functions of ``t >= 0`` whose second derivatives are
piecewise linear with breaks at ``delta/4, 3delta/4, 5delta/4, 7delta/4``.
They are integrated exactly, segment by segment, into local polynomials.
H replaces the linear factor ``t`` of the mean-curvature term when the far
boundary must be totally geodesic or concave.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ArgumentError, InternalConsistencyError

JUNCTION_TOL = 1e-10


class PiecewiseC2:
    """C^2 function built from piecewise-polynomial second derivatives.

    ``breaks`` are the left endpoints of the segments (the first one is 0); the
    last segment extends to infinity.  ``second[k]`` holds coefficients, in the
    local variable ``u = t - breaks[k]``, of the second derivative on segment k.
    ``tail`` fixes the value of a constant last segment.
    """

    def __init__(self, breaks, second, value0, slope0, tail=None):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coefs = []
        v, s = float(value0), float(slope0)
        for k, c2 in enumerate(second):
            if tail is not None and k == len(second) - 1:
                # closed-form constant tail; junction_residual checks the integration lands on it
                v, s = float(tail), 0.0
            c1 = P.polyint(c2, k=s)
            c0 = P.polyint(c1, k=v)
            self.coefs.append((np.asarray(c0), np.asarray(c1), np.asarray(c2, dtype=float)))
            if k + 1 < len(second):
                u = self.breaks[k + 1] - self.breaks[k]
                v, s = P.polyval(u, c0), P.polyval(u, c1)

    def __call__(self, t):
        t = np.asarray(t)
        if t.dtype.kind != "f":
            t = t.astype(float)
        if np.any(t < 0):
            raise ArgumentError("profiles are defined for t >= 0")
        seg = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.coefs) - 1)
        out = [np.zeros_like(t) for _ in range(3)]
        for k, cs in enumerate(self.coefs):
            m = seg == k
            if not np.any(m):
                continue
            u = t[m] - self.breaks[k]
            for j in range(3):
                out[j][m] = P.polyval(u, cs[j])
        if t.ndim == 0:
            return tuple(o[()] for o in out)
        return tuple(out)

    def one_sided(self, k, t):
        """Evaluate segment ``k``'s formulas at ``t`` (no segment lookup)."""
        u = t - self.breaks[k]
        return tuple(float(P.polyval(u, c)) for c in self.coefs[k])

    def junction_residual(self):
        """Largest jump of value, slope or second derivative across a break."""
        jumps = [0.0]
        for k in range(1, len(self.coefs)):
            left = self.one_sided(k - 1, self.breaks[k])
            right = self.one_sided(k, self.breaks[k])
            jumps += [abs(a - b) for a, b in zip(left, right)]
        return max(jumps)


def _check_delta(delta):
    if not (np.isfinite(delta) and delta > 0):
        raise ArgumentError(f"delta must be positive, got {delta}")


def make_F(delta):
    _check_delta(delta)
    d = delta
    breaks = [0.0, d / 4, 3 * d / 4, 5 * d / 4, 7 * d / 4]
    second = [[0.0], [0.0, -2 / d**2], [-1 / d], [-1 / d, 2 / d**2], [0.0]]
    return PiecewiseC2(breaks, second, 0.0, 1.0, tail=d)


def make_G(delta):
    _check_delta(delta)
    d = delta
    breaks = [0.0, d / 4, 5 * d / 4, 7 * d / 4]
    second = [[1.0], [1.0, -2 / d], [-1.0, 2 / d], [0.0]]
    return PiecewiseC2(breaks, second, 0.0, 0.0, tail=47 / 96 * d * d)


def eval_F(delta, t):
    """``(F, F', F'')`` at ``t``."""
    return make_F(delta)(t)


def eval_G(delta, t):
    """``(G, G', G'')`` at ``t``."""
    return make_G(delta)(t)


@dataclass(frozen=True)
class BendProfile:
    """The C^2 profile H(t) that flattens the mean-curvature term.

    Equal to ``t`` on ``[0, 3 delta]``, a cubic on ``[3 delta, 3 delta + eps]``
    and a harmonic oscillation ``H'' = -H / sqrt(eps)`` afterwards, whose first
    zero of ``H'`` defines ``t_plus``.
    """

    delta: float
    eps: float
    t_max: float | None = None
    H_eps: float = field(init=False)
    Hd_eps: float = field(init=False)
    Hdd_eps: float = field(init=False)
    t_plus: float = field(init=False)

    def __post_init__(self):
        _check_delta(self.delta)
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise ArgumentError(f"eps must be positive, got {self.eps}")
        d, e = self.delta, self.eps
        H_eps = (3 * d + e) / (1 + e**1.5 / 6)
        Hd_eps = 1 - 0.5 * np.sqrt(e) * H_eps
        Hdd_eps = -H_eps / np.sqrt(e)
        if Hd_eps <= 0:
            raise ArgumentError(f"eps={e} too large: H' would turn negative before 3delta+eps")
        q = e**0.25
        t_plus = 3 * d + e + q * np.arctan(Hd_eps * q / H_eps)
        object.__setattr__(self, "H_eps", float(H_eps))
        object.__setattr__(self, "Hd_eps", float(Hd_eps))
        object.__setattr__(self, "Hdd_eps", float(Hdd_eps))
        object.__setattr__(self, "t_plus", float(t_plus))
        if self.t_max is None:
            object.__setattr__(self, "t_max", float(t_plus))
        self._check_junctions()

    @property
    def junctions(self):
        return (3 * self.delta, 3 * self.delta + self.eps)

    def _cubic(self, t, u=None):
        # u = t - 3 delta; junction checks pass it exactly
        u = t - 3 * self.delta if u is None else u
        c = self.Hdd_eps / (6 * self.eps)
        return c * u**3 + t, 3 * c * u**2 + 1.0, 6 * c * u

    def _trig(self, t, w=None):
        q = self.eps**0.25
        w = (t - 3 * self.delta - self.eps) / q if w is None else w
        s, co = np.sin(w), np.cos(w)
        H = q * self.Hd_eps * s + self.H_eps * co
        Hd = self.Hd_eps * co - (self.H_eps / q) * s
        Hdd = -H / np.sqrt(self.eps)
        return H, Hd, Hdd

    def _check_junctions(self):
        t0, t1 = self.junctions
        pairs = [((t0, 1.0, 0.0), self._cubic(t0, 0.0)), (self._cubic(t1, self.eps), self._trig(t1, 0.0))]
        for left, right in pairs:
            for a, b in zip(left, right):
                if abs(float(a) - float(b)) > JUNCTION_TOL * max(1.0, abs(float(a)), 1 / np.sqrt(self.eps)):
                    raise InternalConsistencyError(f"H is not C^2 at a junction: {left} vs {right}")
        Hd_plus = self._trig(self.t_plus)[1]
        if abs(Hd_plus) > 1e-12:
            raise InternalConsistencyError(f"H'(t_plus) = {Hd_plus} is not zero")

    def junction_residual(self):
        """Largest jump of ``(H, H', H'')`` across ``3 delta`` and ``3 delta + eps``."""
        t0, t1 = self.junctions
        pairs = [((t0, 1.0, 0.0), self._cubic(t0, 0.0)), (self._cubic(t1, self.eps), self._trig(t1, 0.0))]
        return max(abs(float(a) - float(b)) for left, right in pairs for a, b in zip(left, right))

    def __call__(self, t):
        t = np.asarray(t)
        if t.dtype.kind != "f":
            t = t.astype(float)
        slack = 1e-12 * max(1.0, self.t_max)
        if np.any(t < 0) or np.any(t > self.t_max + slack):
            raise ArgumentError(f"H is defined on [0, {self.t_max}]")
        t0, t1 = self.junctions
        out = [np.array(t, copy=True), np.ones_like(t), np.zeros_like(t)]
        m = (t > t0) & (t <= t1)
        if np.any(m):
            for o, v in zip(out, self._cubic(t[m])):
                o[m] = v
        m = t > t1
        if np.any(m):
            for o, v in zip(out, self._trig(t[m])):
                o[m] = v
        # the analytic zero of H' at t_plus, free of rounding
        out[1][t == self.t_plus] = 0.0
        if t.ndim == 0:
            return tuple(o[()] for o in out)
        return tuple(out)


def eval_H(delta, eps, t):
    """``(H, H', H'')`` at ``t`` in ``[0, t_plus]``."""
    return BendProfile(delta, eps)(t)


@dataclass(frozen=True)
class ProfileSet:
    """All profiles used by one collar.

    ``eps`` is ``None`` for the convex construction (the mean-curvature factor
    is ``t`` itself); otherwise the factor is the bend profile H, evaluated up
    to ``t_plus + eps_bar``.
    """

    delta: float
    eps: float | None = None
    eps_bar: float = 0.0
    F: PiecewiseC2 = field(init=False, repr=False)
    G: PiecewiseC2 = field(init=False, repr=False)
    H: BendProfile | None = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "F", make_F(self.delta))
        object.__setattr__(self, "G", make_G(self.delta))
        if self.eps is None:
            if self.eps_bar:
                raise ArgumentError("eps_bar requires eps")
            object.__setattr__(self, "H", None)
        else:
            if self.eps_bar < 0:
                raise ArgumentError("eps_bar must be >= 0")
            bp = BendProfile(self.delta, self.eps)
            if self.eps_bar:
                bp = BendProfile(self.delta, self.eps, t_max=bp.t_plus + self.eps_bar)
            object.__setattr__(self, "H", bp)

    @property
    def t_plus(self) -> float:
        return 4 * self.delta if self.H is None else self.H.t_plus

    @property
    def t_end(self) -> float:
        return self.t_plus + self.eps_bar

    def T(self, t):
        """Mean-curvature factor and its derivatives."""
        if self.H is None:
            t = np.asarray(t)
            if t.dtype.kind != "f":
                t = t.astype(float)
            return t, np.ones_like(t), np.zeros_like(t)
        return self.H(t)

    def junctions(self):
        d = self.delta
        pts = [d / 4, 3 * d / 4, 5 * d / 4, 7 * d / 4]
        if self.H is not None:
            pts += list(self.H.junctions)
        return sorted(p for p in pts if p < self.t_end)
