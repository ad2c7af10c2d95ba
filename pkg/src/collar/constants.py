"""Sampled curvature bounds for the family h(delta, t).

The existence argument only asserts that suitable constants exist.  Here they
are measured: the three bounds are sampled on a (delta, t, node) lattice and
inflated by a safety factor; :func:`audit_bounds` re-checks them on a finer
lattice.  The final curvature verification remains the real guarantee.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import tensors as tf
from .errors import AuditFailure, MeanConvexityViolation, NonConvergence
from .geometry import intrinsic_batch
from .jet import MEAN_CONVEX_FLOOR, BoundaryJet
from .metric import path_arrays
from .profiles import ProfileSet


@dataclass(frozen=True)
class SampleSpec:
    n_delta: int = 16
    n_t: int = 32
    safety: float = 1.25
    delta_ratio: float = 2.0**-6
    max_halvings: int = 40


@dataclass(frozen=True)
class PropositionConstants:
    delta0: float
    delta1: float
    t1: float
    cbar0: float
    cbar1: float
    cbar2: float
    c1: float
    c2: float
    delta_hi: float
    safety: float
    samples: tuple[int, int]
    argmax: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return asdict(self)


def delta0(jet: BoundaryJet) -> float:
    """Largest ``delta <= 1`` with ``delta |S|_0 + delta^2 |h0''|_0 <= 1/2`` at every node."""
    p = np.sqrt(tf.norm_h(jet.shear(), jet.h0))
    q = np.sqrt(tf.norm_h(jet.h0pp, jet.h0))
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(q > 0, (-p + np.sqrt(p * p + 2 * q)) / (2 * q), np.where(p > 0, 0.5 / p, np.inf))
    return float(min(1.0, root.min()))


def _delta_samples(hi, spec):
    return hi * np.geomspace(spec.delta_ratio, 1.0, spec.n_delta)


def _sweep(jet, deltas, t1, n_t, need_curvature):
    """Per-(delta, t, node) E1 margin, E2 magnitude and intrinsic curvature."""
    ts = np.linspace(0.0, t1, n_t)
    half_tr = 0.5 * jet.mean_trace()
    e1 = np.empty((len(deltas), n_t) + jet.grid.shape)
    e2 = np.empty_like(e1)
    R = np.zeros_like(e1)
    for i, d in enumerate(deltas):
        h, hd, hdd = path_arrays(jet, ProfileSet(float(d)), ts)
        tf.assert_positive_definite(h, f"h(delta={d:.4g}, t)")
        hinv = tf.inverse(h)
        tr1 = tf.trace_raw(hd, hinv)
        e1[i] = tr1 - half_tr
        e2[i] = np.abs(tf.trace_raw(hdd, hinv) - 0.75 * tf.inner_raw(hd, hd, hinv) + 0.25 * tr1**2)
        if need_curvature:
            R[i] = intrinsic_batch(h, jet.grid.spacing, uniform=jet.is_uniform())
    return ts, e1, e2, R


def _where(arr, deltas, ts, fn=np.argmin):
    idx = np.unravel_index(int(fn(arr)), arr.shape)
    return {"delta": float(deltas[idx[0]]), "t": float(ts[idx[1]]), "node": [int(i) for i in idx[2:]]}


def find_delta1_t1(jet, spec: SampleSpec, d0=None):
    """Halve ``(delta1, t1)`` from ``(delta0, 1)`` until the trace bound holds on the lattice."""
    d1 = delta0(jet) if d0 is None else d0
    t1 = 1.0
    for _ in range(spec.max_halvings):
        deltas = _delta_samples(d1, spec)
        ts, e1, _, _ = _sweep(jet, deltas, t1, spec.n_t, need_curvature=False)
        if e1.min() >= 0:
            return d1, t1
        where = _where(e1, deltas, ts)
        # shrink whichever parameter the worst violation sits high in
        if where["t"] > t1 / 2:
            t1 /= 2
        elif where["delta"] > d1 / 2:
            d1 /= 2
        else:
            t1 /= 2
            d1 /= 2
    raise NonConvergence("trace bound still violated after halving", stage="estimate_constants")


def estimate_constants(jet: BoundaryJet, spec: SampleSpec = SampleSpec(), delta_cap=None, bounds=None) -> PropositionConstants:
    """Measure the bounds on ``delta in (0, min(delta1, delta_cap)]``, ``t in [0, t1]``.

    ``bounds`` may carry a previously found ``(delta1, t1)`` to skip the search.
    """
    half_tr = 0.5 * jet.mean_trace()
    cbar0 = float(half_tr.min())
    if not cbar0 > MEAN_CONVEX_FLOOR / 2:
        raise MeanConvexityViolation(f"min tr_h0 h0' / 2 = {cbar0:.6g} <= 0", value=cbar0)
    d0 = delta0(jet)
    d1, t1 = find_delta1_t1(jet, spec, d0) if bounds is None else bounds
    hi = d1 if delta_cap is None else min(d1, float(delta_cap))
    deltas = _delta_samples(hi, spec)
    ts, e1, e2, R = _sweep(jet, deltas, t1, spec.n_t, need_curvature=True)
    scaled = e2 * deltas.reshape(-1, *([1] * (e2.ndim - 1)))
    cbar1 = spec.safety * float(scaled.max())
    cbar2 = spec.safety * max(0.0, -float(R.min()))
    return PropositionConstants(
        delta0=d0,
        delta1=d1,
        t1=t1,
        cbar0=cbar0,
        cbar1=cbar1,
        cbar2=cbar2,
        c1=cbar1 / cbar0,
        c2=cbar2 / cbar0,
        delta_hi=hi,
        safety=spec.safety,
        samples=(spec.n_delta, spec.n_t),
        argmax={
            "E1_min_margin": _where(e1, deltas, ts),
            "E2_max": _where(scaled, deltas, ts, np.argmax),
            "E3_min_curvature": _where(R, deltas, ts),
        },
    )


def audit_bounds(consts: PropositionConstants, jet: BoundaryJet, multiplier=4):
    """Worst margins of the three bounds on a ``multiplier``-times finer lattice."""
    spec = SampleSpec(n_delta=consts.samples[0] * multiplier, n_t=consts.samples[1] * multiplier)
    deltas = _delta_samples(consts.delta_hi, spec)
    ts, e1, e2, R = _sweep(jet, deltas, consts.t1, spec.n_t, need_curvature=True)
    dshape = deltas.reshape(-1, *([1] * (e2.ndim - 1)))
    m2 = consts.cbar1 / dshape - e2
    m3 = R + consts.cbar2
    report = {
        "multiplier": int(multiplier),
        "samples": [spec.n_delta, spec.n_t],
        "E1_margin": float(e1.min()),
        "E2_margin": float(m2.min()),
        "E3_margin": float(m3.min()),
        "E1_where": _where(e1, deltas, ts),
        "E2_where": _where(m2, deltas, ts),
        "E3_where": _where(m3, deltas, ts),
    }
    for key in ("E1", "E2", "E3"):
        if report[f"{key}_margin"] < 0:
            raise AuditFailure(f"bound {key} violated by {-report[key + '_margin']:.3e} at {report[key + '_where']}", where=report[f"{key}_where"])
    report["passed"] = True
    return report
