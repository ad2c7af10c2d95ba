"""End-to-end extension: jet -> constants -> warp -> collar -> verification.

The sampled constants are only a means to an end; every collar is accepted
on the strength of a direct curvature sweep.  When a sweep or any
intermediate stage fails, delta is halved and the whole chain reruns.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import tensors as tf
from .config import RunConfig
from .constants import SampleSpec, audit_bounds, estimate_constants, find_delta1_t1
from .constants import delta0 as compute_delta0
from .curvature import oracle_discrepancy, slice_scalar
from .errors import ArgumentError, CollarError, DenominatorVanished, NonConvergence, PositivityError
from .geometry import intrinsic_batch
from .jet import BoundaryJet, NegativeInitialCurvature, initial_scalar_curvature, mean_curvature_floor
from .metric import CollarMetric
from .profiles import ProfileSet
from .warp import WarpFactor, check_denominator, find_a0, match_tangency

log = logging.getLogger(__name__)

MAX_EPS_HALVINGS = 50


@dataclass(frozen=True)
class ExtensionPlan:
    """Every number that pins down one collar."""

    variant: str
    delta0: float
    delta1: float
    t1: float
    cbar0: float
    cbar1: float
    cbar2: float
    c1: float
    c2: float
    delta: float
    a0: float
    a: float
    b: float
    t_I: float
    t_plus: float
    eps: float | None
    eps_bar: float
    t_end: float


@dataclass
class ExtensionReport:
    variant: str
    verdict: str
    conditions: dict
    plan: ExtensionPlan
    curvature: dict
    boundary: dict
    junctions: dict
    thickness: float
    retries: int
    audit: dict
    initial: dict
    oracle: dict | None = None
    config: dict = field(default_factory=dict)
    curvature_field: object = field(default=None, repr=False)
    metric: object = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("curvature_field", "metric")}
        out["plan"] = asdict(self.plan)
        return _plain(out)


def _plain(obj):
    """Recursively convert numpy scalars and tuples for JSON output."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# checks


def junction_residuals(metric: CollarMetric):
    """Mismatch of ``(h, h', h'')`` at ``t = 0`` with the jet, and of ``alpha`` at ``t_I``."""
    h, hd, hdd = (a[0] for a in metric.path([0.0]))
    jet = metric.jet
    value, slope = metric.warp.match_residuals()
    a0, ad0 = metric.alpha(np.array([0.0]))
    return {
        "h": float(np.abs(h - jet.h0.comp).max()),
        "h_dot": float(np.abs(hd - jet.h0p.comp).max()),
        "h_ddot": float(np.abs(hdd - jet.h0pp.comp).max()),
        "alpha_at_0": float(abs(a0[0] - 1)),
        "alpha_dot_at_0": float(abs(ad0[0])),
        "alpha_value_at_tI": value,
        "alpha_slope_at_tI": slope,
    }


def boundary_summary(metric: CollarMetric, theta0: float):
    """Second fundamental form of the far boundary and the Remark-1 style margin."""
    t = metric.t_end
    Th = metric.second_fundamental_form(t)
    h = metric.slice_metric(t)
    lower = h * (theta0 / (2 * (metric.n - 1)))
    return {
        "t_end": float(t),
        "theta_min_eig": float(tf.min_eigenvalue(Th, h).min()),
        "theta_max_eig": float(tf.max_eigenvalue(Th, h).max()),
        "theta_max_abs": Th.max_abs(),
        "remark1_margin": float(tf.min_eigenvalue(Th - lower, h).min()),
    }


def fd_error_estimate(metric: CollarMetric, ts):
    """Richardson estimate of the finite-difference error of the slice curvature.

    Compares the 4th-order slice curvature on the grid with the one on every
    other node; the error of the fine value is about ``|fine - coarse| / 15``.
    Zero for node-independent jets, whose slices are exactly flat.
    """
    jet = metric.jet
    if jet.is_uniform():
        return 0.0, "uniform jet: intrinsic curvature exactly zero"
    if min(jet.grid.shape) < 16:
        return 0.0, "grid too coarse for a Richardson estimate"
    h = metric.path(ts)[0]
    fine = intrinsic_batch(h, jet.grid.spacing)
    sub = (slice(None),) + (slice(None, None, 2),) * jet.grid.dim
    coarse = intrinsic_batch(np.ascontiguousarray(h[sub]), tuple(2 * s for s in jet.grid.spacing))
    return float(np.abs(fine[sub] - coarse).max() / 15), "richardson: |R(dx) - R(2dx)| / 15"


def tolerance_R(metric, ts, base):
    est, model = fd_error_estimate(metric, ts)
    return base + 2 * est, {"base": base, "fd_estimate": est, "model": model, "formula": "base + 2 * fd_estimate"}


def _window(metric, lo, hi, n):
    ts = np.linspace(lo, hi, n)
    extra = [p for p in metric.junctions() if lo <= p <= hi]
    return np.unique(np.concatenate([ts, extra]))


def _sign_condition(variant, boundary, tol):
    if variant == "convex":
        return boundary["theta_min_eig"] > 0
    if variant == "geodesic":
        return boundary["theta_max_abs"] < tol.geodesic_theta
    return boundary["theta_max_eig"] < 0


# ---------------------------------------------------------------------------
# construction


def build_convex(jet: BoundaryJet, delta, bounds, spec: SampleSpec):
    """Constants, warp factor and convex collar for one value of delta."""
    consts = estimate_constants(jet, spec, delta_cap=delta, bounds=bounds)
    check_denominator(consts.c1, consts.c2, delta)
    profiles = ProfileSet(delta)
    a0 = find_a0(jet, profiles)
    a, b, t_I = match_tangency(a0, consts.c1, consts.c2, delta, t_end=profiles.t_plus)
    warp = WarpFactor(a, b, t_I, profiles.t_plus, delta, consts.c1, consts.c2)
    return consts, a0, CollarMetric(jet, profiles, warp, "convex")


def choose_epsilon(convex: CollarMetric, variant, tol_R=1e-8, n_t=128, accept=None, max_halvings=MAX_EPS_HALVINGS):
    """Bend parameters ``(eps, eps_bar)`` and the bent collar.

    ``eps`` halves from ``delta/4`` until the slice curvature on
    ``[3 delta, t_plus(eps)]`` is non-negative; for the concave variant
    ``eps_bar`` then halves from ``eps/4`` until ``H'`` is negative at the new
    end and the curvature stays non-negative up to it.  ``accept`` is an
    optional extra predicate on candidate collars.
    """
    if variant not in ("geodesic", "concave"):
        raise ArgumentError(f"choose_epsilon needs a bent variant, got {variant!r}")
    jet, warp = convex.jet, convex.warp
    delta = convex.profiles.delta
    ok = accept or (lambda m: True)

    def nonneg(m, lo):
        R = slice_scalar(m, _window(m, lo, m.t_end, n_t)).R
        return float(R.min()) >= -tol_R

    eps = delta / 4
    for _ in range(max_halvings):
        try:
            cand = CollarMetric(jet, ProfileSet(delta, eps), warp, "geodesic")
            good = nonneg(cand, 3 * delta) and ok(cand)
        except (ArgumentError, DenominatorVanished, PositivityError) as exc:
            log.debug("eps=%g rejected: %s", eps, exc)
            good = False
        if good:
            break
        eps /= 2
    else:
        raise NonConvergence(f"no admissible eps after {max_halvings} halvings", stage="choose_epsilon")
    if variant == "geodesic":
        return eps, 0.0, cand
    eps_bar = eps / 4
    for _ in range(max_halvings):
        try:
            profiles = ProfileSet(delta, eps, eps_bar)
            cand = CollarMetric(jet, profiles, warp, "concave")
            hd_end = cand.path([cand.t_end])[1][0]
            h_end = cand.path([cand.t_end])[0][0]
            inward = profiles.H(profiles.t_end)[1] < 0 and tf.max_eigenvalue(
                tf.SymTensorField(jet.grid, hd_end), tf.SymTensorField(jet.grid, h_end)
            ).max() < 0
            good = inward and nonneg(cand, 3 * delta) and ok(cand)
        except (ArgumentError, DenominatorVanished, PositivityError) as exc:
            log.debug("eps_bar=%g rejected: %s", eps_bar, exc)
            good = False
        if good:
            return eps, eps_bar, cand
        eps_bar /= 2
    raise NonConvergence(f"no admissible eps_bar after {max_halvings} halvings", stage="choose_epsilon")


def _plan(variant, consts, delta, a0, metric):
    w, p = metric.warp, metric.profiles
    return ExtensionPlan(
        variant=variant,
        delta0=consts.delta0,
        delta1=consts.delta1,
        t1=consts.t1,
        cbar0=consts.cbar0,
        cbar1=consts.cbar1,
        cbar2=consts.cbar2,
        c1=consts.c1,
        c2=consts.c2,
        delta=delta,
        a0=a0,
        a=w.a,
        b=w.b,
        t_I=w.t_I,
        t_plus=p.t_plus,
        eps=p.eps,
        eps_bar=p.eps_bar,
        t_end=p.t_end,
    )


def verify(metric: CollarMetric, cfg: RunConfig, theta0):
    """Direct checks of conditions I, II, III on one collar."""
    ts = metric.sample_times(cfg.t_samples)
    fld = slice_scalar(metric, ts)
    tol, model = tolerance_R(metric, ts, cfg.tolerances.R_abs)
    minR, t_at, node = fld.minimum()
    boundary = boundary_summary(metric, theta0)
    junctions = junction_residuals(metric)
    jet_res = max(junctions["h"], junctions["h_dot"], junctions["h_ddot"])
    warp_res = max(junctions["alpha_value_at_tI"], junctions["alpha_slope_at_tI"])
    conditions = {
        "I": bool(minR >= -tol),
        "II": bool(jet_res <= cfg.tolerances.junction and warp_res <= cfg.tolerances.match),
        "III": bool(_sign_condition(metric.variant, boundary, cfg.tolerances)),
    }
    if cfg.remark1_required:
        conditions["remark1"] = bool(boundary["remark1_margin"] > 0)
    curvature = {
        "min_R": minR,
        "argmin_t": t_at,
        "argmin_node": list(node),
        "tol_R": tol,
        "tol_model": model,
        "n_t": int(len(ts)),
        "summand_reassembly": fld.reassembly_residual(),
    }
    return conditions, curvature, boundary, junctions, fld


def extend(cfg: RunConfig, jet: BoundaryJet | None = None) -> ExtensionReport:
    """Build and verify a collar for the configured jet and variant.

    Raises :class:`MeanConvexityViolation` when the jet is not strictly mean
    convex and :class:`NonConvergence` when every retry failed.
    """
    jet = cfg.build_jet() if jet is None else jet
    theta0 = mean_curvature_floor(jet)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NegativeInitialCurvature)
        R0 = initial_scalar_curvature(jet)
    spec = SampleSpec(n_delta=cfg.n_delta, n_t=cfg.n_t, safety=cfg.safety)
    d0 = compute_delta0(jet)
    bounds = find_delta1_t1(jet, spec, d0)
    delta = min(d0, *bounds) / 4 * cfg.delta_scale
    failures = []
    for attempt in range(cfg.max_retries + 1):
        try:
            consts, a0, metric = build_convex(jet, delta, bounds, spec)
            if cfg.variant != "convex":
                _, _, metric = choose_epsilon(metric, cfg.variant, cfg.tolerances.R_abs)
            conditions, curvature, boundary, junctions, fld = verify(metric, cfg, theta0)
        except (DenominatorVanished, NonConvergence, PositivityError, ArgumentError) as exc:
            failures.append({"delta": delta, "stage": type(exc).__name__, "message": str(exc)})
            log.info("delta=%g failed in construction: %s", delta, exc)
            delta /= 2
            continue
        if all(conditions.values()):
            break
        failures.append({"delta": delta, "stage": "verify", "message": str(conditions)})
        log.info("delta=%g failed verification: %s", delta, conditions)
        delta /= 2
    else:
        raise NonConvergence(f"no verified collar after {cfg.max_retries} retries: {failures[-1]}", stage="extend")

    audit = audit_bounds(consts, jet, cfg.audit_multiplier)
    oracle = None
    if cfg.oracle:
        err, fld_o, orc = oracle_discrepancy(metric, cfg.oracle_t_samples)
        oracle = {"max_discrepancy": err, "n_t": int(len(orc.t)), "dtype": "longdouble"}
    report = ExtensionReport(
        variant=cfg.variant,
        verdict="pass" if all(conditions.values()) else "fail",
        conditions=conditions,
        plan=_plan(cfg.variant, consts, delta, a0, metric),
        curvature=curvature,
        boundary=boundary,
        junctions=junctions,
        thickness=float(metric.arclength(metric.t_end)),
        retries=attempt,
        audit=audit,
        initial={
            "theta0": theta0,
            "R0_min": float(R0.min()),
            "R0_negative_warning": bool(caught),
            "failures": failures,
        },
        oracle=oracle,
        config=cfg.to_dict(),
        curvature_field=fld,
        metric=metric,
    )
    return report


# ---------------------------------------------------------------------------
# ambient example catalog


def _classify(lo, hi, tol=1e-12):
    if max(abs(lo), abs(hi)) < tol:
        return "totally_geodesic"
    if lo > 0:
        return "convex"
    if hi < 0:
        return "concave"
    return "indefinite"


def sphere_circle_scalar(eps, r):
    """Closed-form scalar curvature of ``dr^2 + sin^2 r dphi^2 + (1 + eps cos 4r)^2 dtheta^2``."""
    f = 1 + eps * np.cos(4 * r)
    return 2 + 32 * eps * np.cos(4 * r) / f + 8 * eps * np.cos(r) * np.sin(4 * r) / (np.sin(r) * f)


def verify_examples(eps=0.01, radii=None, band=(0.1, 2 * np.pi / 3), n_r=257, resolution=8):
    """Second fundamental form type of the level sets ``r = const`` and ``min R`` on a band.

    Works on the ambient metric directly; no collar is constructed.
    """
    from .jet import sphere_circle_warped
    from .tensors import BoundaryGrid

    radii = radii or {"pi/6": np.pi / 6, "pi/3": np.pi / 3, "pi/2": np.pi / 2, "2pi/3": 2 * np.pi / 3}
    grid = BoundaryGrid.uniform(2, resolution)

    def jet_at(r):
        spec = sphere_circle_warped(eps, r)
        comps = spec.jet(grid.coords())
        fields = [tf.SymTensorField(grid, c) for c in comps]
        return BoundaryJet(grid, *fields, check=False)

    levels = {}
    for name, r in radii.items():
        jet = jet_at(r)
        Th = jet.h0p * 0.5
        lo = float(tf.min_eigenvalue(Th, jet.h0).min())
        hi = float(tf.max_eigenvalue(Th, jet.h0).max())
        levels[name] = {
            "r": float(r),
            "mean_curvature": float(0.5 * jet.mean_trace().min()),
            "theta_min_eig": lo,
            "theta_max_eig": hi,
            "theta_max_abs": Th.max_abs(),
            "type": _classify(lo, hi),
        }
    rs = np.linspace(band[0], band[1], n_r)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NegativeInitialCurvature)
        R = np.array([float(initial_scalar_curvature(jet_at(r)).min()) for r in rs])
    exact = sphere_circle_scalar(eps, rs)
    expected = {"pi/6": "indefinite", "pi/3": "convex", "pi/2": "totally_geodesic", "2pi/3": "concave"}
    table_ok = all(levels[k]["type"] == v for k, v in expected.items() if k in levels)
    mean_convex_start = levels.get("pi/6", {}).get("mean_curvature", 1.0) > 0
    return _plain(
        {
            "eps": eps,
            "levels": levels,
            "band": list(band),
            "min_R": float(R.min()),
            "argmin_r": float(rs[int(np.argmin(R))]),
            "closed_form_gap": float(np.abs(R - exact).max()),
            "passed": bool(table_ok and mean_convex_start and R.min() > 0),
        }
    )


__all__ = [
    "CollarError",
    "ExtensionPlan",
    "ExtensionReport",
    "boundary_summary",
    "build_convex",
    "choose_epsilon",
    "extend",
    "junction_residuals",
    "verify",
    "verify_examples",
]
