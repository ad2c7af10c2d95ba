import json

import numpy as np
import pytest

from collar.config import RunConfig
from collar.errors import ArgumentError, MeanConvexityViolation
from collar.pipeline import (
    boundary_summary,
    choose_epsilon,
    extend,
    fd_error_estimate,
    junction_residuals,
    sphere_circle_scalar,
    tolerance_R,
    verify_examples,
)

FAST = RunConfig(resolution=16, oracle=False, audit_multiplier=1)
TORUS = FAST.with_overrides(family="conformal_torus", params={"amplitude": 0.1, "rate": 2.0})


@pytest.fixture(scope="module")
def reports():
    return {(cfg.family, v): extend(cfg.with_overrides(variant=v)) for cfg in (FAST, TORUS) for v in ("convex", "geodesic", "concave")}


def test_junction_residuals(sphere_convex16):
    res = junction_residuals(sphere_convex16)
    assert max(res["h"], res["h_dot"], res["h_ddot"]) <= 1e-12
    assert res["alpha_at_0"] == 0 and res["alpha_dot_at_0"] == 0
    assert max(res["alpha_value_at_tI"], res["alpha_slope_at_tI"]) <= 1e-9


def test_boundary_summary_convex(sphere_convex16):
    b = boundary_summary(sphere_convex16, 0.5)
    assert b["t_end"] == sphere_convex16.t_end
    assert b["theta_min_eig"] > b["remark1_margin"] > 0


def test_choose_epsilon_continues_after_rejection(sphere_convex16):
    eps, eps_bar, m = choose_epsilon(sphere_convex16, "geodesic")
    assert eps_bar == 0 and m.variant == "geodesic"
    forced, _, m2 = choose_epsilon(sphere_convex16, "geodesic", accept=lambda c: c.profiles.eps < eps)
    assert forced == eps / 2
    assert m2.profiles.eps == forced


def test_choose_epsilon_concave_turns_inward(sphere_convex16):
    eps, eps_bar, m = choose_epsilon(sphere_convex16, "concave")
    assert 0 < eps_bar <= eps / 4
    assert m.profiles.T(m.t_end)[1] < 0


def test_choose_epsilon_needs_bent_variant(sphere_convex16):
    with pytest.raises(ArgumentError):
        choose_epsilon(sphere_convex16, "convex")


@pytest.mark.parametrize("family", ["sphere_circle_warped", "conformal_torus"])
@pytest.mark.parametrize("variant", ["convex", "geodesic", "concave"])
def test_extend_passes(reports, family, variant):
    rep = reports[(family, variant)]
    assert rep.passed, rep.conditions
    assert rep.curvature["min_R"] >= -rep.curvature["tol_R"]
    assert rep.curvature["summand_reassembly"] <= 1e-12
    assert rep.audit["passed"]
    b = rep.boundary
    if variant == "convex":
        assert b["theta_min_eig"] > 0 and b["remark1_margin"] > 0
    elif variant == "geodesic":
        assert b["theta_max_abs"] < 1e-8
    else:
        assert b["theta_max_eig"] < 0


def test_report_serializes(reports):
    doc = reports[("conformal_torus", "concave")].to_dict()
    text = json.dumps(doc, sort_keys=True)
    assert json.loads(text)["verdict"] == "pass"
    assert "metric" not in doc and "curvature_field" not in doc
    assert doc["plan"]["eps_bar"] > 0


def test_torus_tolerance_uses_richardson(reports):
    tol = reports[("conformal_torus", "convex")].curvature["tol_model"]
    assert tol["fd_estimate"] > 0 and tol["model"].startswith("richardson")
    sphere = reports[("sphere_circle_warped", "convex")].curvature
    assert sphere["tol_R"] == FAST.tolerances.R_abs


def test_tolerance_helpers(sphere_convex16):
    ts = sphere_convex16.sample_times(16)
    est, model = fd_error_estimate(sphere_convex16, ts)
    assert est == 0 and "uniform" in model
    tol, info = tolerance_R(sphere_convex16, ts, 1e-8)
    assert tol == 1e-8 and info["base"] == 1e-8


def test_flat_product_rejected():
    with pytest.raises(MeanConvexityViolation):
        extend(FAST.with_overrides(family="flat_product", params={"length": 1.0}))


def test_thickness_shrinks_with_delta():
    a = extend(FAST)
    b = extend(FAST.with_overrides(delta_scale=0.5))
    assert b.plan.delta == pytest.approx(a.plan.delta / 2)
    assert b.thickness < a.thickness


def test_example_catalog():
    doc = verify_examples(n_r=65)
    types = {k: v["type"] for k, v in doc["levels"].items()}
    assert types == {"pi/6": "indefinite", "pi/3": "convex", "pi/2": "totally_geodesic", "2pi/3": "concave"}
    assert doc["levels"]["pi/2"]["theta_max_abs"] < 1e-12
    assert doc["min_R"] > 0 and doc["passed"]
    assert doc["closed_form_gap"] < 1e-12


def test_closed_form_scalar_curvature_round_limit():
    r = np.linspace(0.2, 2.9, 7)
    np.testing.assert_allclose(sphere_circle_scalar(0.0, r), 2.0)
