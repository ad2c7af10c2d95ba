"""Collar thickness and far-boundary convexity margin as delta shrinks.

Runs the convex construction with delta scaled by 1, 1/2, 1/4, ... and prints
s(t_end) together with min eig(Theta - theta0 / (2(n-1)) h) at the far end.
"""

import argparse
import json

from collar.config import RunConfig
from collar.pipeline import extend


def run(family="sphere_circle_warped", steps=4, resolution=16, params=None):
    base = RunConfig(family=family, resolution=resolution, oracle=False, audit_multiplier=1)
    if params:
        base = base.with_overrides(params=params)
    rows = []
    for k in range(steps):
        rep = extend(base.with_overrides(delta_scale=0.5**k))
        rows.append(
            {
                "scale": 0.5**k,
                "delta": rep.plan.delta,
                "thickness": rep.thickness,
                "alpha_end": float(rep.metric.alpha([rep.plan.t_end])[0][0]),
                "remark1_margin": rep.boundary["remark1_margin"],
                "min_R": rep.curvature["min_R"],
                "verdict": rep.verdict,
            }
        )
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="sphere_circle_warped", choices=["sphere_circle_warped", "conformal_torus"])
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--resolution", type=int, default=16)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = run(args.family, args.steps, args.resolution)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'scale':>8} {'delta':>12} {'s(t_end)':>12} {'alpha(t_end)':>13} {'margin':>12} {'min R':>10}")
    for r in rows:
        print(f"{r['scale']:8.4f} {r['delta']:12.6g} {r['thickness']:12.6g} {r['alpha_end']:13.6g} {r['remark1_margin']:12.6g} {r['min_R']:10.6g}")


if __name__ == "__main__":
    main()
