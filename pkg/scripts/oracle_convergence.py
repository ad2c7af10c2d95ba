"""Slice-formula versus full-metric curvature under simultaneous refinement.

Builds the collar once at the base resolution, then evaluates both engines on
the same plan with boundary grid and t-samples doubled at every level.
"""

import argparse
import time

import numpy as np

from collar.config import RunConfig
from collar.curvature import oracle_discrepancy
from collar.metric import CollarMetric
from collar.pipeline import extend


def study(cfg: RunConfig, levels=2):
    rep = extend(cfg.with_overrides(oracle=False))
    base = rep.metric
    rows = []
    for k in range(levels):
        res, n_t = cfg.resolution * 2**k, cfg.oracle_t_samples * 2**k
        jet = cfg.with_overrides(resolution=res).build_jet()
        metric = base if k == 0 else CollarMetric(jet, base.profiles, base.warp, base.variant)
        t0 = time.perf_counter()
        err, _, _ = oracle_discrepancy(metric, n_t)
        rows.append((res, n_t, err, time.perf_counter() - t0))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="sphere_circle_warped", choices=["sphere_circle_warped", "conformal_torus"])
    ap.add_argument("--variant", default="convex", choices=["convex", "geodesic", "concave"])
    ap.add_argument("--resolution", type=int, default=64)
    ap.add_argument("--t-samples", type=int, default=128)
    ap.add_argument("--levels", type=int, default=2)
    args = ap.parse_args()
    cfg = RunConfig(family=args.family, variant=args.variant, resolution=args.resolution, oracle_t_samples=args.t_samples)
    if args.family == "conformal_torus":
        cfg = cfg.with_overrides(params={"amplitude": 0.1})
    rows = study(cfg, args.levels)
    prev = None
    for res, n_t, err, secs in rows:
        order = "" if prev is None else f"  order {np.log2(prev / err):.3f}"
        print(f"N = {res:4d}  n_t = {n_t:4d}  max |R_slice - R_oracle| = {err:.4e}  ({secs:.1f} s){order}")
        prev = err


if __name__ == "__main__":
    main()
