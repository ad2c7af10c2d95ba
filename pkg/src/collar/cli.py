"""Command line interface.

Exit codes: 0 pass, 1 internal failure or FAIL verdict, 2 hypothesis
violation (input not strictly mean convex), 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .curvature import oracle_discrepancy
from .errors import ArgumentError, CollarError, MeanConvexityViolation, NonConvergence
from .metric import VARIANTS

EXIT_PASS, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_NONCONVERGENCE = 0, 1, 2, 3

log = logging.getLogger("collar")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed separators, repr-exact floats."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def render_text(doc: dict) -> str:
    """Short human summary of a report dictionary."""
    if "levels" in doc:
        lines = [f"example catalog (eps = {doc['eps']}): {'PASS' if doc['passed'] else 'FAIL'}"]
        for name, lv in doc["levels"].items():
            lines.append(f"  r = {name:6s} {lv['type']:17s} theta eig in [{lv['theta_min_eig']:+.4e}, {lv['theta_max_eig']:+.4e}]")
        lines.append(f"  min R on [{doc['band'][0]:.3g}, {doc['band'][1]:.4g}] = {doc['min_R']:.6f} at r = {doc['argmin_r']:.4f}")
        return "\n".join(lines) + "\n"
    if "error" in doc:
        return f"{doc['error']['type']}: {doc['error']['message']}\n"
    p, c, b = doc["plan"], doc["curvature"], doc["boundary"]
    lines = [
        f"variant {doc['variant']}: {doc['verdict'].upper()}",
        "  conditions " + ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in doc["conditions"].items()),
        f"  delta = {p['delta']:.6g}  a = {p['a']:.6g}  b = {p['b']:.6g}  t_I = {p['t_I']:.6g}  t_end = {p['t_end']:.6g}",
        f"  c1 = {p['c1']:.6g}  c2 = {p['c2']:.6g}  eps = {p['eps']}  eps_bar = {p['eps_bar']}",
        f"  min R = {c['min_R']:.6g} (tol {c['tol_R']:.3g}) at t = {c['argmin_t']:.6g}",
        f"  Theta(t_end) eig in [{b['theta_min_eig']:.4e}, {b['theta_max_eig']:.4e}], remark-1 margin {b['remark1_margin']:.4e}",
        f"  thickness s(t_end) = {doc['thickness']:.6g}, retries = {doc['retries']}",
    ]
    if doc.get("oracle"):
        lines.append(f"  oracle max |R_slice - R_oracle| = {doc['oracle']['max_discrepancy']:.3e}")
    return "\n".join(lines) + "\n"


def _write(out_dir, name, text):
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / name
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ArgumentError(f"cannot write {out / name}: {exc}") from exc
    return path


def report_emit(report, fmt, out_dir=None, curvature_field=None):
    """Serialize a report (dict or ExtensionReport) and return the written path or text."""
    doc = report if isinstance(report, dict) else report.to_dict()
    if fmt == "json":
        text, name = dumps(doc), "report.json"
    elif fmt == "text":
        text, name = render_text(doc), "report.txt"
    elif fmt == "csv":
        fld = curvature_field if curvature_field is not None else getattr(report, "curvature_field", None)
        if fld is None:
            raise ArgumentError("csv output needs a curvature field")
        text, name = fld.to_csv(), "curvature.csv"
    else:
        raise ArgumentError(f"unknown format {fmt!r}")
    if out_dir is None:
        return text
    return _write(out_dir, name, text)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    return cfg.with_overrides(
        variant=getattr(args, "variant", None),
        resolution=getattr(args, "resolution", None),
        audit_multiplier=getattr(args, "seed_audit", None),
        out_dir=getattr(args, "out", None),
        out_format=getattr(args, "format", None),
    )


def cmd_extend(args):
    from .pipeline import extend

    cfg = _config(args)
    report = extend(cfg)
    _emit(report, cfg, args)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _show(out):
    """Print a written path, or the rendered text itself."""
    if isinstance(out, Path):
        print(out)
    else:
        sys.stdout.write(out)


def _emit(report, cfg, args):
    _show(report_emit(report, cfg.out_format, cfg.out_dir))


def cmd_verify_examples(args):
    from .pipeline import verify_examples

    doc = verify_examples()
    fmt = args.format or "json"
    if fmt == "csv":
        raise ArgumentError("verify-examples supports json and text output")
    _show(report_emit(doc, fmt, args.out))
    return EXIT_PASS if doc["passed"] else EXIT_FAIL


def cmd_curvature_oracle(args):
    from .pipeline import extend

    cfg = _config(args).with_overrides(oracle=False)
    report = extend(cfg)
    metric = report.metric
    levels = [(cfg.resolution, cfg.oracle_t_samples)]
    if args.refine:
        levels.append((2 * cfg.resolution, 2 * cfg.oracle_t_samples))
    rows, fld = [], None
    for res, n_t in levels:
        m = metric if res == cfg.resolution else _refined(metric, cfg.with_overrides(resolution=res))
        err, f, _ = oracle_discrepancy(m, n_t)
        fld = f if fld is None else fld
        rows.append({"resolution": res, "n_t": n_t, "max_discrepancy": err})
    doc = {"variant": cfg.variant, "levels": rows}
    if len(rows) == 2:
        doc["observed_order"] = float(np.log2(rows[0]["max_discrepancy"] / rows[1]["max_discrepancy"]))
    fmt = cfg.out_format
    if fmt == "csv":
        out = report_emit(doc, "csv", args.out, curvature_field=fld)
    elif fmt == "text":
        text = "".join(f"N = {r['resolution']:4d}  n_t = {r['n_t']:4d}  max |dR| = {r['max_discrepancy']:.4e}\n" for r in rows)
        if "observed_order" in doc:
            text += f"observed order {doc['observed_order']:.3f}\n"
        out = _write(args.out, "oracle.txt", text) if args.out else text
    else:
        out = _write(args.out, "oracle.json", dumps(doc)) if args.out else dumps(doc)
    _show(out)
    return EXIT_PASS


def _refined(metric, cfg):
    """Same plan and warp on a finer boundary grid."""
    from .metric import CollarMetric

    return CollarMetric(cfg.build_jet(), metric.profiles, metric.warp, metric.variant)


def cmd_report(args):
    try:
        doc = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArgumentError(f"cannot read report {args.input}: {exc}") from exc
    fmt = args.format or "text"
    if fmt == "csv":
        raise ArgumentError("the report command renders json or text")
    out = report_emit(doc, fmt, args.out)
    _show(out)
    verdict = doc.get("verdict", "pass" if doc.get("passed") else "fail")
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="collar", description="Collar extensions with non-negative scalar curvature.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, variant=True):
        p.add_argument("--config", help="TOML run configuration")
        if variant:
            p.add_argument("--variant", choices=VARIANTS)
        p.add_argument("--resolution", type=int, help="grid nodes per boundary axis")
        p.add_argument("--out", help="output directory (stdout when omitted)")
        p.add_argument("--format", choices=("json", "csv", "text"))
        p.add_argument("--seed-audit", type=int, metavar="K", help="audit resolution multiplier")

    p = sub.add_parser("extend", help="build and verify a collar")
    common(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("verify-examples", help="check the ambient S^2 x S^1 example")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.set_defaults(func=cmd_verify_examples)

    p = sub.add_parser("curvature-oracle", help="compare the slice formula with the full-metric oracle")
    common(p)
    p.add_argument("--refine", action="store_true", help="also run at doubled resolution and report the order")
    p.set_defaults(func=cmd_curvature_oracle)

    p = sub.add_parser("report", help="render a saved JSON report")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.set_defaults(func=cmd_report)
    return parser


def _error_doc(exc, code):
    doc = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    for key in ("node", "value", "stage"):
        val = getattr(exc, key, None)
        if val is not None:
            doc["error"][key] = list(val) if isinstance(val, tuple) else val
    return doc


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CollarError, ValueError) as exc:
        if isinstance(exc, MeanConvexityViolation):
            code = EXIT_HYPOTHESIS
        elif isinstance(exc, NonConvergence):
            code = EXIT_NONCONVERGENCE
        else:
            code = EXIT_FAIL
        sys.stdout.write(dumps(_error_doc(exc, code)))
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
