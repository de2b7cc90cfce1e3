"""``eislab`` command-line front end."""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .config import LabConfig, load_config
from .eisenstein import build_context, trace_along
from .errors import EislabError, InsufficientDataError
from .hyperbolic import geodesic_from_endpoints
from .nodal import count_nodal_domains, eval_field, extract_nodal_lines
from .output import OutputSet, render_field_svg
from .regions import region_boundary
from .restriction import (
    SAMPLES_PER_HALF_WAVE,
    default_samples,
    equidist_check,
    jensen_bound,
    locate_sign_changes,
    period_sup,
)
from .schottky import build_group, clear_interval, estimate_delta, xi_admissible, xi_ns_certificate

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3
VALIDATION_KINDS = {"schema", "schottky_violation", "xi_in_limit_set", "non_hyperbolic",
                    "invalid_isometry", "degenerate_geodesic", "domain_error"}

EPILOG = """\
output files (every file ends with a '# key=value ...' footer echoing the
config sha256, truncation length L, grid/sampling parameters and version;
floats use 17 significant digits):

  field_<lambda>.csv   x, y      grid node (disc coordinates)
                       F         F_lambda at the node (nan outside the region)
                       mask      1 if the node lies in the region
  field_<lambda>.svg   sign map, nodal polylines, region boundary
  count.csv            lambda        spectral parameter
                       n_samples     samples of the trace on [-r0, r0]
                       sign_changes  sign changes of F_lambda along the chart
                       jensen_bound  Jensen upper bound on zeros in [-r0, r0]
  equidist.csv         lambda, lhs = int F^2 phi dr, rhs = 1/2 int E1 phi dr,
                       gap = |lhs - rhs| / rhs
  period.csv           lambda, sup_abs_integral = sup over [a,b] in J of
                       |int_a^b F dr|, lambda_times_sup = lambda * sup_abs_integral
  jensen.csv           lambda, center (Jensen disc center on the chart), eps,
                       n_theta (circle samples), r1 (counting radius),
                       r2 (averaging radius), jensen_bound
  domains.csv          lambda, h (grid spacing), interior_count,
                       boundary_touching_count, min_area, total_area
                       (hyperbolic areas of nodal domains)
  nodal.csv            lambda, h, segments (marching-squares segments),
                       hyperbolic_length (total nodal line length)

exit codes: 0 success, 2 invalid config or group, 3 budget, sampling or
other runtime failure (partial outputs are removed)
"""


def _json_float(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _fail(exc: EislabError, code: int) -> int:
    print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
    return code


def _circle_gap(group) -> float:
    circles = group.circles
    gap = math.inf
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            d = abs(circles[i].center - circles[j].center)
            gap = min(gap, d - circles[i].radius - circles[j].radius)
    return gap


def validate_report(cfg: LabConfig) -> dict:
    group = build_group(cfg.group)
    margin = xi_admissible(group, cfg.xi)
    chart = geodesic_from_endpoints(*cfg.chart)
    ns = xi_ns_certificate(group, chart, cfg.xi, cfg.certify_length)
    if group.rank == 0:
        delta = None
    else:
        try:
            delta = estimate_delta(group).delta_hat
        except InsufficientDataError:
            delta = None
    return {
        "name": cfg.name,
        "config_sha256": cfg.sha256,
        "rank": group.rank,
        "elementary": group.elementary,
        "circles": [{"letter": c.letter, "center": [c.center.real, c.center.imag],
                     "radius": c.radius} for c in group.circles],
        "circle_separation": _json_float(_circle_gap(group)),
        "xi": [cfg.xi.real, cfg.xi.imag],
        "xi_margin": _json_float(margin),
        "delta_hat": delta,
        "delta_below_half": None if delta is None else bool(delta < 0.5),
        "xi_ns": {"length": ns.word_length_checked,
                  "orthogonality_margin": _json_float(ns.min_orthogonality_margin),
                  "equality_margin": _json_float(ns.min_equality_margin),
                  "threshold": ns.threshold, "passes": bool(ns.passes)},
        "version": __version__,
    }


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
        report = validate_report(cfg)
    except EislabError as exc:
        return _fail(exc, EXIT_INVALID)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _lam_tag(lam: float) -> str:
    return format(lam, "g")


def _meta(cfg, ctx, **extra):
    meta = {"config_sha256": cfg.sha256, "L": ctx.L, "q": cfg.q, "tol": cfg.tol,
            "r0": cfg.r0, "words": ctx.size}
    meta.update(extra)
    return meta


def _auto(v):
    return "auto" if v is None else v


def run_field(cfg, ctx, group, chart, out, threads):
    bounds = region_boundary(cfg.region, group)
    for lam in cfg.lambdas:
        fld = eval_field(ctx, lam, cfg.region, cfg.q, threads)
        lines = extract_nodal_lines(fld)
        meta = _meta(cfg, ctx, lam=lam, h=fld.h, region=cfg.region.kind)
        out.write_field_csv(f"field_{_lam_tag(lam)}.csv", fld, meta)
        svg = render_field_svg(fld, lines.polylines(), bounds, meta,
                               title=f"F_lambda, lambda={_lam_tag(lam)}")
        out.write_text(f"field_{_lam_tag(lam)}.svg", svg)


def run_count(cfg, ctx, group, chart, out, threads):
    rows = []
    for lam in cfg.lambdas:
        n = default_samples(lam, -cfg.r0, cfg.r0)
        trace = trace_along(ctx, lam, chart, (-cfg.r0, cfg.r0), n, threads)
        sc = locate_sign_changes(trace, ctx, lam, nthreads=threads)
        jb = jensen_bound(ctx, lam, chart, cfg.r0, cfg.jensen_eps, cfg.jensen_n_theta, threads)
        rows.append((lam, n, sc.count, jb))
    out.write_csv("count.csv", ["lambda", "n_samples", "sign_changes", "jensen_bound"], rows,
                  _meta(cfg, ctx, samples_per_half_wave=SAMPLES_PER_HALF_WAVE,
                        jensen_eps=_auto(cfg.jensen_eps), jensen_n_theta=_auto(cfg.jensen_n_theta)))


def run_equidist(cfg, ctx, group, chart, out, threads):
    rows = []
    for lam in cfg.lambdas:
        res = equidist_check(ctx, lam, chart, cfg.r0, cfg.phi, nthreads=threads)
        rows.append((lam, res.lhs, res.rhs, res.gap))
    out.write_csv("equidist.csv", ["lambda", "lhs", "rhs", "gap"], rows,
                  _meta(cfg, ctx, phi=cfg.phi))


def run_period(cfg, ctx, group, chart, out, threads):
    J = clear_interval(group, chart, cfg.xi, cfg.certify_length, cfg.r0)
    rows = []
    for lam in cfg.lambdas:
        s = period_sup(ctx, lam, chart, J, nthreads=threads)
        rows.append((lam, s, lam * s))
    out.write_csv("period.csv", ["lambda", "sup_abs_integral", "lambda_times_sup"], rows,
                  _meta(cfg, ctx, J_alpha=format(J.alpha, ".17g"),
                        J_beta=format(J.beta, ".17g"), J_margin=format(J.margin, ".17g"),
                        certify_length=cfg.certify_length))


def run_jensen(cfg, ctx, group, chart, out, threads):
    rows = []
    for lam in cfg.lambdas:
        res = jensen_bound(ctx, lam, chart, cfg.r0, cfg.jensen_eps, cfg.jensen_n_theta,
                           threads, full=True)
        rows.append((lam, res.center, res.eps, res.n_theta, res.r1, res.r2, res.bound))
    out.write_csv("jensen.csv", ["lambda", "center", "eps", "n_theta", "r1", "r2",
                                 "jensen_bound"], rows, _meta(cfg, ctx))


def run_domains(cfg, ctx, group, chart, out, threads):
    rows, nodal = [], []
    for lam in cfg.lambdas:
        fld = eval_field(ctx, lam, cfg.region, cfg.q, threads)
        rep = count_nodal_domains(fld)
        rows.append((lam, fld.h, rep.interior_count, rep.boundary_count, rep.min_area,
                     rep.total_area))
        lines = extract_nodal_lines(fld)
        nodal.append((lam, fld.h, len(lines), lines.hyperbolic_length))
    meta = _meta(cfg, ctx, region=cfg.region.kind)
    out.write_csv("domains.csv", ["lambda", "h", "interior_count", "boundary_touching_count",
                                  "min_area", "total_area"], rows, meta)
    out.write_csv("nodal.csv", ["lambda", "h", "segments", "hyperbolic_length"], nodal, meta)


RUNNERS = {
    "field": run_field,
    "count": run_count,
    "equidist": run_equidist,
    "period": run_period,
    "jensen": run_jensen,
    "domains": run_domains,
}


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        group = build_group(cfg.group)
        xi_admissible(group, cfg.xi)
        chart = geodesic_from_endpoints(*cfg.chart)
    except EislabError as exc:
        return _fail(exc, EXIT_INVALID)
    out = OutputSet(args.out if args.out is not None else cfg.output_dir)
    try:
        ctx = build_context(group, cfg.xi, cfg.tol, cap=cfg.max_words)
        RUNNERS[args.subcommand](cfg, ctx, group, chart, out, args.threads)
    except EislabError as exc:
        out.remove_all()
        code = EXIT_INVALID if exc.kind in VALIDATION_KINDS else EXIT_RUNTIME
        return _fail(exc, code)
    except (ArithmeticError, RuntimeError, MemoryError) as exc:
        out.remove_all()
        print(json.dumps({"error": "runtime", "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME
    for p in out.written:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eislab", description="Eisenstein series on Schottky surfaces: experiments.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"eislab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", help="check a config and print a JSON report",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("run", help="run an experiment and write CSV/SVG files",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("subcommand", choices=sorted(RUNNERS))
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    p.add_argument("--threads", type=int, default=1, help="evaluation threads (default 1)")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print(json.dumps({"error": "usage", "message": "--threads must be >= 1"}),
              file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
