"""Command-line front end.

Subcommands mirror the library layers: classify/atlas for the exponent
plane, fiber for the scalar ray analysis, solve for the shooting solver,
nehari/lambda-star for the variational layer, spectrum for the linearized
eigenproblem, evolve for the parabolic flow, and verify for the acceptance
battery.  Reports go to stdout as JSON; file artifacts (CSV profiles and
atlases, SVG figures, trajectory directories) land in --out.

Exit codes: 0 on success, 1 on domain errors (reported as a JSON object on
stdout), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ZeroMassError
from .exponents import DomainKind, ExponentConfig, atlas, classify_region

_DOMAINS = {
    "entire": DomainKind.ENTIRE,
    "ball": DomainKind.BALL,
    "exterior": DomainKind.EXTERIOR,
}


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("ZEROMASS_OUT", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config_dict(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _emit(payload: dict, args) -> None:
    print(json.dumps({"config": _config_dict(args), "result": payload},
                     indent=2, sort_keys=True, default=str))


def _write_csv(path: Path, header_cfg: dict, columns: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header_cfg, sort_keys=True, default=str) + "\n")
        fh.write(columns + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")


# ---------------------------------------------------------------------------


def cmd_classify(args):
    cfg = ExponentConfig(
        p=args.p, q=args.q, dim=args.dim, lam=args.lam,
        domain=_DOMAINS[args.domain],
        radius=args.radius if args.domain != "entire" else None,
    )
    report = classify_region(cfg)
    _emit(report.as_dict(), args)
    return 0


def cmd_atlas(args):
    result = atlas(
        (args.p_min, args.p_max), (args.q_min, args.q_max), args.steps,
        dim=args.dim, domain=_DOMAINS[args.domain], radius=args.radius,
        workers=args.workers,
    )
    out = _out_dir(args)
    cfg = _config_dict(args)
    csv_path = out / f"atlas_n{args.dim}_{args.domain}.csv"
    _write_csv(csv_path, cfg, "p,q,dim,domain,d_star,existence,sign,fibering_case",
               result.csv_rows())
    artifacts = {"csv": str(csv_path), "curve_cells": len(result.curve_cells)}
    if args.svg:
        from .figures import render_atlas_svg

        svg_path = out / f"atlas_n{args.dim}_{args.domain}.svg"
        render_atlas_svg(result, svg_path, cfg)
        artifacts["svg"] = str(svg_path)
    _emit(artifacts, args)
    return 0


def cmd_fiber(args):
    from .fibering import (
        Functionals,
        diagnostics,
        rayleigh_lambda,
        rayleigh_lambda_E,
        stationary_points,
    )

    f = Functionals(dirichlet=args.T, power_p=args.A, power_q=args.B)
    points = stationary_points(f, args.lam, args.p, args.q)
    diag = diagnostics(f, args.lam, args.p, args.q, args.dim)
    payload = {
        "stationary_points": [{"r": pt.r, "kind": pt.kind.value} for pt in points],
        "diagnostics": {"E": diag.energy, "d1": diag.slope, "d2": diag.curvature,
                        "P": diag.pohozaev},
    }
    try:
        payload["lambda_u"] = rayleigh_lambda(f, args.p, args.q)
        payload["lambda_E_u"] = rayleigh_lambda_E(f, args.p, args.q)
    except ValueError:
        payload["lambda_u"] = None
        payload["lambda_E_u"] = None
    _emit(payload, args)
    return 0


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"tolerance override {pair!r} must look like name=value")
        key, val = pair.split("=", 1)
        overrides[key.strip()] = float(val)
    return overrides


def cmd_solve(args):
    from .shooting import (
        shoot_ball,
        shoot_entire,
        shoot_exterior,
        tolerance_overrides,
        write_profile,
    )

    with tolerance_overrides(**_parse_overrides(args.tolerance)):
        if args.domain == "ball":
            report = shoot_ball(args.p, args.q, args.lam, args.dim, args.radius,
                                allow_inadmissible=args.force)
        elif args.domain == "exterior":
            report = shoot_exterior(args.p, args.q, args.lam, args.dim, args.radius,
                                    allow_inadmissible=args.force)
        else:
            report = shoot_entire(args.p, args.q, args.dim, lam=args.lam,
                                  allow_inadmissible=args.force)
    out = _out_dir(args)
    cfg = _config_dict(args)
    stem = f"profile_{args.domain}_p{args.p}_q{args.q}_n{args.dim}"
    csv_path = out / f"{stem}.csv"
    write_profile(csv_path, report.profile,
                  {"p": args.p, "q": args.q, "lambda": report.lam, **cfg})
    payload = report.as_dict()
    payload["profile_csv"] = str(csv_path)
    if args.svg:
        from .figures import render_profile_svg

        svg_path = out / f"{stem}.svg"
        render_profile_svg(report.profile, svg_path, cfg)
        payload["profile_svg"] = str(svg_path)
    _emit(payload, args)
    return 0


def cmd_nehari(args):
    from .nehari import Branch, minimize_ground_state
    from .shooting import write_profile

    branch = {"min": Branch.MIN, "max": Branch.MAX, None: None}[args.branch]
    state = minimize_ground_state(
        args.p, args.q, args.dim, args.radius, args.lam,
        nodes=args.nodes, branch=branch,
        cross_validate=not args.no_cross_validate,
    )
    out = _out_dir(args)
    cfg = _config_dict(args)
    csv_path = out / f"ground_state_p{args.p}_q{args.q}_n{args.dim}.csv"
    write_profile(csv_path, state.report.profile,
                  {"p": args.p, "q": args.q, "lambda": args.lam, **cfg})
    payload = state.as_dict()
    payload["profile_csv"] = str(csv_path)
    _emit(payload, args)
    return 0


def cmd_lambda_star(args):
    from .nehari import estimate_lambda_star

    est = estimate_lambda_star(
        args.p, args.q, args.dim, args.radius,
        nodes=args.nodes, certificate=not args.no_certificate, seed=args.seed,
    )
    _emit(est.as_dict(), args)
    return 0


def cmd_spectrum(args):
    from .shooting import read_profile
    from .spectral import min_eigenvalue

    profile, meta = read_profile(args.profile)
    lam = args.lam if args.lam is not None else float(meta.get("lambda", 1.0))
    p = args.p if args.p is not None else float(meta["p"])
    q = args.q if args.q is not None else float(meta["q"])
    report = min_eigenvalue(profile, lam, p, q)
    _emit(report.as_dict(), args)
    return 0


def cmd_evolve(args):
    from .errors import WindowTooShort
    from .parabolic import evolve, growth_rate_fit
    from .shooting import read_profile, write_profile

    profile, meta = read_profile(args.initial)
    traj = evolve(
        profile, args.lam, args.p, args.q, args.dt, args.t_end,
        record_every=args.record_every, nodes=args.nodes,
    )
    out = _out_dir(args)
    cfg = _config_dict(args)
    run_dir = out / "trajectory"
    run_dir.mkdir(parents=True, exist_ok=True)
    for i, t in enumerate(traj.times):
        write_profile(run_dir / f"snapshot_{i:05d}.csv", traj.profile_at(i),
                      {"t": t, "p": args.p, "q": args.q, "lambda": args.lam})
    residuals = traj.identity_residuals()
    try:  # decay/growth rate toward the final recorded state, when fittable
        fitted_rate = growth_rate_fit(traj, traj.states[-1])
    except WindowTooShort:
        fitted_rate = None
    summary = {
        "config": cfg,
        "times": list(map(float, traj.times)),
        "energies": list(map(float, traj.energies)),
        "dissipation": list(map(float, traj.dissipation)),
        "status": traj.status,
        "status_info": {k: float(v) for k, v in traj.status_info.items()},
        "dt_effective": traj.dt,
        "fitted_rate": fitted_rate,
        "max_identity_residual": float(np.nanmax(residuals)),
    }
    with open(run_dir / "trajectory.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    artifacts = {"directory": str(run_dir), "snapshots": len(traj.times),
                 "status": traj.status}
    if args.svg:
        from .figures import render_trajectory_svg

        svg_path = run_dir / "trajectory.svg"
        render_trajectory_svg(traj.times, traj.energies, traj.dissipation,
                              svg_path, cfg)
        artifacts["svg"] = str(svg_path)
    _emit(artifacts, args)
    return 0


def cmd_verify(args):
    from .acceptance import run_suite

    indices = None
    if args.criterion:
        indices = set(args.criterion)
    results = run_suite(indices=indices)
    failed = [r for r in results if not r.passed]
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeromass",
        description="numerical laboratory for the zero-mass equation "
                    "-Lap u = lam|u|^{p-2}u - |u|^{q-2}u",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pq(sp, dim_default=3):
        sp.add_argument("--p", type=float, required=True)
        sp.add_argument("--q", type=float, required=True)
        sp.add_argument("--dim", type=int, default=dim_default)

    sp = sub.add_parser("classify", help="region verdict for one configuration")
    add_pq(sp)
    sp.add_argument("--domain", choices=_DOMAINS, default="entire")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("atlas", help="dense classifier sweep with CSV/SVG export")
    sp.add_argument("--p-min", type=float, default=0.2)
    sp.add_argument("--p-max", type=float, default=8.0)
    sp.add_argument("--q-min", type=float, default=0.2)
    sp.add_argument("--q-max", type=float, default=8.0)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--domain", choices=_DOMAINS, default="entire")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", type=str, default=None)
    sp.add_argument("--no-svg", dest="svg", action="store_false")
    sp.set_defaults(func=cmd_atlas)

    sp = sub.add_parser("fiber", help="ray analysis from the scalar functionals")
    add_pq(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--T", type=float, required=True, help="Dirichlet energy")
    sp.add_argument("--A", type=float, required=True, help="p-power mass")
    sp.add_argument("--B", type=float, required=True, help="q-power mass")
    sp.set_defaults(func=cmd_fiber)

    sp = sub.add_parser("solve", help="radial shooting solve")
    add_pq(sp)
    sp.add_argument("--domain", choices=_DOMAINS, default="entire")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--force", action="store_true",
                    help="run even where the classifier rules out solutions")
    sp.add_argument("--tolerance", action="append", default=None, metavar="NAME=VALUE",
                    help="override a solver tolerance (e.g. pohozaev_rel=1e-9)")
    sp.add_argument("--out", type=str, default=None)
    sp.add_argument("--no-svg", dest="svg", action="store_false")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("nehari", help="constrained ground-state minimization")
    add_pq(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--nodes", type=int, default=1024)
    sp.add_argument("--branch", choices=["min", "max"], default=None)
    sp.add_argument("--no-cross-validate", action="store_true")
    sp.add_argument("--out", type=str, default=None)
    sp.set_defaults(func=cmd_nehari)

    sp = sub.add_parser("lambda-star", help="fold and zero-energy thresholds")
    add_pq(sp)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--nodes", type=int, default=1024)
    sp.add_argument("--no-certificate", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_lambda_star)

    sp = sub.add_parser("spectrum", help="minimal linearized eigenvalue of a profile")
    sp.add_argument("--profile", type=str, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--q", type=float, default=None)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("evolve", help="parabolic flow from an initial profile")
    sp.add_argument("--initial", type=str, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--t-end", type=float, default=1.0)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--nodes", type=int, default=None)
    sp.add_argument("--out", type=str, default=None)
    sp.add_argument("--no-svg", dest="svg", action="store_false")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("verify", help="run the acceptance battery")
    sp.add_argument("--suite", choices=["core"], default="core")
    sp.add_argument("--criterion", type=int, action="append", default=None,
                    help="restrict to specific criteria (repeatable)")
    sp.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ZeroMassError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "ValueError", "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
