"""Command-line front end.

Exit codes: 0 success, 1 spec/parse error, 2 domain violation,
3 tolerance failure (verify, reproduce).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from hesskit import dynamics
from hesskit.fd import FDParams, fd_hessian, step_sweep, verify
from hesskit.hessian import hessian_total
from hesskit.io import (
    SpecError,
    hessian_to_dict,
    load_problem,
    write_matrix_text,
    write_trajectory_csv,
)
from hesskit.potentials import DomainError
from hesskit.reproduce import CASES

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_TOL = 0, 1, 2, 3

DEFAULTS = {
    "dt": 1e-3,
    "max_steps": 100_000,
    "grad_tol": 1e-9,
    "stride": 1,
    "tau_rel": 1e-8,
    "h": 1e-4,
    "tol": 1e-5,
}


def _setting(args, problem, key):
    val = getattr(args, key, None)
    if val is not None:
        return val
    return problem.settings.get(key, DEFAULTS[key])


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w")


def _emit_json(obj, path=None):
    fh = _open_out(path)
    try:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_hessian(args) -> int:
    problem = load_problem(args.spec)
    spec, c = problem.spec, problem.config
    tau = _setting(args, problem, "tau_rel")
    fdp = FDParams(h=_setting(args, problem, "h"))
    mode = args.mode or "analytic"
    H = hessian_total(spec, c) if mode in ("analytic", "both") else fd_hessian(spec, c, fdp)
    report = dynamics.classify(H, tau)
    extra = {"mode": mode, "pinned": sorted(c.pinned)}
    if mode == "both":
        H_fd = fd_hessian(spec, c, fdp)
        extra["fd_data"] = H_fd.reshape(-1).tolist()
        extra["max_abs_deviation"] = float(np.max(np.abs(H - H_fd), initial=0.0))
    if args.format == "txt":
        fh = _open_out(args.out)
        try:
            write_matrix_text(H, fh)
        finally:
            if fh is not sys.stdout:
                fh.close()
    else:
        _emit_json(hessian_to_dict(H, report, **extra), args.out)
    return EXIT_OK


def _jittered(problem, seed, scale):
    rng = np.random.default_rng(seed)
    c = problem.config
    P = c.positions + scale * rng.standard_normal(c.positions.shape)
    for v in c.pinned:
        P[v - 1] = c.positions[v - 1]
    return c.with_positions(P)


def cmd_verify(args) -> int:
    problem = load_problem(args.spec)
    spec, c = problem.spec, problem.config
    if args.seed is not None:
        c = _jittered(problem, args.seed, args.jitter)
    if args.h_sweep:
        sweep = step_sweep(spec, c, [float(h) for h in args.h_sweep])
        print(f"{'h':>10}  {'grad_err':>12}  {'hess_err':>12}")
        for h, ge, he in zip(sweep.hs, sweep.grad_errors, sweep.hess_errors):
            print(f"{h:10.1e}  {ge:12.4e}  {he:12.4e}")
        print(f"log-log slope: gradient {sweep.grad_slope:.3f}, hessian {sweep.hess_slope:.3f}")
        return EXIT_OK
    H_override = None
    if args.perturb is not None:
        r, col, delta = int(args.perturb[0]), int(args.perturb[1]), float(args.perturb[2])
        H_override = hessian_total(spec, c).copy()
        H_override[r, col] += delta
    rep = verify(spec, c, FDParams(h=_setting(args, problem, "h")), tol=_setting(args, problem, "tol"),
                 grad_tol=args.grad_tol, analytic_hessian=H_override)
    _emit_json(rep.to_dict(), args.out)
    if rep.error is not None:
        print(f"error: {rep.error}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK if rep.passed else EXIT_TOL


def cmd_simulate(args) -> int:
    problem = load_problem(args.spec)
    traj = dynamics.integrate(
        problem.spec,
        problem.config,
        dt=_setting(args, problem, "dt"),
        max_steps=_setting(args, problem, "max_steps"),
        grad_tol=_setting(args, problem, "grad_tol"),
        stride=_setting(args, problem, "stride"),
    )
    fh = _open_out(args.out)
    try:
        write_trajectory_csv(traj, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.classify:
        rep = dynamics.classify_at(problem.spec, traj.final, _setting(args, problem, "tau_rel"))
        rep.extra = {"termination": traj.reason, "steps": traj.steps}
        _emit_json(rep.to_dict(), args.report)
    return EXIT_OK


def cmd_classify(args) -> int:
    problem = load_problem(args.spec)
    tau = _setting(args, problem, "tau_rel")
    if args.integrate:
        rep = dynamics.find_and_classify(
            problem.spec,
            problem.config,
            dt=_setting(args, problem, "dt"),
            max_steps=_setting(args, problem, "max_steps"),
            grad_tol=_setting(args, problem, "grad_tol"),
            tau_rel=tau,
        )
    else:
        rep = dynamics.classify_at(problem.spec, problem.config, tau)
    _emit_json(rep.to_dict(), args.out)
    return EXIT_OK


def cmd_reproduce(args, threshold=1e-10) -> int:
    names = list(CASES) if args.case == "all" else [args.case]
    worst = 0.0
    print(f"{'case':<15} {'samples':>7} {'max deviation':>14}  result")
    for name in names:
        kwargs = {"seed": args.seed}
        if args.count is not None:
            kwargs["count"] = args.count
        res = CASES[name](**kwargs)
        ok = res.max_deviation < threshold
        worst = max(worst, res.max_deviation)
        print(f"{name:<15} {len(res.deviations):>7} {res.max_deviation:14.3e}  {'PASS' if ok else 'FAIL'}")
        if args.verbose:
            for p, dev in zip(res.params, res.deviations):
                print(f"    {dev:10.3e}  {json.dumps(p)}")
    return EXIT_OK if worst < threshold else EXIT_TOL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hesskit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hessian", help="assemble the Hessian of a problem spec")
    p.add_argument("spec")
    p.add_argument("--out", "-o")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--analytic", dest="mode", action="store_const", const="analytic")
    g.add_argument("--fd", dest="mode", action="store_const", const="fd")
    g.add_argument("--both", dest="mode", action="store_const", const="both")
    p.add_argument("--format", choices=["json", "txt"], default="json")
    p.add_argument("--tau-rel", dest="tau_rel", type=float)
    p.add_argument("--h", type=float)
    p.set_defaults(func=cmd_hessian)

    p = sub.add_parser("verify", help="compare analytic and finite-difference derivatives")
    p.add_argument("spec")
    p.add_argument("--h", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=1e-7)
    p.add_argument("--h-sweep", dest="h_sweep", nargs="*", type=float, metavar="H",
                   help="print error vs step for the given steps (default 1e-2 1e-3 1e-4 1e-5)")
    p.add_argument("--seed", type=int, help="jitter free agents with seeded Gaussian noise")
    p.add_argument("--jitter", type=float, default=0.1)
    p.add_argument("--perturb", nargs=3, metavar=("ROW", "COL", "DELTA"),
                   help="add DELTA to one analytic Hessian entry (fault injection)")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="integrate the gradient flow, write CSV")
    p.add_argument("spec")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", dest="max_steps", type=int)
    p.add_argument("--grad-tol", dest="grad_tol", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--out", "-o")
    p.add_argument("--classify", action="store_true", help="also emit the terminal equilibrium report")
    p.add_argument("--report", help="where to write the report (default stdout)")
    p.add_argument("--tau-rel", dest="tau_rel", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="inertia and verdict of the Hessian")
    p.add_argument("spec")
    p.add_argument("--integrate", action="store_true", help="run the gradient flow first")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", dest="max_steps", type=int)
    p.add_argument("--grad-tol", dest="grad_tol", type=float)
    p.add_argument("--tau-rel", dest="tau_rel", type=float)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("reproduce", help="closed-form vs engine comparison tables")
    p.add_argument("case", choices=list(CASES) + ["all"])
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "h_sweep", None) == []:
        args.h_sweep = [1e-2, 1e-3, 1e-4, 1e-5]
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain violation: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
