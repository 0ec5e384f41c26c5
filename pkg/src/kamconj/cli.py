"""Command line interface.

Exit codes: 0 success/converged, 1 usage or input errors, 2 iteration budget
exhausted, 3 divergence or a failed claimed bound, 4 drift obstruction.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as kio
from .cohomology import solve
from .diophantine import DiophantineVector, best_gamma, verified, verify_dc
from .driver import (
    EXIT_CODES,
    NAMED_ALPHAS,
    ExperimentConfig,
    make_test_map,
    run_scheme,
)
from .errors import ConfigError, KamError
from .rotation import rotation_set_estimate
from .scheduler import (
    check_inductive_inequalities,
    derive_constants,
    mu_window,
    omega0_bound,
    replay_induction,
    schedule_cutoffs,
    validate,
)
from .spectral import cs_norm

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_alpha(text: str) -> np.ndarray:
    if text in NAMED_ALPHAS:
        return np.array([NAMED_ALPHAS[text]])
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse alpha {text!r}: use a tag or comma-separated floats") from None


def _build_parser() -> _Parser:
    p = _Parser(prog="kamconj", description="Conjugate near-rotation torus maps to rigid rotations.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="drive the iteration from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--trace", help="override trace CSV path")
    run.add_argument("--chain", help="override chain JSON path")
    run.add_argument("--final-map", help="override final map JSON path")
    run.add_argument("--quiet", action="store_true")

    par = sub.add_parser("params", help="inspect scheduler parameters")
    par.add_argument("--sigma", type=float, default=0.5)
    par.add_argument("--lambda", dest="lambda_", type=float, default=3.0)
    par.add_argument("--mu", type=float, default=None)
    par.add_argument("--nu", type=float, default=2.0)
    par.add_argument("--tau", type=float, default=2.0)
    par.add_argument("--dim", type=int, default=2)
    par.add_argument("--start-cutoff", "--N1", dest="start_cutoff", type=int, default=8)
    par.add_argument("--replay", type=int, default=0, help="replay the envelope recursion this many steps")
    par.add_argument("--schedule", type=int, default=0, help="print this many schedule cutoffs")

    dc = sub.add_parser("dc-check", help="verify a small-divisor lower bound")
    dc.add_argument("--alpha", required=True)
    dc.add_argument("--tau", type=float, required=True)
    dc.add_argument("--radius", "--K", dest="radius", type=int, required=True)
    dc.add_argument("--gamma", type=float, default=None)

    coh = sub.add_parser("cohomology", help="solve the linearized conjugacy equation")
    coh.add_argument("--map", dest="map_path", required=True)
    coh.add_argument("--alpha", required=True)
    coh.add_argument("--tau", type=float, required=True)
    coh.add_argument("--gamma", default="auto")
    coh.add_argument("--cutoff", type=int, required=True)
    coh.add_argument("--out", help="write correctors as a chain JSON")

    rot = sub.add_parser("rotation", help="estimate the rotation set of a map")
    rot.add_argument("--map", dest="map_path", required=True)
    rot.add_argument("--samples", type=int, default=32)
    rot.add_argument("--iters", type=int, default=1000)
    rot.add_argument("--resolution", type=int, default=None)
    rot.add_argument("--hull-out", help="write rotation hull vertices as CSV")

    mk = sub.add_parser("make-map", help="generate a test map")
    mk.add_argument("--kind", required=True)
    mk.add_argument("--alpha", required=True)
    mk.add_argument("--seed", type=int, required=True)
    mk.add_argument("--out", required=True)
    mk.add_argument("--degree", type=int)
    mk.add_argument("--amplitude", type=float)
    mk.add_argument("--decay", type=float)
    mk.add_argument("--target-degree", type=int)
    mk.add_argument("--delta", help="comma-separated translation offset")
    mk.add_argument("--modes", help="mode list as JSON")
    return p


def _cmd_run(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    overrides = {"trace": args.trace, "chain": args.chain, "final_map": args.final_map}
    output = dict(raw.get("output", {}))
    for key, value in overrides.items():
        if value:
            output[key] = value
    if output:
        raw["output"] = output
    config = ExperimentConfig.from_dict(raw)
    result = run_scheme(config)
    if not args.quiet:
        for row in result.trace:
            n, cutoff, eps0, eps_s0, drift, bound, env0, env_s, phi0, acc = row
            flag = "ok" if acc else "rejected"
            print(
                f"step {n}: N={cutoff} eps0={eps0:.6e} drift={drift:.3e} "
                f"bound={bound:.3e} corrector={phi0:.3e} [{flag}]"
            )
        print(f"status: {result.status.value} after {result.n_steps} accepted steps")
        print(f"final eps0: {result.final_eps0:.6e}")
        if result.verification_residual is not None:
            print(f"conjugacy residual: {result.verification_residual:.6e}")
    return EXIT_CODES[result.status]


def _cmd_params(args) -> int:
    ok, bad = validate(args.sigma, args.lambda_, args.nu)
    if not ok:
        print("infeasible:", ", ".join(bad))
        return 3
    lo, hi = mu_window(args.sigma, args.lambda_, args.nu)
    mu = args.mu if args.mu is not None else 0.5 * (lo + hi)
    print(f"mu window: ({lo:.6g}, {hi:.6g}); using mu={mu:.6g}")
    print(f"omega0 bound: {omega0_bound(args.sigma, args.lambda_):.12g}")
    params = derive_constants(
        sigma=args.sigma, lambda_=args.lambda_, mu=mu, nu=args.nu,
        tau=args.tau, d=args.dim, start_cutoff=args.start_cutoff,
    )
    print(
        f"exponents: a={params.a:.6g} gamma0={params.gamma0:.6g} "
        f"s0={params.s0:.6g} b={params.b:.6g}"
    )
    for name, row in check_inductive_inequalities(params).items():
        state = "ok" if row["ok"] else "VIOLATED"
        print(f"  {name}: lhs={row['lhs']:.6g} bound={row['bound']:.6g} margin={row['margin']:.6g} [{state}]")
    if args.schedule:
        print("schedule:", schedule_cutoffs(args.start_cutoff, args.sigma, args.schedule))
    if args.replay:
        rep = replay_induction(params, n_steps=args.replay)
        print(
            f"replay: ok={rep.ok} steps={rep.steps} "
            f"final margins=({rep.margins_low[-1]:.3g}, {rep.margins_high[-1]:.3g})"
        )
        if not rep.ok:
            print(f"  envelope lost at step {rep.first_violation}")
            return 3
    return 0


def _cmd_dc_check(args) -> int:
    alpha = _parse_alpha(args.alpha)
    gamma = best_gamma(alpha, args.tau, args.radius)
    probe = verify_dc(DiophantineVector(alpha, gamma, args.tau), args.radius)
    print(f"worst-case gamma over |k|_1 <= {args.radius}: {gamma!r}")
    print(f"worst mode: k={probe.worst_k}")
    if args.gamma is None:
        return 0
    vec = DiophantineVector(alpha, args.gamma, args.tau)
    report = verify_dc(vec, args.radius)
    state = "holds" if report.ok else "FAILS"
    print(
        f"claim gamma={args.gamma}: {state} "
        f"(worst ratio {report.worst_ratio!r} at k={report.worst_k})"
    )
    return 0 if report.ok else 3


def _cmd_cohomology(args) -> int:
    f = kio.load_map(args.map_path)
    alpha = _parse_alpha(args.alpha)
    if alpha.size != f.dim:
        raise ConfigError("alpha dimension does not match the map")
    gamma = (
        best_gamma(alpha, args.tau, args.cutoff) * (1.0 + 1e-12)
        if args.gamma == "auto"
        else float(args.gamma)
    )
    vec = verified(DiophantineVector(alpha, gamma, args.tau), args.cutoff)
    correctors = []
    for i, u in enumerate(f.displacement):
        sol = solve(u, vec, args.cutoff)
        correctors.append(sol.corrector)
        print(
            f"component {i}: |phi|_0={cs_norm(sol.corrector, 0):.6e} "
            f"residual={sol.residual:.3e} min divisor={sol.min_divisor:.6e}"
        )
    if args.out:
        from .spectral import TorusMapLift

        phi = TorusMapLift(np.zeros(f.dim), tuple(correctors))
        kio.save_map(phi, args.out)
    return 0


def _cmd_rotation(args) -> int:
    f = kio.load_map(args.map_path)
    data = rotation_set_estimate(
        f, n_samples=args.samples, n_iter=args.iters, grid_resolution=args.resolution
    )
    np.set_printoptions(precision=15)
    print(f"rotation hull vertices:\n{data.rotation_hull.vertices}")
    print(f"rotation hull diameter: {data.rotation_hull.diameter():.6e}")
    print(f"displacement hull diameter: {data.displacement_hull.diameter():.6e}")
    if args.hull_out:
        kio.hull_to_csv(data.rotation_hull, args.hull_out)
    return 0


def _cmd_make_map(args) -> int:
    params = {}
    for key in ("degree", "amplitude", "decay"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.target_degree is not None:
        params["target_degree"] = args.target_degree
    if args.delta is not None:
        params["delta"] = [float(x) for x in args.delta.split(",")]
    if args.modes is not None:
        params["modes"] = json.loads(args.modes)
    alpha = _parse_alpha(args.alpha)
    f = make_test_map(args.kind, params, alpha, args.seed)
    kio.save_map(f, args.out)
    print(f"wrote {args.kind} map (dim {f.dim}, degree {f.degree}) to {args.out}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "params": _cmd_params,
    "dc-check": _cmd_dc_check,
    "cohomology": _cmd_cohomology,
    "rotation": _cmd_rotation,
    "make-map": _cmd_make_map,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, KamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
