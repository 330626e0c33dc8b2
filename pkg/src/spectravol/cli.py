"""Command-line interface: ``spectravol {center,volume,check,family,mc,compare}``.

Exit codes: 0 success, 1 input error, 2 infeasible or precondition
violated, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from typing import Any, Sequence

import numpy as np

from . import families, oracle, spectra, symlin, volume
from .center import SolverOptions, analytic_center
from .errors import (
    ChordError,
    DimensionMismatch,
    Infeasible,
    InstanceFormatError,
    LineSearchStalled,
    MaxIterationsExceeded,
    NotPositiveDefinite,
    NotStrictlyFeasible,
    NotSymmetric,
    PreconditionViolation,
    RankDeficient,
    SpectravolError,
    UnboundedSuspected,
    ZeroAcceptances,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_NONCONVERGENCE = 3

_EXIT_FOR = [
    ((MaxIterationsExceeded, LineSearchStalled, ChordError), EXIT_NONCONVERGENCE),
    ((InstanceFormatError, DimensionMismatch, NotSymmetric), EXIT_INPUT),
    (
        (
            Infeasible,
            NotStrictlyFeasible,
            PreconditionViolation,
            RankDeficient,
            NotPositiveDefinite,
            UnboundedSuspected,
            ZeroAcceptances,
        ),
        EXIT_INFEASIBLE,
    ),
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are input errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _epsilon(text: str) -> float:
    try:
        eps = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not 0.0 < eps <= volume.EPS_MAX_MAIN:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1/e], got {eps}")
    return eps


def _epsilon_loose(text: str) -> float:
    try:
        eps = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not 0.0 < eps <= volume.EPS_MAX_A3:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1/2], got {eps}")
    return eps


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _load(path: str) -> spectra.Spectrahedron:
    if path == "-":
        return spectra.load(sys.stdin)
    try:
        return spectra.load_path(path)
    except OSError as exc:
        raise InstanceFormatError(f"cannot read {path}: {exc}") from exc


def _logs(x: float) -> str:
    return f"{x:.10g} (log10 {x / math.log(10):.10g})"


def _emit(args: argparse.Namespace, report: dict[str, Any], lines: list[str]) -> None:
    if args.json:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _instance_meta(s: spectra.Spectrahedron) -> dict[str, Any]:
    return {"name": s.name, "n": s.n, "m": s.m, "slice_dim": s.slice_dim}


def _solve(s: spectra.Spectrahedron, args: argparse.Namespace, timings: dict[str, float]):
    t0 = time.perf_counter()
    res = analytic_center(
        s,
        SolverOptions(tol=args.tol, max_iter=args.max_iter),
        convention=args.convention,
    )
    timings["center"] = time.perf_counter() - t0
    return res


def _finish(args, report, lines, timings) -> int:
    if args.timings:
        report["timings_seconds"] = timings
        lines.append("timings: " + ", ".join(f"{k} {v:.3f}s" for k, v in timings.items()))
    _emit(args, report, lines)
    return EXIT_OK


def cmd_center(args: argparse.Namespace) -> int:
    s = _load(args.input)
    timings: dict[str, float] = {}
    res = _solve(s, args, timings)
    report = {"instance": _instance_meta(s), "center": res.summary(), "log_base": "e"}
    report["center"]["matrix"] = res.center.tolist()
    if args.out:
        with open(args.out, "w") as fp:
            json.dump(res.center.tolist(), fp)
            fp.write("\n")
    with np.printoptions(precision=8, suppress=True, linewidth=120):
        lines = [
            f"instance: {s.name or args.input}  N={s.n}  m={s.m}",
            f"iterations: {res.iterations}",
            f"phi(P*) [{res.entropy.convention}]: {_logs(res.entropy.value)}",
            f"newton decrement: {res.newton_decrement:.3e}",
            f"stationarity residual: {res.stationarity_residual:.3e}",
            f"feasibility residual: {res.feasibility_residual:.3e}",
            "P* =",
            str(res.center),
        ]
    return _finish(args, report, lines, timings)


def _mc(s, args, timings, center=None) -> oracle.MCEstimate:
    t0 = time.perf_counter()
    box = oracle.bounding_box(s, center=center)
    est = oracle.mc_volume_rejection(s, args.mc_samples, seed=args.seed, box=box)
    timings["mc"] = time.perf_counter() - t0
    return est


def cmd_volume(args: argparse.Namespace) -> int:
    s = _load(args.input)
    timings: dict[str, float] = {}
    res = _solve(s, args, timings)
    rep = volume.approx_log_volume(s, res, args.convention)
    cond = volume.check_conditions(s, res, args.epsilon, strict=False)
    report: dict[str, Any] = {
        "instance": _instance_meta(s),
        "center": res.summary(),
        "volume": rep.to_dict(),
        "conditions": cond.to_dict(),
        "log_base": "e",
    }
    lines = [
        f"instance: {s.name or args.input}  N={s.n}  m={s.m}",
        f"approx log-volume [{rep.convention}]: {_logs(rep.log_volume)}",
    ]
    if rep.linear is not None:
        lines.append(f"approx volume: {rep.linear:.10g}")
    verdict = "PASS" if cond.condition_main_satisfied and cond.a3_satisfied else "FAIL"
    lines.append(
        f"conditions at eps={args.epsilon:g}: {verdict} "
        f"(main {cond.condition_main_satisfied}, A3 {cond.a3_satisfied}, "
        f"orthonormalized {cond.a3_prime_satisfied}); the formula is reported regardless"
    )
    if args.with_mc:
        est = _mc(s, args, timings, res.center)
        fro = volume.approx_log_volume(s, res, symlin.FROBENIUS).log_volume
        diff = fro - est.log_volume
        report["mc"] = est.to_dict()
        report["formula_minus_mc_log"] = diff
        lines.append(
            f"MC log-volume [frobenius]: {_logs(est.log_volume)} +- {est.std_error_log:.3g}"
        )
        lines.append(f"formula - MC (log, frobenius): {diff:.6g}")
    return _finish(args, report, lines, timings)


def cmd_check(args: argparse.Namespace) -> int:
    s = _load(args.input)
    timings: dict[str, float] = {}
    res = _solve(s, args, timings)
    cond = volume.check_conditions(s, res, args.epsilon)
    report: dict[str, Any] = {"instance": _instance_meta(s), "conditions": cond.to_dict()}
    lines = [
        f"instance: {s.name or args.input}  N={s.n}  m={s.m}",
        f"lambda = {cond.lambda_:.10g}   (orthonormalized value would be {1 / (s.n + 1):.10g})",
        f"theta <= {cond.theta:.10g}"
        + (f"   exact theta = {cond.theta_exact:.10g}" if cond.theta_exact is not None else ""),
        f"epsilon = {args.epsilon:g}",
        f"main condition (gamma={cond.gamma_main:g}): {'PASS' if cond.condition_main_satisfied else 'FAIL'}",
        f"A3 (gamma={cond.gamma_technical:g}): {'PASS' if cond.a3_satisfied else 'FAIL'}",
        f"orthonormalized A3: {'PASS' if cond.a3_prime_satisfied else 'FAIL'}",
        "min epsilon passing orthonormalized A3 at this N: "
        + ("none <= 1/2" if cond.min_epsilon_feasible is None else f"{cond.min_epsilon_feasible:.6g}"),
        f"N required by the main condition at this epsilon and m: {cond.required_N_main:.6e}",
    ]
    if args.target_epsilon is not None:
        need = volume.required_N(args.target_epsilon, s.m)
        report["required_N_for_target"] = {"epsilon": args.target_epsilon, "N": need}
        lines.append(f"N required for epsilon={args.target_epsilon:g}: {need:.6e}")
    if s.m == 2 and args.schedule:
        thr = volume.schedule_threshold(2)
        report["rank_one_schedule_threshold_N"] = thr
        lines.append(f"two-constraint epsilon(N) schedule activates for N >= {thr:.6e}")
    return _finish(args, report, lines, timings)


def cmd_mc(args: argparse.Namespace) -> int:
    s = _load(args.input)
    timings: dict[str, float] = {}
    est = _mc(s, args, timings)
    report = {"instance": _instance_meta(s), "mc": est.to_dict(), "log_base": "e"}
    lines = [
        f"instance: {s.name or args.input}  N={s.n}  m={s.m}  slice dim={s.slice_dim}",
        f"MC log-volume [frobenius]: {_logs(est.log_volume)} +- {est.std_error_log:.3g}",
        f"accepted {est.samples_accepted} / {est.samples_total}",
    ]
    return _finish(args, report, lines, timings)


def cmd_compare(args: argparse.Namespace) -> int:
    s = _load(args.input)
    timings: dict[str, float] = {}
    res = _solve(s, args, timings)
    fro = volume.approx_log_volume(s, res, symlin.FROBENIUS)
    pap = volume.approx_log_volume(s, res, symlin.ENTRYWISE)
    report: dict[str, Any] = {
        "instance": _instance_meta(s),
        "formula": {"frobenius": fro.to_dict(), "entrywise": pap.to_dict()},
        "log_base": "e",
    }
    lines = [
        f"instance: {s.name or args.input}  N={s.n}  m={s.m}",
        f"formula [frobenius]: {_logs(fro.log_volume)}",
        f"formula [entrywise]:     {_logs(pap.log_volume)}",
    ]
    if s.m == 1:
        A = s.constraints[0] / s.rhs[0]
        ex_f = volume.exact_log_volume_one_constraint(A, symlin.FROBENIUS)
        ex_p = volume.exact_log_volume_one_constraint(A, symlin.ENTRYWISE)
        report["exact"] = {"frobenius": ex_f.to_dict(), "entrywise": ex_p.to_dict()}
        report["formula_minus_exact_log"] = fro.log_volume - ex_f.log_volume
        lines.append(f"exact   [frobenius]: {_logs(ex_f.log_volume)}")
        lines.append(f"formula - exact (log): {fro.log_volume - ex_f.log_volume:.6g}")
    if args.with_mc:
        est = _mc(s, args, timings, res.center)
        report["mc"] = est.to_dict()
        for conv, rep in (("frobenius", fro), ("entrywise", pap)):
            report.setdefault("formula_minus_mc_log", {})[conv] = rep.log_volume - est.log_volume
        lines.append(f"MC      [frobenius]: {_logs(est.log_volume)} +- {est.std_error_log:.3g}")
        if "exact" in report:
            for conv in ("frobenius", "entrywise"):
                z = (report["exact"][conv]["log_volume"] - est.log_volume) / est.std_error_log
                report.setdefault("exact_vs_mc_z", {})[conv] = z
                lines.append(f"exact [{conv}] vs MC: {z:+.2f} standard errors")
    return _finish(args, report, lines, timings)


def cmd_family(args: argparse.Namespace) -> int:
    kind = args.kind
    if kind == "spectraplex":
        if args.A_diag:
            A = np.diag(args.A_diag)
        else:
            A = np.eye(args.N) * args.scale
        s = families.make_spectraplex(A)
    elif kind == "rank-one":
        A = np.diag(args.A_diag) if args.A_diag else np.eye(args.N)
        if args.v:
            v = np.array(args.v)
        else:
            v = np.zeros(A.shape[0])
            v[0] = math.sqrt(args.xi * A[0, 0])
        s = families.make_rank_one(A, v)
    elif kind == "diag-blocks":
        s = families.make_diag_blocks(args.alpha, args.beta, args.N)
    elif kind == "scp":
        s = families.make_scp(args.n, args.k)
    elif kind == "central-section":
        M = np.diag(args.M_diag) if args.M_diag else families.random_symmetric(args.N, args.seed)
        s = families.make_central_section(M)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(kind)
    if args.out:
        spectra.save_path(s, args.out)
    else:
        spectra.dump(s, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spectravol", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    common.add_argument(
        "--convention", choices=(*symlin.CONVENTIONS, *symlin.CONVENTION_ALIASES), default=symlin.DEFAULT_CONVENTION
    )

    solver = _Parser(add_help=False)
    solver.add_argument("--tol", type=float, default=1e-10)
    solver.add_argument("--max-iter", type=int, default=200)

    mc = _Parser(add_help=False)
    mc.add_argument("--mc-samples", type=int, default=10**6)
    mc.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("center", parents=[common, solver], help="compute the analytic center")
    c.add_argument("input", help="instance JSON file, or - for stdin")
    c.add_argument("--out", help="write P* as a JSON matrix")
    c.set_defaults(func=cmd_center)

    v = sub.add_parser("volume", parents=[common, solver, mc], help="approximate the volume")
    v.add_argument("input")
    v.add_argument("--epsilon", type=_epsilon_loose, default=volume.EPS_MAX_MAIN)
    v.add_argument("--with-mc", action="store_true", help="also run the Monte Carlo oracle")
    v.set_defaults(func=cmd_volume)

    k = sub.add_parser("check", parents=[common, solver], help="evaluate the applicability conditions")
    k.add_argument("input")
    k.add_argument("--epsilon", type=_epsilon, required=True)
    k.add_argument("--target-epsilon", type=_epsilon, default=None)
    k.add_argument(
        "--schedule",
        action="store_true",
        help="for m=2, report where the epsilon(N) schedule starts to pass",
    )
    k.set_defaults(func=cmd_check)

    m = sub.add_parser("mc", parents=[common, mc], help="Monte Carlo volume estimate")
    m.add_argument("input")
    m.set_defaults(func=cmd_mc)

    cmp_ = sub.add_parser(
        "compare", parents=[common, solver, mc], help="formula vs exact vs Monte Carlo"
    )
    cmp_.add_argument("input")
    cmp_.add_argument("--with-mc", action="store_true")
    cmp_.set_defaults(func=cmd_compare)

    f = sub.add_parser("family", help="write a family instance as JSON")
    f.add_argument(
        "kind", choices=["spectraplex", "rank-one", "diag-blocks", "scp", "central-section"]
    )
    f.add_argument("--N", type=int, default=3)
    f.add_argument("--n", type=int, default=2)
    f.add_argument("--k", type=int, default=2)
    f.add_argument("--scale", type=float, default=1.0)
    f.add_argument("--A-diag", type=_floats, default=None, help="diagonal of A")
    f.add_argument("--M-diag", type=_floats, default=None, help="diagonal of M")
    f.add_argument("--v", type=_floats, default=None)
    f.add_argument("--xi", type=float, default=2.0, help="xi for the default v = sqrt(xi A_11) e_1")
    f.add_argument("--alpha", type=float, default=1.0)
    f.add_argument("--beta", type=float, default=1.0)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out")
    f.set_defaults(func=cmd_family)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error reported by the parser
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except SpectravolError as exc:
        for types, code in _EXIT_FOR:
            if isinstance(exc, types):
                break
        else:
            code = EXIT_INPUT
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except (ValueError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
