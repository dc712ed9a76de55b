"""Command-line front end: every computation as a deterministic subcommand.

Curves and grids go to CSV, reports to JSON, and each output file gets a
sidecar manifest (config echo, version, input digests).  Outputs contain no
wall-clock data, so re-running a subcommand with identical flags produces
byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .data import (
    InsufficientSweep,
    ParseError,
    aggregate,
    bundled_experiments_path,
    classify_against_qre,
    load_experiments,
)
from .game import DegenerateChain, MarkovStrategy
from .nash import trace_quadratic_curve, trace_stationarity_curve
from .qre import (
    QrePoint,
    SolverConfig,
    find_intersections,
    objective_grid,
    sweep_lambda,
)
from .simulate import SimulationConfig, estimate_markov, export_log, simulate

__all__ = ["build_parser", "main"]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(output: Path, subcommand: str, config: dict, inputs=()) -> None:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": config,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "timestamp": None,  # omitted by design: outputs must be byte-stable
    }
    _write_json(Path(str(output) + ".manifest.json"), manifest)


def _float_grid(lo: float, hi: float, step: float, what: str) -> list[float]:
    if step <= 0.0:
        raise ValueError(f"{what} step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"{what} range is empty: [{lo}, {hi}]")
    n = int(round((hi - lo) / step))
    values = [lo + k * step for k in range(n + 1)]
    if values[-1] > hi + 1e-12:
        values.pop()
    if not values:
        raise ValueError(f"{what} grid is empty")
    return values


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        grid_size=args.grid_size,
        damping=args.damping,
        accept_tol=args.accept_tol,
        merge_tol=args.merge_tol,
        include_candidates=not args.no_candidates,
        candidate_ceiling=args.candidate_ceiling,
        curve_choice=args.curve,
    )


def _add_solver_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--grid-size", type=int, default=21, help="starts per axis")
    sub.add_argument("--damping", type=float, default=0.5, help="fixed-point damping")
    sub.add_argument("--accept-tol", type=float, default=1e-12, help="acceptance objective")
    sub.add_argument("--merge-tol", type=float, default=1e-4, help="solution merge radius")
    sub.add_argument(
        "--candidate-ceiling",
        type=float,
        default=0.05,
        help="max objective for reported non-exact local minima",
    )
    sub.add_argument(
        "--no-candidates",
        action="store_true",
        help="report exact equilibria only",
    )
    sub.add_argument(
        "--curve",
        choices=["quadratic", "stationarity"],
        default="stationarity",
        help="Nash curve used for branch labels",
    )


def _cmd_nash_curve(args: argparse.Namespace) -> int:
    gammas = _float_grid(args.gamma_min, args.gamma_max, args.gamma_step, "gamma")
    tracers = {"quadratic": trace_quadratic_curve, "stationarity": trace_stationarity_curve}
    wanted = ["quadratic", "stationarity"] if args.curve == "both" else [args.curve]
    lines = ["curve,alpha,gamma,branch,quadratic_residual,stationarity_residual"]
    for name in wanted:
        for p in tracers[name](gammas):
            lines.append(
                f"{name},{_fmt(p.alpha)},{_fmt(p.gamma)},{p.branch},"
                f"{_fmt(p.quadratic_residual)},{_fmt(p.stationarity_residual)}"
            )
    out = Path(args.output)
    _write_text(out, "\n".join(lines) + "\n")
    _write_manifest(
        out,
        "nash-curve",
        {
            "curve": args.curve,
            "gamma_min": args.gamma_min,
            "gamma_max": args.gamma_max,
            "gamma_step": args.gamma_step,
        },
    )
    print(f"wrote {len(lines) - 1} curve points to {out}")
    return 0


def _point_rows(points: list[QrePoint]) -> list[str]:
    return [
        f"{_fmt(p.lam)},{_fmt(p.alpha)},{_fmt(p.gamma)},{_fmt(p.objective)},"
        f"{p.branch},{str(p.accepted).lower()},{p.start_count}"
        for p in points
    ]


SWEEP_HEADER = "lambda,alpha,gamma,objective,branch,accepted,start_count"


def _cmd_qre_sweep(args: argparse.Namespace) -> int:
    lambdas = _float_grid(args.lambda_min, args.lambda_max, args.lambda_step, "lambda")
    cfg = _solver_config(args)
    sweep = sweep_lambda(lambdas, cfg)
    out = Path(args.output)
    _write_text(out, "\n".join([SWEEP_HEADER] + _point_rows(sweep.points)) + "\n")

    report = {
        "lambda_grid": {
            "min": args.lambda_min,
            "max": args.lambda_max,
            "step": args.lambda_step,
        },
        "transition_lambda": _round12(sweep.transition_lambda)
        if sweep.transition_lambda is not None
        else None,
        "discontinuities": [_round12(v) for v in sweep.discontinuities],
        "no_solution": [_round12(v) for v in sweep.no_solution],
        "diagnostics": sweep.diagnostics,
        "intersections": {},
    }
    for choice in ("stationarity", "quadratic"):
        events = find_intersections(sweep, choice, tol=args.intersection_tol)
        report["intersections"][choice] = [
            {
                "lambda": _round12(e.lam),
                "alpha": _round12(e.alpha),
                "gamma": _round12(e.gamma),
                "residual": _round12(e.residual),
                "kind": e.kind,
                "first": e.first,
            }
            for e in events
        ]
    firsts = {
        c: next((e for e in v if e["first"]), None)
        for c, v in report["intersections"].items()
    }
    fs, fq = firsts["stationarity"], firsts["quadratic"]
    agree = (
        fs is not None
        and fq is not None
        and abs(fs["lambda"] - fq["lambda"]) < args.intersection_tol
    ) or (fs is None and fq is None)
    report["curve_comparison"] = {
        "first_stationarity_lambda": fs["lambda"] if fs else None,
        "first_quadratic_lambda": fq["lambda"] if fq else None,
        "agree": agree,
        "note": (
            "both Nash-curve variants give consistent intersections"
            if agree
            else "the two Nash-curve variants disagree about intersections "
            "with the QRE branch"
        ),
    }
    report_path = Path(args.report) if args.report else Path(str(out) + ".report.json")
    _write_json(report_path, report)
    config_echo = {
        "lambda_min": args.lambda_min,
        "lambda_max": args.lambda_max,
        "lambda_step": args.lambda_step,
        "intersection_tol": args.intersection_tol,
        **{k: getattr(args, k) for k in (
            "grid_size", "damping", "accept_tol", "merge_tol",
            "candidate_ceiling", "no_candidates", "curve",
        )},
    }
    _write_manifest(out, "qre-sweep", config_echo)
    _write_manifest(report_path, "qre-sweep", config_echo)
    print(
        f"wrote {len(sweep.points)} points to {out}; "
        f"transition_lambda={report['transition_lambda']}"
    )
    return 0


def _cmd_objective_grid(args: argparse.Namespace) -> int:
    if args.mesh < 2:
        raise ValueError(f"mesh must have at least 2 nodes per axis, got {args.mesh}")
    a, g, f, clamped = objective_grid(args.rationality, args.mesh)
    lines = ["alpha,gamma,objective,clamped"]
    lines.extend(
        f"{_fmt(a[i])},{_fmt(g[i])},{_fmt(f[i])},{str(bool(clamped[i])).lower()}"
        for i in range(len(a))
    )
    out = Path(args.output)
    _write_text(out, "\n".join(lines) + "\n")
    _write_manifest(
        out,
        "objective-grid",
        {"rationality": args.rationality, "mesh": args.mesh},
    )
    print(f"wrote {len(a)} grid nodes to {out}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    s1 = MarkovStrategy(args.alpha1, args.gamma1)
    s2 = MarkovStrategy(
        args.alpha2 if args.alpha2 is not None else args.alpha1,
        args.gamma2 if args.gamma2 is not None else args.gamma1,
    )
    config = SimulationConfig(
        rounds=args.rounds,
        seed=args.seed,
        initial_coop_prob=(args.initial_coop[0], args.initial_coop[1]),
    )
    log = simulate(s1, s2, config)
    out = Path(args.output)
    export_log(log, out)
    _write_manifest(
        out,
        "simulate",
        {
            "strategy1": [s1.alpha, s1.gamma],
            "strategy2": [s2.alpha, s2.gamma],
            "rounds": args.rounds,
            "seed": args.seed,
            "initial_coop_prob": list(args.initial_coop),
            "burn_in": args.burn_in,
        },
    )
    est1, est2 = estimate_markov(log)
    burn = min(args.burn_in, log.rounds - 1)
    print(
        f"cooperation_rate1={_fmt(log.cooperation_rate(1, burn))} "
        f"cooperation_rate2={_fmt(log.cooperation_rate(2, burn))} "
        f"alpha1_hat={_fmt(est1.alpha) if est1.alpha is not None else 'NA'} "
        f"gamma1_hat={_fmt(est1.gamma) if est1.gamma is not None else 'NA'} "
        f"alpha2_hat={_fmt(est2.alpha) if est2.alpha is not None else 'NA'} "
        f"gamma2_hat={_fmt(est2.gamma) if est2.gamma is not None else 'NA'}"
    )
    return 0


def _read_sweep_csv(path: Path) -> list[QrePoint]:
    if not path.exists():
        raise InsufficientSweep(f"sweep file not found: {path}")
    points = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != SWEEP_HEADER:
            raise InsufficientSweep(
                f"unexpected sweep header in {path}: {header!r}"
            )
        for line in fh:
            line = line.strip()
            if not line:
                continue
            lam, alpha, gamma, objective, branch, accepted, start_count = line.split(",")
            points.append(
                QrePoint(
                    lam=float(lam),
                    alpha=float(alpha),
                    gamma=float(gamma),
                    objective=float(objective),
                    accepted=accepted == "true",
                    branch=branch,
                    start_count=int(start_count),
                )
            )
    return points


def _cmd_classify(args: argparse.Namespace) -> int:
    data_path = Path(args.data) if args.data else bundled_experiments_path()
    records = load_experiments(data_path)
    if args.sweep:
        points = _read_sweep_csv(Path(args.sweep))
        sweep_inputs = [Path(args.sweep)]
    else:
        lambdas = _float_grid(0.0, args.lambda_max, args.lambda_step, "lambda")
        points = sweep_lambda(lambdas, SolverConfig()).points
        sweep_inputs = []
    report = classify_against_qre(records, points, lambda_max=args.lambda_max)
    aggregates = aggregate(records)

    payload = {
        "n_records": len(records),
        "lambda_max": report.lambda_max,
        "interpolation": report.interpolation,
        "separation_score": _round12(report.separation_score),
        "counts": report.counts,
        "aggregates": {
            phase: {
                "coop_rate": _round12(agg.coop_rate),
                "coop_rate_percent": _round12(agg.coop_rate * 100.0),
                "alpha": _round12(agg.alpha),
                "gamma": _round12(agg.gamma),
                "count": agg.count,
            }
            for phase, agg in aggregates.items()
        },
        "records": [
            {
                "experiment_id": c.record.experiment_id,
                "phase": c.record.phase,
                "alpha": _round12(c.record.alpha),
                "gamma": _round12(c.record.gamma),
                "side": c.side,
                "boundary_gamma": _round12(c.boundary_gamma),
                "distance": _round12(c.distance),
                "extrapolated": c.extrapolated,
                "borderline": c.borderline,
            }
            for c in report.classifications
        ],
    }
    out = Path(args.output)
    _write_json(out, payload)
    _write_manifest(
        out,
        "classify",
        {
            "data": str(data_path),
            "sweep": args.sweep,
            "lambda_max": args.lambda_max,
            "lambda_step": args.lambda_step,
        },
        inputs=[data_path, *sweep_inputs],
    )
    print(
        f"classified {len(records)} records; "
        f"separation_score={_fmt(report.separation_score)}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdqre",
        description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"pdqre {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    nash = subs.add_parser(
        "nash-curve",
        help="trace the symmetric Nash curve(s) over a gamma grid",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    nash.add_argument("--curve", choices=["quadratic", "stationarity", "both"], default="both")
    nash.add_argument("--gamma-min", type=float, default=0.0)
    nash.add_argument("--gamma-max", type=float, default=1.0)
    nash.add_argument("--gamma-step", type=float, default=0.001)
    nash.add_argument("--output", required=True, help="CSV output path")
    nash.set_defaults(handler=_cmd_nash_curve)

    sweep = subs.add_parser(
        "qre-sweep",
        help="solve the QRE system over a rationality grid",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sweep.add_argument("--lambda-min", type=float, default=0.0)
    sweep.add_argument("--lambda-max", type=float, default=10.0)
    sweep.add_argument("--lambda-step", type=float, default=0.01)
    sweep.add_argument(
        "--intersection-tol",
        type=float,
        default=0.05,
        help="residual magnitude that counts as reaching the Nash curve",
    )
    _add_solver_flags(sweep)
    sweep.add_argument("--output", required=True, help="CSV output path")
    sweep.add_argument("--report", default=None, help="JSON report path (default: <output>.report.json)")
    sweep.set_defaults(handler=_cmd_qre_sweep)

    grid = subs.add_parser(
        "objective-grid",
        help="export the QRE objective over a mesh at fixed rationality",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    grid.add_argument("--rationality", type=float, required=True, help="lambda value")
    grid.add_argument("--mesh", type=int, default=201, help="nodes per axis")
    grid.add_argument("--output", required=True, help="CSV output path")
    grid.set_defaults(handler=_cmd_objective_grid)

    sim = subs.add_parser(
        "simulate",
        help="play a seeded iterated game between two Markov strategies",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sim.add_argument("--alpha1", type=float, required=True)
    sim.add_argument("--gamma1", type=float, required=True)
    sim.add_argument("--alpha2", type=float, default=None, help="defaults to --alpha1")
    sim.add_argument("--gamma2", type=float, default=None, help="defaults to --gamma1")
    sim.add_argument("--rounds", type=int, default=10000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument(
        "--initial-coop",
        type=float,
        nargs=2,
        default=[0.5, 0.5],
        metavar=("P1", "P2"),
        help="round-1 cooperation probabilities",
    )
    sim.add_argument("--burn-in", type=int, default=1000, help="rounds dropped from the summary")
    sim.add_argument("--output", required=True, help="log CSV output path")
    sim.set_defaults(handler=_cmd_simulate)

    cls = subs.add_parser(
        "classify",
        help="classify experimental records against the QRE boundary",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    cls.add_argument("--data", default=None, help="experiments CSV (default: bundled table)")
    cls.add_argument(
        "--sweep",
        default=None,
        help="qre-sweep CSV to use as boundary (default: compute internally)",
    )
    cls.add_argument("--lambda-max", type=float, default=4.0)
    cls.add_argument(
        "--lambda-step",
        type=float,
        default=0.01,
        help="grid step for the internally computed sweep",
    )
    cls.add_argument("--output", required=True, help="JSON report path")
    cls.set_defaults(handler=_cmd_classify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (
        ValueError,
        DegenerateChain,
        ParseError,
        InsufficientSweep,
        OSError,
    ) as err:
        payload = {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
