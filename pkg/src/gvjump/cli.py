"""Command-line entry point: ``gvjump <command> [options]``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import RateInputs, kappa_bound, replica_summary, trajectory_batch_means
from .config import ConfigError, load_config
from .engine import SimConfig, gradient_eval_count, simulate_replicas, time_average_quadratic, wedge
from .records import fmt, read_trajectory_csv, write_path_csv, write_table, write_trajectory_csv
from .reference import VerletConfig, verlet
from .rng import RandomStream
from .tilted import ProposalKind, expected_trials, sample_tilted_with
from .validation import format_report, timed_validation

# streams of different grid cells never overlap
CELL_STREAM_STRIDE = 2**32


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--seed", type=int, help="master seed (sim.seed)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--replicas", type=int, help="replicas per run (sim.replicas)")
    p.add_argument("--budget-force-evals", type=int, help="stop each run after N force evaluations (sim.budget)")
    p.add_argument("--log-ghosts", action="store_true", help="record ghost events in trajectory CSVs")


def _resolve(args):
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    if args.replicas is not None:
        overrides.append(f"sim.replicas={args.replicas}")
    if args.budget_force_evals is not None:
        overrides.append(f"sim.budget={args.budget_force_evals}")
    if args.log_ghosts:
        overrides.append("sim.log_ghosts=true")
    cfg = load_config(args.config, overrides)
    if cfg["sim.horizon"] is None and cfg["sim.budget"] is None:
        raise ConfigError("set sim.horizon or sim.budget (or pass --budget-force-evals)")
    args.out.mkdir(parents=True, exist_ok=True)
    cfg.write(args.out / "config.resolved")
    return cfg


def _sim_config(cfg, kernels, cell: int) -> SimConfig:
    return SimConfig(
        kernels=kernels,
        horizon=cfg["sim.horizon"],
        refresh=cfg.refresh(),
        seed=cfg["sim.seed"],
        stream=cell * CELL_STREAM_STRIDE,
        force_budget=cfg["sim.budget"],
        event_cap=cfg["sim.event_cap"],
        log_ghosts=cfg["sim.log_ghosts"],
    )


def cmd_trajectory(args) -> int:
    cfg = _resolve(args)
    pot = cfg.potential()
    init = cfg.initial()
    rows = []
    longest = 0.0
    for cell, eps in enumerate(cfg["epsilon.values"]):
        sim = _sim_config(cfg, cfg.kernels(pot, eps), cell)
        trajs = simulate_replicas(sim, init, cfg["sim.replicas"], cfg["sim.workers"])
        for r, traj in enumerate(trajs):
            name = f"trajectory_eps{eps:g}_r{r}.csv"
            write_trajectory_csv(traj, args.out / name)
            w = wedge(np.vstack((traj.positions, traj.final.x)), np.vstack((traj.velocities, traj.final.v)))
            w0 = float(wedge(init.x, init.v)) if init.x.shape[0] == 2 else float("nan")
            rows.append(
                [
                    name, float(eps), r, float(traj.horizon), traj.count(1), traj.count(2),
                    gradient_eval_count(traj)["total"], time_average_quadratic(traj),
                    float(np.max(np.abs(w - w0))) if init.x.shape[0] == 2 else float("nan"),
                ]
            )
            longest = max(longest, traj.horizon)
    write_table(
        args.out / "trajectory_summary.csv",
        ["file", "eps", "replica", "horizon", "jumps", "refreshes", "force_evals", "time_avg_sq_norm", "max_wedge_drift"],
        rows,
    )
    if cfg["reference.step"] is not None:
        path = verlet(pot, init.x, init.v, VerletConfig(cfg["reference.step"], cfg["sim.horizon"] or longest))
        write_path_csv(path.times, path.positions, path.velocities, args.out / "verlet.csv")
    print(f"wrote {len(rows)} trajectories to {args.out}")
    return 0


def cmd_mixing(args) -> int:
    cfg = _resolve(args)
    init = cfg.initial()
    box, summary = [], []
    cell = 0
    for lam in cfg["mixing.lambdas"]:
        pot = cfg.potential(lam)
        target = 1.0 + (pot.dim - 1) / lam
        for eps in cfg["epsilon.values"]:
            sim = _sim_config(cfg, cfg.kernels(pot, eps), cell)
            cell += 1
            stats = simulate_replicas(
                sim, init, cfg["sim.replicas"], cfg["sim.workers"],
                reduce=lambda tr: (time_average_quadratic(tr), tr.horizon, gradient_eval_count(tr)["total"]),
            )
            for r, (avg, horizon, evals) in enumerate(stats):
                box.append([float(eps), float(lam), r, avg, float(horizon), evals])
            s = replica_summary([a for a, _, _ in stats])
            summary.append(
                [float(eps), float(lam), s["n"], s["median"], s["q1"], s["q3"], s["mean"], s["std"], target]
            )
            print(f"lambda={lam:g} eps={eps:g}: median {s['median']:.4f} (target {target:.4f})")
    write_table(args.out / "mixing_boxplot.csv", ["eps", "lambda", "replica", "time_avg_sq_norm", "horizon", "force_evals"], box)
    write_table(
        args.out / "mixing_summary.csv",
        ["eps", "lambda", "replicas", "median", "q1", "q3", "mean", "std", "target"],
        summary,
    )
    return 0


def cmd_bench_proposals(args) -> int:
    cfg = _resolve_light(args)
    n = cfg["bench.samples"]
    rows = []
    for i, m in enumerate(cfg["bench.ms"]):
        for j, kind in enumerate(ProposalKind):
            if kind.for_negative_m != (m < 0):
                continue
            rng = RandomStream(cfg["sim.seed"], i * len(ProposalKind) + j)
            start = time.perf_counter_ns()
            trials = 0
            for _ in range(n):
                trials += sample_tilted_with(kind, m, rng).trials
            elapsed = time.perf_counter_ns() - start
            rows.append([float(m), kind.value, expected_trials(kind, m), trials / n, elapsed / n])
    write_table(args.out / "proposals.csv", ["m", "kind", "analytic_Cm", "empirical_trials", "ns_per_sample"], rows)
    print(f"wrote {len(rows)} rows to {args.out / 'proposals.csv'}")
    return 0


def _resolve_light(args):
    """Config for commands without a simulation horizon."""
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    cfg = load_config(args.config, overrides)
    args.out.mkdir(parents=True, exist_ok=True)
    cfg.write(args.out / "config.resolved")
    return cfg


def cmd_analyze(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    summary, box = [], []
    for path in args.paths:
        traj = read_trajectory_csv(path)
        kinds = args.observables or (["|X|^2", "X.V"] + [f"X{i + 1}^2" for i in range(traj.dim)])
        for obs in kinds:
            est = trajectory_batch_means(traj, obs, batches=args.batches, burn_in=args.burn_in)
            summary.append([str(path), obs, est.value, est.std_error, est.batches])
            box.append([str(path), obs, time_average_quadratic(traj, obs)])
    write_table(args.out / "summary.csv", ["file", "observable", "value", "std_error", "batches"], summary)
    write_table(args.out / "boxplot.csv", ["file", "observable", "time_average"], box)
    for row in summary:
        print(f"{row[0]}  {row[1]:>6}  {fmt(row[2])} +/- {fmt(row[3])}")
    return 0


def cmd_validate(args) -> int:
    results, elapsed = timed_validation(args.inject_envelope_bug)
    print(format_report(results, elapsed))
    return 0 if all(r.passed for r in results) else 1


def cmd_rate_bound(args) -> int:
    inputs = RateInputs(args.d, args.c_P, args.C1, args.C2, args.eta_lower, args.eta_upper)
    kappa = kappa_bound(inputs)
    header = ["d", "c_P", "C1", "C2", "eta_lower", "eta_upper", "kappa", "inv_kappa"]
    row = [args.d, float(args.c_P), float(args.C1), float(args.C2), float(args.eta_lower), float(args.eta_upper), kappa, 1.0 / kappa]
    print(",".join(header))
    print(",".join(fmt(a) if isinstance(a, float) else str(a) for a in row))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_table(args.out / "rate_bound.csv", header, [row])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gvjump", description="Gaussian velocity-jump samplers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trajectory", help="simulate trajectories (and a Verlet reference)")
    _common(p)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("mixing", help="replica time averages over an eps x lambda grid")
    _common(p)
    p.set_defaults(func=cmd_mixing)

    p = sub.add_parser("bench-proposals", help="trial counts and timing of every tilted proposal")
    p.add_argument("--config", type=Path)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_bench_proposals)

    p = sub.add_parser("analyze", help="batch-means summaries of trajectory CSVs")
    p.add_argument("paths", nargs="+", type=Path)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--observables", nargs="*", help="e.g. '|X|^2' X1^2 X.V")
    p.add_argument("--batches", type=int, default=32)
    p.add_argument("--burn-in", type=float, default=0.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="fast self-checks; nonzero exit on failure")
    p.add_argument("--inject-envelope-bug", action="store_true", help="shrink every C_m by 10%% (must fail)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("rate-bound", help="explicit L2 convergence rate kappa")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--c-P", dest="c_P", type=float, required=True)
    p.add_argument("--C1", type=float, default=0.0)
    p.add_argument("--C2", type=float, default=0.0)
    p.add_argument("--eta-lower", type=float, default=1.0)
    p.add_argument("--eta-upper", type=float, default=1.0)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_rate_bound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
