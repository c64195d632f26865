"""Command-line interface for the experiment pipeline.

Subcommands: equilibria, dataset, run-ic, certify, ablation, bounds, sweep.
Exit codes: 0 success, 2 configuration error, 3 runtime/protocol error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from ..games import GameError, JointType, ProtocolViolation
from ..equilibrium import enumerate_nash, pareto_optimal_nash, worst_pone_for
from . import runner, svgplot
from .config import ConfigError, ExperimentConfig, build_game

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    config = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        config = ExperimentConfig.from_dict({**config.raw, "master_seed": args.seed})
    return config


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_runinfo(out_dir, name, config, elapsed) -> None:
    # Wall-clock lives here, not in the CSVs, so result artifacts stay
    # byte-identical across reruns.
    path = os.path.join(out_dir, f"{name}.runinfo.json")
    with open(path, "w") as f:
        json.dump(
            {"config_hash": config.hash, "master_seed": config.master_seed,
             "wall_clock_s": elapsed},
            f, sort_keys=True, indent=2,
        )
        f.write("\n")


def _emit(rows, columns, out_dir, name, fmt):
    if fmt == "json":
        path = os.path.join(out_dir, f"{name}.json")
        with open(path, "w") as f:
            json.dump(rows, f, sort_keys=True, indent=2)
            f.write("\n")
    else:
        path = os.path.join(out_dir, f"{name}.csv")
        runner.write_csv(path, columns, rows)
    print(f"wrote {path}")
    return path


def cmd_equilibria(args) -> int:
    config = _load_config(args)
    game = build_game(config.require("game"))
    jt = JointType(args.theta1, args.theta2)
    ne = enumerate_nash(jt, game)
    pones = pareto_optimal_nash(ne)
    report = {
        "joint_type": list(jt),
        "nash_equilibria": [
            {"strategy1": list(e.strategy1), "strategy2": list(e.strategy2),
             "payoff1": e.payoff1, "payoff2": e.payoff2}
            for e in ne
        ],
        "pareto_optimal": [
            {"strategy1": list(e.strategy1), "strategy2": list(e.strategy2),
             "payoff1": e.payoff1, "payoff2": e.payoff2}
            for e in pones
        ],
        "worst_pone_for_seat1": None,
        "worst_pone_for_seat2": None,
        "config_hash": config.hash,
    }
    if pones:
        for seat in (1, 2):
            e = worst_pone_for(seat, pones)
            report[f"worst_pone_for_seat{seat}"] = {
                "strategy1": list(e.strategy1), "strategy2": list(e.strategy2),
                "payoff1": e.payoff1, "payoff2": e.payoff2,
            }
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def cmd_dataset(args) -> int:
    config = _load_config(args)
    out_dir = _out_dir(args)
    start = time.monotonic()
    dataset = runner.make_dataset(config, k=args.k)
    path = os.path.join(out_dir, f"{config.experiment_id}-dataset.jsonl")
    dataset.save(path)
    _write_runinfo(out_dir, f"{config.experiment_id}-dataset", config,
                   time.monotonic() - start)
    print(f"K={dataset.k} path={path} sha256={_sha256(path)}")
    return 0


def cmd_run_ic(args) -> int:
    config = _load_config(args)
    out_dir = _out_dir(args)
    bound_delta = bound_epsilon = None
    if args.certification:
        with open(args.certification) as f:
            report = json.load(f)
        bound_delta = report["delta_upper_bound"]
        bound_epsilon = report["epsilon_measured"]
        print(
            "using certified (delta, epsilon) = "
            f"({bound_delta:.4g}, {bound_epsilon:.4g}) in the analytic bound"
        )
    start = time.monotonic()
    rows = runner.run_ic(config, args.dataset, bound_delta, bound_epsilon,
                         threads=args.threads)
    name = f"{config.experiment_id}-ic"
    path = _emit(rows, runner.RESULT_COLUMNS, out_dir, name, args.format)
    _write_runinfo(out_dir, name, config, time.monotonic() - start)
    if args.format == "csv":
        _emit_sweep_plots(rows, out_dir, name, path)
    return 0


def _emit_sweep_plots(rows, out_dir, name, csv_path) -> None:
    ks = sorted({r["k"] for r in rows})
    if len(ks) < 2:
        return
    for metric, label in (
        ("alt_regret_per_step_mean", "mean per-step altruistic regret"),
        ("tv", "imitation TV distance"),
    ):
        series = {}
        for r in rows:
            series.setdefault(f"T~={r['t_tilde']}", []).append((r["k"], r[metric]))
        base = os.path.join(out_dir, f"{name}-{metric}")
        svgplot.render_line_chart(
            series, base + ".svg", title=f"{label} vs K", x_label="K (episodes)",
            y_label=label, log_x=True,
        )
        svgplot.write_plot_manifest(
            base + ".manifest.json", f"{label} vs K", "K (episodes)", label,
            list(series), os.path.basename(csv_path),
        )


def cmd_certify(args) -> int:
    config = _load_config(args)
    out_dir = _out_dir(args)
    start = time.monotonic()
    report = runner.certify(config)
    name = f"{config.experiment_id}-certification"
    path = os.path.join(out_dir, f"{name}.json")
    with open(path, "w") as f:
        f.write(report.to_json() + "\n")
    _write_runinfo(out_dir, name, config, time.monotonic() - start)
    print(f"wrote {path}")
    print(f"pass={report.passed} delta_upper={report.delta_upper_bound:.4g} "
          f"epsilon_measured={report.epsilon_measured:.4g} binding={report.binding_cell}")
    return 0


def cmd_ablation(args) -> int:
    config = _load_config(args)
    out_dir = _out_dir(args)
    start = time.monotonic()
    if args.which == "A_grim_trigger":
        rows = runner.ablation_grim_trigger(config)
        columns = runner.ABLATION_A_COLUMNS
    else:
        rows = runner.ablation_inefficient_cce(config)
        columns = runner.ABLATION_B_COLUMNS
    name = f"{config.experiment_id}-ablation-{args.which}"
    _emit(rows, columns, out_dir, name, args.format)
    _write_runinfo(out_dir, name, config, time.monotonic() - start)
    return 0


def cmd_bounds(args) -> int:
    rows = runner.bounds_table(
        args.n_actions, args.t_tilde, args.horizon, args.n_types, args.k,
        args.delta, args.epsilon,
    )
    if args.out:
        _emit(rows, runner.BOUNDS_COLUMNS, _out_dir(args), "bounds", args.format)
    else:
        print(",".join(runner.BOUNDS_COLUMNS))
        for row in rows:
            print(",".join(runner.fmt(row[c]) for c in runner.BOUNDS_COLUMNS))
    return 0


def cmd_sweep(args) -> int:
    config = _load_config(args)
    out_dir = _out_dir(args)
    start = time.monotonic()
    dataset = runner.make_dataset(config)
    dataset_path = os.path.join(out_dir, f"{config.experiment_id}-dataset.jsonl")
    dataset.save(dataset_path)
    print(f"dataset K={dataset.k} sha256={_sha256(dataset_path)}")
    report = runner.certify(config)
    cert_path = os.path.join(out_dir, f"{config.experiment_id}-certification.json")
    with open(cert_path, "w") as f:
        f.write(report.to_json() + "\n")
    print(f"certification pass={report.passed} "
          f"(delta_upper={report.delta_upper_bound:.4g}, "
          f"epsilon_measured={report.epsilon_measured:.4g})")
    rows = runner.run_ic(
        config, dataset_path,
        bound_delta=report.delta_upper_bound,
        bound_epsilon=report.epsilon_measured,
        threads=args.threads,
    )
    name = f"{config.experiment_id}-ic"
    csv_path = _emit(rows, runner.RESULT_COLUMNS, out_dir, name, args.format)
    if args.format == "csv":
        _emit_sweep_plots(rows, out_dir, name, csv_path)
    _write_runinfo(out_dir, f"{config.experiment_id}-sweep", config,
                   time.monotonic() - start)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socialcoop",
        description="Repeated matrix-game cooperation experiments",
    )
    parser.add_argument("--config", help="path to the experiment config JSON")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="override the config master seed")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibria", help="stage-game equilibrium report")
    p.add_argument("--theta1", type=int, required=True)
    p.add_argument("--theta2", type=int, required=True)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("dataset", help="generate a self-play dataset file")
    p.add_argument("--k", type=int, help="episode count (default: max of k_list)")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("run-ic", help="evaluate the imitate-then-commit sweep")
    p.add_argument("--dataset", help="dataset JSONL to subsample (default: regenerate)")
    p.add_argument("--certification", help="certification JSON supplying (delta, epsilon)")
    p.set_defaults(func=cmd_run_ic)

    p = sub.add_parser("certify", help="certify the configured population")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("ablation", help="run a constructed-population ablation")
    p.add_argument("--which", choices=("A_grim_trigger", "B_inefficient_cce"),
                   required=True)
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("bounds", help="print the analytic bound table")
    p.add_argument("--n-actions", type=int, default=2)
    p.add_argument("--t-tilde", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--n-types", type=int, default=2)
    p.add_argument("--k", type=int, nargs="+", required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="dataset + certify + run-ic composite")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GameError, ProtocolViolation, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
