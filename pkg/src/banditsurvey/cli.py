"""Command-line interface: campaign simulation, benchmarks, oracle fixtures,
and judgment-log ingestion."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .benchmark import deterministic_benchmark, randomized_benchmark
from .experiment import emit_csv, load_campaign_config, sweep
from .oracle import exact_rule_stats
from .stopping import ThresholdRuleConfig, TotalRuleConfig
from .workload import (
    BiasSpec,
    ingest_judgments,
    mixture_advantage_instance,
    read_judgments_csv,
    write_gap_cdf_csv,
)
from .core import ProblemInstance, ResponseDistribution


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--runs", type=int, default=None, help="runs per sweep point override")
    p.add_argument("--out", default=None, help="output file override")
    p.add_argument("--threads", type=int, default=1, help="worker processes for sweep points")


def _campaign_from_args(args, single_threshold: bool):
    config = load_campaign_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.runs is not None:
        config = replace(config, runs=args.runs)
    if args.out is not None:
        config = replace(config, output_path=args.out)
    if single_threshold:
        quality = args.threshold if args.threshold is not None else config.thresholds[0]
        config = replace(config, thresholds=(quality,))
    return config


def _cmd_simulate(args) -> int:
    config = _campaign_from_args(args, single_threshold=True)
    report = sweep(config, threads=args.threads)
    return _finish_sweep(report, config)


def _cmd_sweep(args) -> int:
    config = _campaign_from_args(args, single_threshold=False)
    report = sweep(config, threads=args.threads)
    return _finish_sweep(report, config)


def _finish_sweep(report, config) -> int:
    for rec in report.records:
        norm = "" if rec.norm_cost is None else f" norm={rec.norm_cost:.4f}"
        print(
            f"{rec.algorithm:9s} threshold={rec.quality:<6g} cost={rec.avg_cost:.4f} "
            f"error={rec.error_rate:.4f}{norm} runs={rec.runs} truncated={rec.truncated}"
        )
    print(f"instance stream checksum: {report.stream_checksum[:16]}")
    if config.output_path:
        emit_csv(report.records, config.output_path)
        print(f"wrote {config.output_path}")
    return 0


def _benchmark_instance(args) -> ProblemInstance:
    if args.epsilon is not None:
        return mixture_advantage_instance(args.epsilon)
    if args.biases:
        biases = tuple(float(b) for b in args.biases.replace(",", " ").split())
        costs = (
            tuple(float(c) for c in args.costs.replace(",", " ").split())
            if args.costs
            else tuple(1.0 for _ in biases)
        )
        spec = BiasSpec(biases, costs)
        return ProblemInstance(
            [ResponseDistribution((0.5 + b, 0.5 - b)) for b in spec.biases],
            spec.costs,
            correct_option=0,
        )
    raise SystemExit("benchmark needs --epsilon (three-option instance) or --biases")


def _cmd_benchmark(args) -> int:
    instance = _benchmark_instance(args)
    runs = args.runs or 20_000
    seed = args.seed if args.seed is not None else 0
    rule = ThresholdRuleConfig(args.quality, smooth=args.smooth)
    total = TotalRuleConfig(args.quality, args.horizon)
    det = deterministic_benchmark(instance, rule, runs=runs, rng=seed, cap=args.cap)
    rand = randomized_benchmark(
        instance, total, grid_m=args.grid_m, runs=runs, rng=seed + 1, cap=args.cap
    )
    lines = ["kind,spec,avg_cost,std_err,truncated,runs"]
    for i, (cost, se) in enumerate(det.per_crowd_cost):
        lines.append(
            f"crowd,{i},{cost:.6g},{se:.6g},{det.per_crowd_truncated[i]:.6g},{det.runs}"
        )
    for mu, cost, se in rand.per_mu:
        label = "|".join(f"{w:.6g}" for w in mu)
        lines.append(f"mu,{label},{cost:.6g},{se:.6g},0,{rand.runs}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    print(f"best crowd: {det.best_crowd} (cost {det.per_crowd_cost[det.best_crowd][0]:.4f})")
    print(f"best mu: {rand.best_mu} (cost {rand.best_mu_cost[0]:.4f})")
    return 0


def _cmd_oracle(args) -> int:
    ps = [float(x) for x in args.p.replace(",", " ").split()]
    qs = [float(x) for x in args.quality.replace(",", " ").split()]
    lines = ["p,quality,horizon,expected_stop_time,error_rate,stop_mass"]
    for p in ps:
        for q in qs:
            stats = exact_rule_stats(p, q, args.horizon, smooth=args.smooth)
            lines.append(
                f"{p:.6g},{q:.6g},{args.horizon},{stats.expected_stop_time:.6g},"
                f"{stats.error_rate:.6g},{stats.stop_mass:.6g}"
            )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_gapcdf(args) -> int:
    rows = read_judgments_csv(args.input)
    result = ingest_judgments(rows)
    if args.out:
        write_gap_cdf_csv(result, args.out)
        print(f"wrote {args.out}")
    print(
        f"tasks={len(result.rows)} skipped={result.skipped} "
        f"slope={result.slope:.6g} intercept={result.intercept:.6g} "
        f"r_squared={result.r_squared:.4f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditsurvey",
        description="Adaptive crowd selection and stopping rules for multiple-choice microtasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one campaign point from a config file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--threshold", type=float, default=None, help="quality parameter")
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a campaign over its quality-parameter grid")
    p_sweep.add_argument("--config", required=True)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bench = sub.add_parser("benchmark", help="estimate per-crowd and per-mixture costs")
    p_bench.add_argument("--epsilon", type=float, default=None, help="two-crowd three-option instance")
    p_bench.add_argument("--biases", default=None, help="two-option crowd biases, e.g. '0.3 0 0'")
    p_bench.add_argument("--costs", default=None, help="per-crowd costs (defaults to uniform)")
    p_bench.add_argument("--quality", type=float, default=2.0)
    p_bench.add_argument("--smooth", action="store_true")
    p_bench.add_argument("--grid-m", type=int, default=20, help="simplex grid denominator")
    p_bench.add_argument("--horizon", type=int, default=100_000)
    p_bench.add_argument("--cap", type=int, default=200_000)
    _add_common(p_bench)
    p_bench.set_defaults(func=_cmd_benchmark)

    p_oracle = sub.add_parser("oracle", help="emit exact rule statistics as fixture CSV")
    p_oracle.add_argument("--p", default="0.55 0.65 0.8", help="correct-option probabilities")
    p_oracle.add_argument("--quality", default="1 2 3", help="quality parameters")
    p_oracle.add_argument("--horizon", type=int, default=100_000)
    p_oracle.add_argument("--smooth", action="store_true")
    p_oracle.add_argument("--out", default=None)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_gap = sub.add_parser("gapcdf", help="rank tasks of a judgment log by empirical gap")
    p_gap.add_argument("--input", required=True, help="CSV with task_id,worker_id,option")
    p_gap.add_argument("--out", default=None, help="output CSV (rank,empirical_gap)")
    p_gap.set_defaults(func=_cmd_gapcdf)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
