"""Simulation engine and campaign runner.

A campaign crosses (workload x algorithm x quality-parameter grid), runs many
independent microtasks per point, and aggregates cost / error statistics.
Every run's randomness is derived from the master seed and the point's
coordinates by a counter-based scheme, so adding an algorithm or a grid
point never perturbs existing streams, and all algorithms at one sweep point
consume the identical instance (and crowd-permutation) stream.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import multiprocessing
import random
import zlib
from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance, TallySheet
from .selection import (
    EerConfig,
    EerPolicy,
    Policy,
    RoundRobinPolicy,
    ThompsonPolicy,
    UcbConfig,
    UcbPolicy,
    UnifPolicy,
)
from .stopping import CompositeRule, ThresholdRuleConfig, TotalRuleConfig
from . import workload as workloads

DEFAULT_ROUND_CAP = 1_000_000
DEFAULT_RUNS = 20_000
DEFAULT_THRESHOLDS = tuple(0.25 * i for i in range(1, 21))

ALGORITHMS = ("rr", "ucb", "thompson", "thompson_oracle", "eer", "unif")


def child_seed(master: int, *keys) -> int:
    """Stable per-(algorithm, threshold, run) seed derivation."""
    parts = [int(master) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            parts.append(zlib.crc32(key.encode("utf-8")))
        elif isinstance(key, float):
            parts.append(int(round(key * 1e9)) & 0xFFFFFFFFFFFFFFFF)
        else:
            parts.append(int(key) & 0xFFFFFFFFFFFFFFFF)
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class StoppingSetup:
    """The composite rule configuration for one run: per-crowd instances
    and/or the pooled-votes instance."""

    per_crowd: ThresholdRuleConfig | None
    total: TotalRuleConfig | None

    def __post_init__(self):
        if self.per_crowd is None and self.total is None:
            raise ValueError("need at least one rule instance")


@dataclass(frozen=True)
class RunResult:
    """Outcome of one microtask run."""

    total_cost: float
    rounds: int
    output_option: int | None
    correct: bool
    per_crowd_pulls: tuple[int, ...]
    trigger: int | str | None
    truncated: bool = False


def run_once(
    instance: ProblemInstance,
    policy: Policy,
    stopping: StoppingSetup,
    seed,
    cap: int = DEFAULT_ROUND_CAP,
) -> RunResult:
    """Simulate one microtask: the policy picks a crowd, a vote is sampled
    from that crowd, the composite rule is consulted; repeat until it stops.

    Fully deterministic given the seed. If the rule has not stopped after
    `cap` rounds the run is reported truncated (no output option).
    """
    rng = random.Random(seed) if isinstance(seed, int) else seed
    tally = TallySheet(instance.k, instance.n)
    rule = CompositeRule(stopping.per_crowd, stopping.total)
    cums = instance.cumulative_probs()
    x_star = instance.correct_option
    last_opt = instance.n - 1
    select = policy.select
    observe = policy.observe if getattr(policy, "needs_observe", True) else None
    record = tally.record
    consult = rule.update
    rand = rng.random
    for t in range(1, cap + 1):
        i = select(tally, t, rng)
        u = rand()
        cum = cums[i]
        x = 0
        while x < last_opt and u >= cum[x]:
            x += 1
        record(i, x)
        if observe is not None:
            observe(tally, i, x, rng)
        decision = consult(tally, i, rng)
        if decision is not None:
            costs = instance.costs
            total_cost = 0.0
            for j, pulls in enumerate(tally.pulls):
                total_cost += pulls * costs[j]
            return RunResult(
                float(total_cost),
                tally.round,
                decision.output,
                decision.output == x_star,
                tuple(tally.pulls),
                decision.trigger,
            )
    costs = instance.costs
    total_cost = float(sum(p * c for p, c in zip(tally.pulls, costs)))
    return RunResult(total_cost, tally.round, None, False, tuple(tally.pulls), None, True)


@dataclass(frozen=True)
class AlgorithmSpec:
    """A selection algorithm plus its parameters (hashable, pickles cleanly)."""

    name: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}; choose from {ALGORITHMS}")

    def param(self, key: str, default: float) -> float:
        for k, v in self.params:
            if k == key:
                return v
        return default


def make_policy(
    spec: AlgorithmSpec, instance: ProblemInstance, quality: float, smooth: bool
) -> Policy:
    costs = instance.costs.tolist()
    if spec.name == "rr":
        return RoundRobinPolicy(costs)
    if spec.name == "ucb":
        cfg = UcbConfig(
            exploration=spec.param("exploration", 1.0),
            theory_schedule=bool(spec.param("theory_schedule", 0.0)),
        )
        return UcbPolicy(costs, cfg)
    if spec.name == "thompson":
        return ThompsonPolicy(costs)
    if spec.name == "thompson_oracle":
        # simulation-reproduction mode: the Beta is anchored on the true option
        return ThompsonPolicy(costs, anchor_option=instance.correct_option)
    if spec.name == "eer":
        ratio = spec.param("low_quality_ratio", 3.0)
        cfg = EerConfig(quality / ratio, spec.param("exploit_multiplier", 3.0))
        return EerPolicy(costs, cfg, quality, smooth)
    if spec.name == "unif":
        return UnifPolicy(costs, instance.n)
    raise ValueError(spec.name)


@dataclass(frozen=True)
class CampaignConfig:
    """One campaign: a workload, algorithms, a quality grid, and run counts."""

    workload_kind: str
    workload_params: tuple[tuple[str, object], ...]
    algorithms: tuple[AlgorithmSpec, ...]
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    runs: int = DEFAULT_RUNS
    master_seed: int = 0
    smooth: bool = True
    adaptive_delta: float | None = None
    per_crowd_rule: bool = True
    total_rule: bool = True
    total_horizon: int = DEFAULT_ROUND_CAP
    round_cap: int = DEFAULT_ROUND_CAP
    output_path: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.thresholds:
            raise ValueError("threshold grid must be non-empty")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")

    def workload_param(self, key: str, default=None):
        for k, v in self.workload_params:
            if k == key:
                return v
        return default

    def stopping_for(self, quality: float) -> StoppingSetup:
        per_crowd = (
            ThresholdRuleConfig(quality, self.smooth, self.adaptive_delta)
            if self.per_crowd_rule
            else None
        )
        total = TotalRuleConfig(quality, self.total_horizon) if self.total_rule else None
        return StoppingSetup(per_crowd, total)


def build_workload(config: CampaignConfig) -> list[ProblemInstance]:
    """The instance stream for one campaign: `runs` instances, derived from the
    master seed, shared by every (algorithm, threshold) point."""
    seed = child_seed(config.master_seed, "workload")
    kind = config.workload_kind
    if kind == "fixed_bias":
        biases = tuple(config.workload_param("biases"))
        costs = config.workload_param("costs")
        spec = (
            workloads.BiasSpec(biases, tuple(costs))
            if costs is not None
            else workloads.BiasSpec.uniform_costs(biases)
        )
        return workloads.fixed_bias_workload(spec, config.runs, seed)
    if kind == "uniform_gap":
        lo = float(config.workload_param("lo", 0.05))
        hi = float(config.workload_param("hi", 1.0))
        return workloads.uniform_gap_workload(config.runs, lo, hi, seed)
    if kind == "uniform_bias":
        lo = float(config.workload_param("lo", 0.05))
        hi = float(config.workload_param("hi", 1.0))
        return workloads.uniform_bias_workload(config.runs, lo, hi, seed)
    if kind == "mixture_advantage":
        eps = float(config.workload_param("epsilon", 0.01))
        return [workloads.mixture_advantage_instance(eps)] * config.runs
    raise ValueError(f"unknown workload kind {kind!r}")


def instance_checksum(instances) -> str:
    """Digest of an instance stream; equal digests mean algorithms consumed
    identical instances and crowd orderings."""
    h = hashlib.sha256()
    for inst in instances:
        for crowd in inst.crowds:
            h.update(crowd.probs.tobytes())
        h.update(inst.costs.tobytes())
        h.update(bytes([inst.correct_option]))
    return h.hexdigest()


@dataclass(frozen=True)
class SweepRecord:
    """Aggregate of one (algorithm, quality) sweep point.

    runs counts completed (non-truncated) runs; averages are over those.
    norm_cost is avg_cost divided by the rr baseline's cost at the same error
    rate (piecewise-linear interpolation of rr's error->cost curve), present
    only when rr ran in the same sweep and the error rate lies in its range.
    """

    quality: float
    algorithm: str
    avg_cost: float
    std_err_cost: float
    error_rate: float
    norm_cost: float | None
    runs: int
    truncated: int


@dataclass(frozen=True)
class SweepReport:
    records: tuple[SweepRecord, ...]
    stream_checksum: str


def _point_record(config: CampaignConfig, instances, spec: AlgorithmSpec, quality: float):
    stopping = config.stopping_for(quality)
    costs = []
    incorrect = 0
    truncated = 0
    for r, instance in enumerate(instances):
        seed = child_seed(config.master_seed, "run", spec.name, quality, r)
        policy = make_policy(spec, instance, quality, config.smooth)
        result = run_once(instance, policy, stopping, seed, config.round_cap)
        if result.truncated:
            truncated += 1
            continue
        costs.append(result.total_cost)
        if not result.correct:
            incorrect += 1
    completed = len(costs)
    arr = np.asarray(costs)
    avg = float(arr.mean()) if completed else math.nan
    se = float(arr.std(ddof=1) / math.sqrt(completed)) if completed > 1 else math.nan
    err = incorrect / completed if completed else math.nan
    return SweepRecord(quality, spec.name, avg, se, err, None, completed, truncated)


_POOL_STATE: dict = {}


def _init_pool(config, instances):
    _POOL_STATE["config"] = config
    _POOL_STATE["instances"] = instances


def _pool_point(point):
    spec, quality = point
    return _point_record(_POOL_STATE["config"], _POOL_STATE["instances"], spec, quality)


def _with_norm_costs(records: list[SweepRecord]) -> list[SweepRecord]:
    rr_points = sorted(
        [(r.error_rate, r.avg_cost) for r in records if r.algorithm == "rr" and r.runs > 0]
    )
    if not rr_points:
        return records
    xs = np.asarray([p[0] for p in rr_points])
    ys = np.asarray([p[1] for p in rr_points])
    out = []
    for rec in records:
        if rec.runs == 0 or not xs.size or rec.error_rate < xs[0] or rec.error_rate > xs[-1]:
            out.append(rec)
            continue
        baseline = float(np.interp(rec.error_rate, xs, ys))
        norm = rec.avg_cost / baseline if baseline > 0 else None
        out.append(
            SweepRecord(
                rec.quality,
                rec.algorithm,
                rec.avg_cost,
                rec.std_err_cost,
                rec.error_rate,
                norm,
                rec.runs,
                rec.truncated,
            )
        )
    return out


def sweep(config: CampaignConfig, threads: int = 1) -> SweepReport:
    """Run the full (algorithm x threshold) grid of a campaign.

    Points are independent; with threads > 1 they run in worker processes,
    and results reduce in fixed point order so parallel and serial execution
    produce identical reports.
    """
    instances = build_workload(config)
    checksum = instance_checksum(instances)
    points = [(spec, q) for spec in config.algorithms for q in config.thresholds]
    if threads > 1 and len(points) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(
            min(threads, len(points)), initializer=_init_pool, initargs=(config, instances)
        ) as pool:
            records = pool.map(_pool_point, points)
    else:
        records = [_point_record(config, instances, spec, q) for spec, q in points]
    records = _with_norm_costs(records)
    return SweepReport(tuple(records), checksum)


CSV_HEADER = "threshold,algorithm,avg_cost,std_err_cost,error_rate,norm_cost,runs"


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def emit_csv(records, destination) -> None:
    """Write sweep records as CSV: pinned header, rows sorted by
    (algorithm, threshold), 6 significant digits, LF line endings.
    Re-running an identical campaign yields a byte-identical file."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    rows = sorted(records, key=lambda r: (r.algorithm, r.quality))
    with open(destination, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            norm = "" if r.norm_cost is None else _fmt(r.norm_cost)
            fh.write(
                f"{_fmt(r.quality)},{r.algorithm},{_fmt(r.avg_cost)},"
                f"{_fmt(r.std_err_cost)},{_fmt(r.error_rate)},{norm},{r.runs}\n"
            )


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def load_campaign_config(path) -> CampaignConfig:
    """Parse a campaign config file (INI sections: workload, algorithms,
    stopping, sweep, output)."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    wl = cp["workload"]
    kind = wl.get("kind", "fixed_bias")
    params: list[tuple[str, object]] = []
    if kind == "fixed_bias":
        params.append(("biases", _parse_floats(wl.get("biases", "0.3 0 0"))))
        if wl.get("costs") is not None:
            params.append(("costs", _parse_floats(wl["costs"])))
    elif kind in ("uniform_gap", "uniform_bias"):
        params.append(("lo", wl.getfloat("lo", 0.05)))
        params.append(("hi", wl.getfloat("hi", 1.0)))
    elif kind == "mixture_advantage":
        params.append(("epsilon", wl.getfloat("epsilon", 0.01)))
    algos = cp["algorithms"] if cp.has_section("algorithms") else {}
    names = (algos.get("names", "rr ucb thompson") if algos else "rr ucb thompson").replace(
        ",", " "
    ).split()
    specs = []
    for name in names:
        p: list[tuple[str, float]] = []
        if name == "ucb" and algos:
            p.append(("exploration", float(algos.get("ucb_exploration", "1.0"))))
        if name == "eer" and algos:
            p.append(("low_quality_ratio", float(algos.get("eer_low_quality_ratio", "3.0"))))
            p.append(("exploit_multiplier", float(algos.get("eer_exploit_multiplier", "3.0"))))
        specs.append(AlgorithmSpec(name, tuple(p)))
    stop = cp["stopping"] if cp.has_section("stopping") else {}
    sweep_sec = cp["sweep"] if cp.has_section("sweep") else {}
    out = cp["output"] if cp.has_section("output") else {}
    thresholds = (
        _parse_floats(sweep_sec.get("thresholds", ""))
        if sweep_sec and sweep_sec.get("thresholds")
        else DEFAULT_THRESHOLDS
    )
    adaptive = stop.get("adaptive_delta") if stop else None
    return CampaignConfig(
        workload_kind=kind,
        workload_params=tuple(params),
        algorithms=tuple(specs),
        thresholds=thresholds,
        runs=int(sweep_sec.get("runs", DEFAULT_RUNS)) if sweep_sec else DEFAULT_RUNS,
        master_seed=int(sweep_sec.get("seed", 0)) if sweep_sec else 0,
        smooth=_get_bool(stop, "smooth", True),
        adaptive_delta=float(adaptive) if adaptive else None,
        per_crowd_rule=_get_bool(stop, "per_crowd", True),
        total_rule=_get_bool(stop, "total", True),
        total_horizon=int(stop.get("total_horizon", DEFAULT_ROUND_CAP)) if stop else DEFAULT_ROUND_CAP,
        round_cap=int(stop.get("round_cap", DEFAULT_ROUND_CAP)) if stop else DEFAULT_ROUND_CAP,
        output_path=out.get("path") if out else None,
    )


def _get_bool(section, key: str, default: bool) -> bool:
    if not section:
        return default
    raw = section.get(key)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")
