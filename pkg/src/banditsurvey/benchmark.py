"""Omniscient benchmarks: the best fixed crowd and the best fixed mixture.

Both benchmarks feed a single data stream to one stopping-rule instance and
are estimated by Monte Carlo over many independent runs (the stopped
processes have no closed form). Runs are vectorized across the batch, which
matters because a gap-g crowd needs on the order of (quality/g)^2 rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance, mix
from .selection import simplex_grid
from .stopping import ThresholdRuleConfig, TotalRuleConfig


class NoInformationError(ValueError):
    """Every crowd has gap zero: no crowd carries information about the answer."""


@dataclass
class StreamResult:
    """Per-run outcomes of one rule instance fed one data stream.

    rounds holds min(stop time, cap); runs still alive at the cap are
    truncated (not stopped) and contribute the cap to cost estimates, a lower
    bound on their true divergent cost.
    """

    rounds: np.ndarray
    stopped: np.ndarray
    wrong: np.ndarray
    cost: np.ndarray

    @property
    def runs(self) -> int:
        return self.rounds.shape[0]

    @property
    def truncated_fraction(self) -> float:
        return 1.0 - float(self.stopped.mean())

    def mean_cost(self) -> tuple[float, float]:
        """Average total cost and its standard error (capped runs included)."""
        m = float(self.cost.mean())
        se = float(self.cost.std(ddof=1) / math.sqrt(self.runs)) if self.runs > 1 else 0.0
        return m, se

    def mean_rounds_stopped(self) -> tuple[float, float]:
        """Average stop time over stopped runs, with standard error."""
        taus = self.rounds[self.stopped].astype(float)
        if taus.size == 0:
            return math.nan, math.nan
        se = float(taus.std(ddof=1) / math.sqrt(taus.size)) if taus.size > 1 else 0.0
        return float(taus.mean()), se

    def error_rate(self) -> tuple[float, float]:
        """Fraction of runs stopped with a wrong majority, with standard error."""
        p = float(self.wrong.mean())
        se = math.sqrt(p * (1.0 - p) / self.runs)
        return p, se


def _rule_mode(rule) -> tuple[float, bool, float | None, int | None]:
    """(quality, smooth, adaptive_delta, forced_horizon) for either rule kind.

    On a single stream the per-crowd rule and the pooled rule coincide (the
    instance's sample count is the round number), so both configs drive the
    same simulation, the pooled one adding its forced stop at the horizon.
    """
    if isinstance(rule, ThresholdRuleConfig):
        return rule.quality, rule.smooth, rule.adaptive_delta, None
    if isinstance(rule, TotalRuleConfig):
        return rule.quality, False, None, rule.horizon
    raise TypeError(f"unsupported rule config: {rule!r}")


def simulate_stream(
    probs,
    correct_option: int,
    rule,
    runs: int,
    rng,
    cap: int = 200_000,
    crowd_mix: tuple | None = None,
) -> StreamResult:
    """Run one stopping-rule instance on `runs` i.i.d. streams from `probs`.

    crowd_mix, when given, is a (mu, costs, crowd_distributions) triple: each
    round first draws the responding crowd from mu (accruing that crowd's
    cost) and then the option from that crowd's distribution. Otherwise every
    round costs 1; scale by the crowd's cost at the caller.
    """
    rng = np.random.default_rng(rng)
    quality, smooth, adaptive_delta, horizon = _rule_mode(rule)
    if horizon is not None:
        cap = min(cap, horizon)
    probs = np.asarray(probs, dtype=float)
    n = probs.shape[0]
    counts = np.zeros((runs, n), dtype=np.int64)
    rounds = np.full(runs, cap, dtype=np.int64)
    stopped = np.zeros(runs, dtype=bool)
    wrong = np.zeros(runs, dtype=bool)
    cost = np.zeros(runs)
    if crowd_mix is not None:
        mu, mix_costs, mix_dists = crowd_mix
        mu = np.asarray(mu, dtype=float)
        mix_costs = np.asarray(mix_costs, dtype=float)
        cum_mu = np.cumsum(mu)
        row_cums = np.cumsum(
            np.stack([np.asarray(d.probs, dtype=float) for d in mix_dists]), axis=1
        )
    cum = np.cumsum(probs)
    alive = np.arange(runs)
    t = 0
    while alive.size and t < cap:
        t += 1
        n_alive = alive.size
        if crowd_mix is None:
            opts = np.searchsorted(cum, rng.random(n_alive), side="right")
            np.clip(opts, 0, n - 1, out=opts)
            cost[alive] += 1.0
        else:
            crowds = np.searchsorted(cum_mu, rng.random(n_alive), side="right")
            np.clip(crowds, 0, mu.shape[0] - 1, out=crowds)
            cost[alive] += mix_costs[crowds]
            opts = (rng.random(n_alive)[:, None] >= row_cums[crowds]).sum(axis=1)
            np.clip(opts, 0, n - 1, out=opts)
        counts[alive, opts] += 1
        sub = counts[alive]
        if n == 2:
            diff = np.abs(sub[:, 0] - sub[:, 1])
        else:
            part = np.partition(sub, n - 2, axis=1)
            diff = part[:, -1] - part[:, -2]
        theta = (
            quality if adaptive_delta is None else math.sqrt(math.log(n * t * t / adaptive_delta))
        ) * math.sqrt(t)
        if smooth:
            base = math.floor(theta)
            frac = theta - base
            thr = base + (rng.random(n_alive) < frac) if frac > 0.0 else base
            fire = diff > thr
        else:
            fire = diff > theta
        if horizon is not None and t == horizon:
            fire = np.ones(n_alive, dtype=bool)
        if fire.any():
            ids = alive[fire]
            rounds[ids] = t
            stopped[ids] = True
            rows = sub[fire]
            # jitter < 1 cannot reorder distinct integer counts; it breaks
            # exact ties uniformly (only possible at the forced stop)
            maj = (rows + rng.random(rows.shape)).argmax(axis=1)
            wrong[ids] = maj != correct_option
            alive = alive[~fire]
    return StreamResult(rounds=rounds, stopped=stopped, wrong=wrong, cost=cost)


@dataclass(frozen=True)
class BenchmarkReport:
    """Monte-Carlo estimates of the omniscient benchmarks.

    per_crowd_cost rows are (estimate, standard error) of always asking one
    crowd; per_mu rows are (mixture, estimate, standard error) over a simplex
    grid of mixtures with pooled votes.
    """

    runs: int
    per_crowd_cost: tuple[tuple[float, float], ...] | None = None
    per_crowd_truncated: tuple[float, ...] | None = None
    best_crowd: int | None = None
    per_mu: tuple[tuple[tuple[float, ...], float, float], ...] | None = None
    best_mu: tuple[float, ...] | None = None
    best_mu_cost: tuple[float, float] | None = None


def deterministic_benchmark(
    instance: ProblemInstance,
    rule,
    runs: int = 20_000,
    rng=None,
    cap: int = 200_000,
) -> BenchmarkReport:
    """Expected total cost of always choosing crowd i, for each i, and the
    minimizing crowd. Crowds whose rule rarely stops by the cap are reported
    with their truncated fraction; their estimates are lower bounds."""
    rng = np.random.default_rng(rng)
    costs = []
    truncated = []
    for i, crowd in enumerate(instance.crowds):
        res = simulate_stream(
            crowd.probs, instance.correct_option, rule, runs, rng.spawn(1)[0], cap
        )
        mean_rounds = float(res.rounds.mean())
        se_rounds = float(res.rounds.std(ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
        c = float(instance.costs[i])
        costs.append((c * mean_rounds, c * se_rounds))
        truncated.append(res.truncated_fraction)
    best = min(range(instance.k), key=lambda i: costs[i][0])
    return BenchmarkReport(
        runs=runs,
        per_crowd_cost=tuple(costs),
        per_crowd_truncated=tuple(truncated),
        best_crowd=best,
    )


def randomized_benchmark(
    instance: ProblemInstance,
    rule: TotalRuleConfig,
    grid_m: int = 20,
    runs: int = 20_000,
    rng=None,
    cap: int | None = None,
) -> BenchmarkReport:
    """Expected total cost of sampling crowds i.i.d. from mu with pooled votes,
    minimized over a simplex grid of denominator grid_m."""
    rng = np.random.default_rng(rng)
    cap = rule.horizon if cap is None else cap
    rows = []
    uniform = instance.uniform_costs
    base_cost = float(instance.costs[0])
    for mu in simplex_grid(grid_m, instance.k):
        pooled = mix(instance, mu)
        crowd_mix = None if uniform else (mu, instance.costs, instance.crowds)
        res = simulate_stream(
            pooled.probs,
            instance.correct_option,
            rule,
            runs,
            rng.spawn(1)[0],
            cap,
            crowd_mix=crowd_mix,
        )
        if uniform:
            est = base_cost * float(res.rounds.mean())
            se = base_cost * float(res.rounds.std(ddof=1) / math.sqrt(runs))
        else:
            est, se = res.mean_cost()
        rows.append((mu, est, se))
    best_mu, best_cost, best_se = min(rows, key=lambda r: r[1])
    return BenchmarkReport(
        runs=runs,
        per_mu=tuple(rows),
        best_mu=best_mu,
        best_mu_cost=(best_cost, best_se),
    )


def approx_best_crowd(costs, gaps) -> int:
    """argmin of cost / gap^2; zero-gap crowds are excluded, ties go to the
    lowest index. Raises NoInformationError when every gap is zero."""
    costs = np.asarray(costs, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if costs.shape != gaps.shape:
        raise ValueError("costs and gaps must have the same length")
    if np.any(gaps < 0):
        raise ValueError("gaps must be non-negative")
    if np.all(gaps == 0):
        raise NoInformationError("all crowds have gap 0")
    with np.errstate(divide="ignore"):
        score = np.where(gaps > 0, costs / np.square(gaps), np.inf)
    return int(np.argmin(score))
