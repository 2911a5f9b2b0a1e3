"""Stopping rules: when to stop asking workers and which option to output.

The single-crowd rule stops once the empirical gap times the sample count
clears a confidence threshold proportional to sqrt(samples). Its smooth
variant randomly rounds the confidence term to one of the two nearest
integers, which keeps the rule meaningful for quality parameters below 1.
A composite rule runs one instance per crowd plus (optionally) one instance
on the pooled votes, and stops as soon as any instance stops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ThresholdRuleConfig:
    """Single-crowd rule: stop once (empirical gap) * N > quality * sqrt(N).

    quality: threshold multiplier trading error rate against stop time.
    smooth: randomly round the confidence term to a neighboring integer,
        re-drawn on each input the rule instance receives.
    adaptive_delta: if set, replaces `quality` by sqrt(log(n * N^2 / delta))
        with N the instance's own sample count.
    """

    quality: float
    smooth: bool = False
    adaptive_delta: float | None = None

    def __post_init__(self):
        if self.quality <= 0:
            raise ValueError("quality must be positive")
        if self.adaptive_delta is not None and not 0 < self.adaptive_delta < 1:
            raise ValueError("adaptive_delta must lie in (0, 1)")

    def effective_quality(self, n_samples: int, n_options: int) -> float:
        if self.adaptive_delta is None:
            return self.quality
        return math.sqrt(math.log(n_options * n_samples * n_samples / self.adaptive_delta))


@dataclass(frozen=True)
class TotalRuleConfig:
    """Pooled-votes rule: stop once the pooled empirical gap exceeds
    quality / sqrt(t), or unconditionally at round t = horizon."""

    quality: float
    horizon: int

    def __post_init__(self):
        if self.quality <= 0:
            raise ValueError("quality must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class StoppingDecision:
    """Either continue, or stop with an output option and the triggering instance
    (a crowd index, or "total" for the pooled instance)."""

    stopped: bool
    output: int | None = None
    trigger: int | str | None = None

    def __post_init__(self):
        if self.stopped != (self.output is not None):
            raise ValueError("output must be present iff stopped")


CONTINUE = StoppingDecision(False)


def _top_two_int(counts) -> int:
    """top count minus second count of an integer count vector"""
    a = counts[0]
    b = counts[1]
    if a < b:
        a, b = b, a
    for v in counts[2:]:
        if v > a:
            a, b = v, a
        elif v > b:
            b = v
    return a - b


def majority_option(counts, rng) -> int:
    """Most frequent option; ties broken uniformly at random."""
    top = max(counts)
    ties = [i for i, c in enumerate(counts) if c == top]
    if len(ties) == 1:
        return ties[0]
    return ties[rng.randrange(len(ties))]


def _clears(diff: int, threshold: float, smooth: bool, rng) -> bool:
    """diff > threshold, with the threshold randomly rounded in smooth mode."""
    if not smooth:
        return diff > threshold
    base = math.floor(threshold)
    frac = threshold - base
    if frac > 0.0 and rng.random() < frac:
        base += 1
    return diff > base


def threshold_decide(counts, config: ThresholdRuleConfig, rng) -> StoppingDecision:
    """Evaluate one single-crowd rule instance on its per-option counts.

    With no data the instance continues. Each call re-draws the smooth
    rounding, so callers should invoke it once per input the instance sees.
    """
    n_samples = sum(counts)
    if n_samples == 0:
        return CONTINUE
    quality = config.effective_quality(n_samples, len(counts))
    diff = _top_two_int(counts)
    if _clears(diff, quality * math.sqrt(n_samples), config.smooth, rng):
        return StoppingDecision(True, majority_option(counts, rng))
    return CONTINUE


def total_decide(total_counts, t: int, config: TotalRuleConfig, rng) -> StoppingDecision:
    """Evaluate the pooled-votes rule at round t (deterministic form)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if sum(total_counts) != t:
        raise ValueError("total counts must sum to the round number")
    if t > config.horizon:
        raise ValueError(f"round {t} past the horizon {config.horizon}: the rule must already have stopped")
    diff = _top_two_int(total_counts)
    if t == config.horizon or diff > config.quality * math.sqrt(t):
        return StoppingDecision(True, majority_option(total_counts, rng), "total")
    return CONTINUE


def _total_instance_stops(totals, t, total_cfg, per_crowd, rng) -> bool:
    """Pooled instance inside a composite rule: same rule family as the
    per-crowd instances (inherits smoothing / adaptive quality), plus the
    forced stop at the horizon."""
    if t > total_cfg.horizon:
        raise ValueError(f"round {t} past the horizon {total_cfg.horizon}")
    if t == total_cfg.horizon:
        return True
    if per_crowd is not None and per_crowd.adaptive_delta is not None:
        quality = math.sqrt(math.log(len(totals) * t * t / per_crowd.adaptive_delta))
    else:
        quality = total_cfg.quality
    smooth = per_crowd.smooth if per_crowd is not None else False
    return _clears(_top_two_int(totals), quality * math.sqrt(t), smooth, rng)


def composite_decide(
    tally,
    per_crowd: ThresholdRuleConfig | None,
    total: TotalRuleConfig | None,
    rng,
) -> StoppingDecision:
    """Snapshot evaluation of every rule instance on the current tally.

    Stops iff any instance stops; with several simultaneous stops the output
    is chosen uniformly at random among the stopped instances' majority
    options. Incremental simulations should use CompositeRule, which only
    re-evaluates instances that received new input.
    """
    if per_crowd is None and total is None:
        raise ValueError("composite rule needs at least one constituent")
    if tally.round < 1:
        raise ValueError("composite rule consulted before any sample")
    fired: list[tuple[int | str, int]] = []
    if per_crowd is not None:
        for i in range(tally.k):
            if tally.pulls[i] == 0:
                continue
            decision = threshold_decide(tally.counts[i], per_crowd, rng)
            if decision.stopped:
                fired.append((i, decision.output))
    if total is not None and _total_instance_stops(tally.totals, tally.round, total, per_crowd, rng):
        fired.append(("total", majority_option(tally.totals, rng)))
    if not fired:
        return CONTINUE
    trigger, output = fired[rng.randrange(len(fired))] if len(fired) > 1 else fired[0]
    return StoppingDecision(True, output, trigger)


class CompositeRule:
    """Incremental composite rule owned by one simulation run.

    Each per-crowd instance is clocked by its own inputs: after a round in
    which crowd i was sampled, only crowd i's instance and the pooled
    instance re-evaluate (an instance with unchanged data keeps its standing
    `continue` decision; in smooth mode this is what makes a recorded stream
    replayable through a standalone instance).
    """

    __slots__ = ("per_crowd", "total")

    def __init__(self, per_crowd: ThresholdRuleConfig | None, total: TotalRuleConfig | None):
        if per_crowd is None and total is None:
            raise ValueError("composite rule needs at least one constituent")
        self.per_crowd = per_crowd
        self.total = total

    def update(self, tally, crowd: int, rng) -> StoppingDecision | None:
        """Consult the rule right after `tally.record(crowd, ...)`.

        Returns None to continue (hot path), else the stopping decision.
        """
        crowd_fire = None
        pc = self.per_crowd
        if pc is not None:
            row = tally.counts[crowd]
            n_samples = tally.pulls[crowd]
            quality = (
                pc.quality
                if pc.adaptive_delta is None
                else math.sqrt(math.log(tally.n * n_samples * n_samples / pc.adaptive_delta))
            )
            if _clears(_top_two_int(row), quality * math.sqrt(n_samples), pc.smooth, rng):
                crowd_fire = (crowd, majority_option(row, rng))
        total_fire = None
        if self.total is not None and _total_instance_stops(
            tally.totals, tally.round, self.total, pc, rng
        ):
            total_fire = ("total", majority_option(tally.totals, rng))
        if crowd_fire is None and total_fire is None:
            return None
        if crowd_fire is not None and total_fire is not None:
            trigger, output = crowd_fire if rng.random() < 0.5 else total_fire
        else:
            trigger, output = crowd_fire if crowd_fire is not None else total_fire
        return StoppingDecision(True, output, trigger)
