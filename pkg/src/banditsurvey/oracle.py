"""Exact reference computations used to validate the simulator.

For two options the threshold stopping rule is a function of the vote-count
difference only, so its exact stop-time distribution and error mass follow
from a forward dynamic program over (round, difference). The DP is the
ground truth that Monte-Carlo estimates are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RuleStats:
    """Exact statistics of a single-crowd rule run until a truncation horizon.

    expected_stop_time: expected stopping round conditioned on stopping by the
        horizon (NaN if the rule never stops by then).
    error_rate: probability of stopping with the wrong majority by the horizon.
    stop_mass: probability of stopping at all by the horizon.
    """

    expected_stop_time: float
    error_rate: float
    stop_mass: float

    @property
    def residual(self) -> float:
        """Mass not yet absorbed at the horizon; worst-case slack for both the
        error rate and the stop mass."""
        return max(0.0, 1.0 - self.stop_mass)


def exact_rule_stats(
    p: float,
    quality: float,
    horizon: int = 100_000,
    smooth: bool = False,
    adaptive_delta: float | None = None,
) -> RuleStats:
    """Exact stop-time / error statistics of the two-option threshold rule.

    p is the probability of the correct option (p >= 1/2). The rule stops at
    round t once |correct votes - wrong votes| exceeds quality * sqrt(t); in
    smooth mode the threshold is rounded to one of the two nearest integers,
    with the rounding probability folded into the DP transitions. With
    adaptive_delta the quality at round t is sqrt(log(2 t^2 / delta)).
    """
    if not 0.5 <= p <= 1.0:
        raise ValueError("p must lie in [1/2, 1]")
    if quality <= 0:
        raise ValueError("quality must be positive")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if adaptive_delta is not None and not 0 < adaptive_delta < 1:
        raise ValueError("adaptive_delta must lie in (0, 1)")
    q = 1.0 - p
    # survive[j] = P(alive with j correct votes), j in [j_lo, j_lo + len - 1]
    survive = np.array([1.0])
    j_lo = 0
    stop_mass = 0.0
    err_mass = 0.0
    time_sum = 0.0
    for t in range(1, horizon + 1):
        new = np.zeros(survive.shape[0] + 1)
        if q > 0.0:
            new[:-1] += q * survive
        if p > 0.0:
            new[1:] += p * survive
        survive = new
        d = 2 * np.arange(j_lo, j_lo + survive.shape[0]) - t
        diff = np.abs(d)
        q_t = (
            quality
            if adaptive_delta is None
            else math.sqrt(math.log(2 * t * t / adaptive_delta))
        )
        theta = q_t * math.sqrt(t)
        if smooth:
            floor_thr = math.floor(theta)
            frac = theta - floor_thr
            if frac > 0.0:
                stop_prob = np.where(
                    diff > floor_thr + 1, 1.0, np.where(diff > floor_thr, 1.0 - frac, 0.0)
                )
            else:
                stop_prob = (diff > floor_thr).astype(float)
        else:
            stop_prob = (diff > theta).astype(float)
        stopped = survive * stop_prob
        mass_now = float(stopped.sum())
        if mass_now > 0.0:
            stop_mass += mass_now
            time_sum += t * mass_now
            err_mass += float(stopped[d < 0].sum())
            survive = survive * (1.0 - stop_prob)
        nonzero = np.nonzero(survive > 0.0)[0]
        if nonzero.size == 0:
            break
        if nonzero[0] > 0 or nonzero[-1] < survive.shape[0] - 1:
            survive = survive[nonzero[0] : nonzero[-1] + 1]
            j_lo += int(nonzero[0])
        if float(survive.sum()) < 1e-15:
            break
    expected = time_sum / stop_mass if stop_mass > 0.0 else math.nan
    return RuleStats(expected, err_mass, stop_mass)


def check_vector_inequality(alpha, beta, x) -> bool:
    """Whether (x . alpha)(x . beta) >= min_i alpha_i beta_i, with 1e-12 slack.

    Holds for any positive vectors alpha, beta and any distribution x; used
    as a property check that must always return True.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    w = np.asarray(x, dtype=float)
    if a.shape != b.shape or a.shape != w.shape:
        raise ValueError("alpha, beta and x must have the same length")
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("alpha and beta must be positive")
    if np.any(w < -1e-12) or abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValueError("x must be a distribution")
    return float(w @ a) * float(w @ b) >= float((a * b).min()) - 1e-12


GAP_GRID = tuple(round(0.01 * i, 2) for i in range(1, 100))


@dataclass(frozen=True)
class FiniteStopReport:
    """Check of the never-stop bound for an uninformative crowd:
    P(rule ever stops at gap 0) <= 2 * worst-case error rate."""

    quality: float
    horizon: int
    stop_mass_gap_zero: float
    worst_error_rate: float
    worst_error_gap: float
    truncation_slack: float

    @property
    def holds(self) -> bool:
        return self.stop_mass_gap_zero <= 2.0 * self.worst_error_rate + self.truncation_slack


def finite_stop_bound_check(quality: float, horizon: int = 100_000) -> FiniteStopReport:
    """Evaluate the gap-0 stop mass against twice the worst error rate.

    The worst-case error rate is taken over the gap grid {0.01, ..., 0.99};
    mass not absorbed by the horizon is reported as additive slack (it bounds
    both the unseen error mass and the unseen stop mass).
    """
    zero = exact_rule_stats(0.5, quality, horizon)
    worst_err = 0.0
    worst_gap = GAP_GRID[0]
    max_residual = 0.0
    for g in GAP_GRID:
        stats = exact_rule_stats((1.0 + g) / 2.0, quality, horizon)
        if stats.error_rate > worst_err:
            worst_err = stats.error_rate
            worst_gap = g
        max_residual = max(max_residual, stats.residual)
    return FiniteStopReport(
        quality=quality,
        horizon=horizon,
        stop_mass_gap_zero=zero.stop_mass,
        worst_error_rate=worst_err,
        worst_error_gap=worst_gap,
        truncation_slack=2.0 * max_residual,
    )
