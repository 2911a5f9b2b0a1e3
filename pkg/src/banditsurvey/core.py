"""Domain model: options, crowds, response distributions, tallies, and gap computations.

A *crowd* is a population of workers modeled as a fixed distribution over the
n answer options of a microtask, plus a per-round cost. The *gap* of a
distribution (largest minus second-largest probability) measures how
informative a crowd is about the correct option.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

PROB_TOL = 1e-12


class NoSamplesError(ValueError):
    """An empirical quantity was requested for a crowd that was never sampled."""


def _top_two(values) -> tuple[float, float]:
    """Largest and second-largest entries of a length >= 2 sequence."""
    a, b = values[0], values[1]
    if a < b:
        a, b = b, a
    for v in values[2:]:
        if v > a:
            a, b = v, a
        elif v > b:
            b = v
    return a, b


class ResponseDistribution:
    """A probability distribution over the n options of a microtask."""

    __slots__ = ("probs",)

    def __init__(self, probs: Sequence[float]):
        arr = np.asarray(probs, dtype=float)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("a response distribution needs at least 2 options")
        if np.any(arr < -PROB_TOL) or np.any(arr > 1.0 + PROB_TOL):
            raise ValueError(f"probabilities outside [0, 1]: {arr}")
        if abs(float(arr.sum()) - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {arr.sum()!r}, not 1")
        arr = arr.copy()
        arr.setflags(write=False)
        self.probs = arr

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, ResponseDistribution) and np.array_equal(
            self.probs, other.probs
        )

    def __repr__(self) -> str:
        return f"ResponseDistribution({self.probs.tolist()})"


def gap(dist: ResponseDistribution | Sequence[float]) -> float:
    """Largest minus second-largest probability; 0 iff the top two are tied."""
    probs = dist.probs if isinstance(dist, ResponseDistribution) else np.asarray(dist, float)
    top, second = _top_two(probs)
    return top - second


class ProblemInstance:
    """A microtask: k crowds over a common option set, per-round costs, and the correct option.

    The correct option must be a most-probable option of every crowd (ties are
    allowed: a gap-0 crowd carries no information and in particular no
    information against the correct option).
    """

    __slots__ = ("crowds", "costs", "correct_option", "_cum")

    def __init__(
        self,
        crowds: Sequence[ResponseDistribution],
        costs: Sequence[float],
        correct_option: int,
    ):
        crowds = tuple(crowds)
        if not crowds:
            raise ValueError("need at least one crowd")
        n = crowds[0].n
        if any(c.n != n for c in crowds):
            raise ValueError("all crowds must share the same option set")
        costs_arr = np.asarray(costs, dtype=float)
        if costs_arr.shape != (len(crowds),):
            raise ValueError("costs must have one entry per crowd")
        if np.any(costs_arr <= 0):
            raise ValueError("costs must be strictly positive")
        if not 0 <= correct_option < n:
            raise ValueError("correct_option out of range")
        for i, c in enumerate(crowds):
            if c.probs[correct_option] < c.probs.max() - PROB_TOL:
                raise ValueError(
                    f"crowd {i} does not have the correct option among its most probable ones"
                )
        costs_arr = costs_arr.copy()
        costs_arr.setflags(write=False)
        self.crowds = crowds
        self.costs = costs_arr
        self.correct_option = correct_option
        self._cum = None

    @property
    def k(self) -> int:
        return len(self.crowds)

    @property
    def n(self) -> int:
        return self.crowds[0].n

    @property
    def gaps(self) -> np.ndarray:
        return np.array([gap(c) for c in self.crowds])

    @property
    def uniform_costs(self) -> bool:
        return bool(self.costs.max() == self.costs.min())

    def cumulative_probs(self) -> tuple[tuple[float, ...], ...]:
        """Per-crowd cumulative probabilities, cached; used by samplers."""
        if self._cum is None:
            self._cum = tuple(
                tuple(np.cumsum(c.probs).tolist()) for c in self.crowds
            )
        return self._cum

    def __repr__(self) -> str:
        return (
            f"ProblemInstance(k={self.k}, n={self.n}, "
            f"costs={self.costs.tolist()}, correct_option={self.correct_option})"
        )


def _check_mu(mu, k: int) -> np.ndarray:
    arr = np.asarray(mu, dtype=float)
    if arr.shape != (k,):
        raise ValueError(f"mu has {arr.shape} entries, instance has {k} crowds")
    if np.any(arr < -PROB_TOL) or abs(float(arr.sum()) - 1.0) > PROB_TOL:
        raise ValueError("mu must be a distribution over crowds")
    return arr


def mix(instance: ProblemInstance, mu) -> ResponseDistribution:
    """The pooled response distribution when crowds are sampled from mu each round."""
    arr = _check_mu(mu, instance.k)
    probs = np.zeros(instance.n)
    for w, crowd in zip(arr, instance.crowds):
        probs += w * crowd.probs
    # guard rounding drift so the result revalidates cleanly
    probs /= probs.sum()
    return ResponseDistribution(probs)


def induced_gap(instance: ProblemInstance, mu) -> float:
    """Gap of the mixture distribution induced by sampling crowds from mu."""
    return gap(mix(instance, mu))


class TallySheet:
    """Per-crowd and pooled vote counts over the rounds of one simulation run.

    Mutable, single-writer. `counts[i][x]` is the number of times crowd i
    returned option x; `pulls[i]` the number of samples from crowd i;
    `totals[x]` the pooled count of option x; `round` the number of records.
    """

    __slots__ = ("k", "n", "counts", "pulls", "totals", "round")

    def __init__(self, k: int, n: int):
        if k < 1 or n < 2:
            raise ValueError("need k >= 1 crowds and n >= 2 options")
        self.k = k
        self.n = n
        self.counts = [[0] * n for _ in range(k)]
        self.pulls = [0] * k
        self.totals = [0] * n
        self.round = 0

    def record(self, crowd: int, option: int) -> "TallySheet":
        """Add one vote; increments the round counter. Returns self."""
        if not 0 <= crowd < self.k:
            raise IndexError(f"crowd {crowd} out of range")
        if not 0 <= option < self.n:
            raise IndexError(f"option {option} out of range")
        self.counts[crowd][option] += 1
        self.pulls[crowd] += 1
        self.totals[option] += 1
        self.round += 1
        return self

    def empirical_distribution(self, crowd: int) -> ResponseDistribution:
        """Observed frequency distribution of one crowd; its gap is the empirical gap."""
        n_i = self.pulls[crowd]
        if n_i == 0:
            raise NoSamplesError(f"crowd {crowd} was never sampled")
        row = self.counts[crowd]
        return ResponseDistribution([c / n_i for c in row])

    def empirical_gap(self, crowd: int) -> float:
        n_i = self.pulls[crowd]
        if n_i == 0:
            raise NoSamplesError(f"crowd {crowd} was never sampled")
        top, second = _top_two(self.counts[crowd])
        return (top - second) / n_i

    def total_distribution(self) -> ResponseDistribution:
        if self.round == 0:
            raise NoSamplesError("no samples recorded yet")
        return ResponseDistribution([c / self.round for c in self.totals])

    def copy(self) -> "TallySheet":
        dup = TallySheet(self.k, self.n)
        dup.counts = [row[:] for row in self.counts]
        dup.pulls = self.pulls[:]
        dup.totals = self.totals[:]
        dup.round = self.round
        return dup

    def __repr__(self) -> str:
        return f"TallySheet(round={self.round}, counts={self.counts})"
