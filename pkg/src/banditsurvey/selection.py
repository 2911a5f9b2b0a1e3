"""Crowd-selection policies: which crowd to ask next.

All policies are online: they map the history of observed votes (and their
own internal phase state) to the next crowd index. They never see rewards --
the empirical gap divided by the root cost acts as a surrogate arm value.
Policies are deterministic functions of (state, tally, rng stream) so runs
replay exactly from a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .stopping import ThresholdRuleConfig, _top_two_int, threshold_decide


@dataclass(frozen=True)
class UcbConfig:
    """Upper-confidence index over crowds with exploration constant C.

    The index of crowd i is (empirical gap + C / sqrt(N_i)) / sqrt(c_i).
    With theory_schedule the constant grows as sqrt(8 log t); C = 1 works
    best in simulations.
    """

    exploration: float = 1.0
    theory_schedule: bool = False

    def __post_init__(self):
        if self.exploration <= 0:
            raise ValueError("exploration constant must be positive")

    def constant(self, t: int) -> float:
        if self.theory_schedule:
            return math.sqrt(8.0 * math.log(t)) if t > 1 else 0.0
        return self.exploration


@dataclass(frozen=True)
class EerConfig:
    """Explore/exploit/rollback parameters: the low-confidence quality used to
    pick a crowd to exploit, and how long exploitation lasts relative to the
    exploration phase."""

    low_quality: float
    exploit_multiplier: float = 3.0

    def __post_init__(self):
        if self.low_quality <= 0:
            raise ValueError("low_quality must be positive")
        if self.exploit_multiplier < 1:
            raise ValueError("exploit_multiplier must be >= 1")


def rr_weights(costs) -> list[float]:
    """Sampling distribution with weight proportional to 1/cost."""
    inv = [1.0 / c for c in costs]
    total = sum(inv)
    return [w / total for w in inv]


def rr_select(costs, rng) -> int:
    """Non-adaptive selection: crowd i with probability (1/c_i) / sum_j (1/c_j)."""
    return _draw_index(rr_weights(costs), rng)


def _draw_index(weights, rng) -> int:
    u = rng.random()
    acc = 0.0
    last = len(weights) - 1
    for i, w in enumerate(weights):
        acc += w
        if u < acc or i == last:
            return i
    return last


def _row_gap(row, pulls: int) -> float:
    return _top_two_int(row) / pulls


def ucb_select(tally, costs, config: UcbConfig, t: int) -> int:
    """Crowd maximizing the upper-confidence index; an unsampled crowd has
    index +inf, so every crowd is tried once first (lowest index breaks ties)."""
    for i in range(tally.k):
        if tally.pulls[i] == 0:
            return i
    c_t = config.constant(t)
    best, best_index = 0, -math.inf
    for i in range(tally.k):
        pulls = tally.pulls[i]
        index = (_row_gap(tally.counts[i], pulls) + c_t / math.sqrt(pulls)) / math.sqrt(costs[i])
        if index > best_index:
            best, best_index = i, index
    return best


def thompson_select(tally, costs, rng, anchor_option: int | None = None) -> int:
    """Posterior-sampling selection: for each crowd draw a gap surrogate from
    Beta(1 + top count, 1 + second count) and pick the largest draw / sqrt(cost).

    With more than two options the Beta approximation is applied to the
    top-two option counts of each crowd.

    anchor_option pins the Beta's first parameter to one fixed option's count
    (second parameter: all other votes) instead of each crowd's own top count.
    Per-crowd top counts overstate barely-sampled crowds (the top frequency of
    a fair coin at 4 votes averages 0.69), which keeps uninformative crowds
    competitive; anchoring removes that bias but needs an externally supplied
    option, so it is an explicit simulation mode, not the default.
    """
    best, best_index = 0, -math.inf
    if anchor_option is not None:
        for i in range(tally.k):
            a = tally.counts[i][anchor_option]
            b = tally.pulls[i] - a
            index = rng.betavariate(1 + a, 1 + b) / math.sqrt(costs[i])
            if index > best_index:
                best, best_index = i, index
        return best
    for i in range(tally.k):
        row = tally.counts[i]
        a = row[0]
        b = row[1]
        if a < b:
            a, b = b, a
        for v in row[2:]:
            if v > a:
                a, b = v, a
            elif v > b:
                b = v
        draw = rng.betavariate(1 + a, 1 + b)
        index = draw / math.sqrt(costs[i])
        if index > best_index:
            best, best_index = i, index
    return best


class Policy:
    """Base class: select the next crowd, then observe the vote it produced."""

    # policies that keep state in observe() set this to True; the simulator
    # skips the call otherwise
    needs_observe = False

    def select(self, tally, t: int, rng) -> int:
        raise NotImplementedError

    def observe(self, tally, crowd: int, option: int, rng) -> None:
        pass


class RoundRobinPolicy(Policy):
    """Randomized round robin: sample crowds i.i.d. with probability proportional to 1/cost."""

    def __init__(self, costs):
        self.costs = list(costs)
        self.weights = rr_weights(self.costs)

    def select(self, tally, t, rng):
        return _draw_index(self.weights, rng)


class UcbPolicy(Policy):
    """Upper-confidence-bound selection over crowds."""

    def __init__(self, costs, config: UcbConfig | None = None):
        self.costs = list(costs)
        self.config = config or UcbConfig()

    def select(self, tally, t, rng):
        return ucb_select(tally, self.costs, self.config, t)


class ThompsonPolicy(Policy):
    """Posterior (Thompson) sampling over crowd gaps.

    anchor_option, when set, fixes which option's counts feed the Beta's
    first parameter (see thompson_select); used to reproduce simulation
    studies where the correct option's identity is plugged in.
    """

    def __init__(self, costs, anchor_option: int | None = None):
        self.costs = list(costs)
        self.anchor_option = anchor_option

    def select(self, tally, t, rng):
        return thompson_select(tally, self.costs, rng, self.anchor_option)


EXPLORE, EXPLOIT, ROLLBACK = "explore", "exploit", "rollback"


class EerPolicy(Policy):
    """Explore / exploit / rollback selection, in three phases.

    Explore: run the 1/cost sampler until a low-confidence rule instance
    (quality low_quality < the main rule's quality) stops for some crowd.
    Exploit: choose that crowd for ceil(exploit_multiplier * t0) rounds,
    where t0 is the round the low-confidence rule fired. Rollback: resume
    the 1/cost sampler, keeping all accumulated counts.

    Realizes the per-round `eer_step` operation via select/observe.
    """

    needs_observe = True

    def __init__(self, costs, config: EerConfig, main_quality: float, smooth: bool = False):
        if config.low_quality >= main_quality:
            raise ValueError("low_quality must be below the main rule quality")
        self.costs = list(costs)
        self.config = config
        self.low_rule = ThresholdRuleConfig(config.low_quality, smooth=smooth)
        self.weights = rr_weights(self.costs)
        self.phase = EXPLORE
        self.chosen_crowd: int | None = None
        self.explore_end: int | None = None
        self.exploit_until: int | None = None

    @classmethod
    def with_defaults(cls, costs, main_quality: float, smooth: bool = False) -> "EerPolicy":
        # low quality one third of the main quality, exploitation 3x exploration
        return cls(costs, EerConfig(main_quality / 3.0, 3.0), main_quality, smooth)

    def select(self, tally, t, rng):
        if self.phase == EXPLOIT:
            if t <= self.exploit_until:
                return self.chosen_crowd
            self.phase = ROLLBACK
        return _draw_index(self.weights, rng)

    def observe(self, tally, crowd, option, rng):
        if self.phase != EXPLORE:
            return
        # the low-confidence instance for `crowd` just received an input
        if threshold_decide(tally.counts[crowd], self.low_rule, rng).stopped:
            t0 = tally.round
            self.phase = EXPLOIT
            self.chosen_crowd = crowd
            self.explore_end = t0
            self.exploit_until = t0 + math.ceil(self.config.exploit_multiplier * t0)


def eer_step(state: EerPolicy, tally, t: int, rng) -> int:
    """One step of the explore/exploit/rollback policy (state advances in
    place). Feed the resulting vote back through state.observe so the phase
    machine sees it."""
    return state.select(tally, t, rng)


def simplex_grid(denominator: int, k: int) -> list[tuple[float, ...]]:
    """All distributions over k crowds whose coordinates are multiples of
    1/denominator, in lexicographic order of the first coordinates."""
    if denominator < 1 or k < 1:
        raise ValueError("denominator and k must be >= 1")
    points: list[tuple[float, ...]] = []

    def build(prefix: tuple[int, ...], remaining: int, slots: int):
        if slots == 1:
            points.append(prefix + (remaining,))
            return
        for first in range(remaining + 1):
            build(prefix + (first,), remaining - first, slots - 1)

    build((), denominator, k)
    return [tuple(a / denominator for a in point) for point in points]


class UnifPolicy(Policy):
    """Phased upper-confidence search over a discretized simplex of mixtures.

    Runs in phases j = 1, 2, 3, ... of duration 2^j. Phase j discretizes the
    distributions over crowds with granularity 1/m_j, m_j = ceil((2^j)^(1/(k+2))),
    and runs a UCB1 over the grid points; each grid point estimates its value
    by the empirical gap of the votes observed while it was active, with
    confidence radius sqrt(8 ln t / pulls). Statistics reset at phase
    boundaries. Requires uniform costs.

    Realizes the per-round `unif_select` operation via select/observe.
    """

    needs_observe = True

    def __init__(self, costs, n_options: int):
        costs = list(costs)
        if max(costs) != min(costs):
            raise ValueError("this policy requires uniform costs")
        self.k = len(costs)
        self.n = n_options
        self.phase = 0
        self.rounds_left = 0
        self.arms: list[tuple[float, ...]] = []
        self.arm_cum: list[list[float]] = []
        self.arm_counts: list[list[int]] = []
        self.arm_pulls: list[int] = []
        self.current_arm = -1
        self._start_phase(1)

    def granularity(self, phase: int) -> int:
        return math.ceil((2**phase) ** (1.0 / (self.k + 2)))

    def _start_phase(self, phase: int):
        self.phase = phase
        self.rounds_left = 2**phase
        self.arms = simplex_grid(self.granularity(phase), self.k)
        self.arm_cum = []
        for arm in self.arms:
            acc, cum = 0.0, []
            for w in arm:
                acc += w
                cum.append(acc)
            self.arm_cum.append(cum)
        self.arm_counts = [[0] * self.n for _ in self.arms]
        self.arm_pulls = [0] * len(self.arms)

    def select(self, tally, t, rng):
        if self.rounds_left == 0:
            self._start_phase(self.phase + 1)
        self.rounds_left -= 1
        arm = -1
        for i, pulls in enumerate(self.arm_pulls):
            if pulls == 0:
                arm = i
                break
        if arm < 0:
            log_t = math.log(t) if t > 1 else 0.0
            best_index = -math.inf
            for i, pulls in enumerate(self.arm_pulls):
                index = _row_gap(self.arm_counts[i], pulls) + math.sqrt(8.0 * log_t / pulls)
                if index > best_index:
                    arm, best_index = i, index
        self.current_arm = arm
        cum = self.arm_cum[arm]
        u = rng.random()
        last = self.k - 1
        for i in range(self.k):
            if u < cum[i] or i == last:
                return i
        return last

    def observe(self, tally, crowd, option, rng):
        self.arm_counts[self.current_arm][option] += 1
        self.arm_pulls[self.current_arm] += 1


def unif_select(state: UnifPolicy, t: int, rng) -> int:
    """One step of the phased simplex policy (state is advanced in place)."""
    return state.select(None, t, rng)
