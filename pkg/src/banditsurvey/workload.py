"""Problem-instance generators and judgment-log ingestion.

Two parameterizations coexist for two-option crowds, mirroring the two ways
"gap 0.3" is used in practice: the bias reading (correct-answer probability
1/2 + b, so b = 0.3 means p = 0.8) drives the easy/medium/hard workloads,
while the gap reading (p = (1+g)/2) drives the uniform-gap workload. Both
generators are provided under distinct names rather than silently picking one.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ProblemInstance, ResponseDistribution


@dataclass(frozen=True)
class BiasSpec:
    """Two-option crowds given by biases b_i in [0, 1/2]: crowd i answers
    correctly with probability 1/2 + b_i, at per-round cost costs[i]."""

    biases: tuple[float, ...]
    costs: tuple[float, ...]

    def __post_init__(self):
        if len(self.biases) != len(self.costs):
            raise ValueError("biases and costs must have the same length")
        if any(not 0 <= b <= 0.5 for b in self.biases):
            raise ValueError("biases must lie in [0, 1/2]")
        if any(c <= 0 for c in self.costs):
            raise ValueError("costs must be positive")

    @classmethod
    def uniform_costs(cls, biases: Sequence[float]) -> "BiasSpec":
        return cls(tuple(biases), tuple(1.0 for _ in biases))


EASY_BIASES = (0.3, 0.0, 0.0)
MEDIUM_BIASES = (0.3, 0.1, 0.1)
HARD_BIASES = (0.3, 0.2, 0.2)


def crowd_permutations(k: int, count: int, seed: int) -> list[list[int]]:
    """The per-instance crowd orderings used by fixed_bias_workload(seed).

    Replaying these permutations reproduces the workload's crowd orderings
    exactly, which is what keeps instance streams identical across the
    algorithms of one experiment.
    """
    rng = random.Random(seed)
    return [rng.sample(range(k), k) for _ in range(count)]


def fixed_bias_workload(spec: BiasSpec, count: int, seed: int) -> list[ProblemInstance]:
    """Two-option instances with fixed crowd biases; the order in which the
    crowds appear is a fresh seeded permutation per instance."""
    k = len(spec.biases)
    dists = [ResponseDistribution((0.5 + b, 0.5 - b)) for b in spec.biases]
    instances = []
    for perm in crowd_permutations(k, count, seed):
        instances.append(
            ProblemInstance(
                [dists[j] for j in perm],
                [spec.costs[j] for j in perm],
                correct_option=0,
            )
        )
    return instances


def uniform_gap_workload(count: int, lo: float, hi: float, seed: int) -> list[ProblemInstance]:
    """Single-crowd two-option instances with gap drawn uniformly from [lo, hi]
    (correct-answer probability (1 + gap) / 2)."""
    if not 0 <= lo < hi <= 1:
        raise ValueError("need 0 <= lo < hi <= 1")
    rng = random.Random(seed)
    instances = []
    for _ in range(count):
        g = lo + (hi - lo) * rng.random()
        instances.append(
            ProblemInstance(
                [ResponseDistribution(((1 + g) / 2, (1 - g) / 2))],
                [1.0],
                correct_option=0,
            )
        )
    return instances


def uniform_bias_workload(count: int, lo: float, hi: float, seed: int) -> list[ProblemInstance]:
    """Single-crowd two-option instances under the bias reading: a strength
    value b drawn uniformly from [lo, hi] gives correct-answer probability
    min(1, 1/2 + b), so values above 1/2 saturate at a certain crowd."""
    if not 0 <= lo < hi <= 1:
        raise ValueError("need 0 <= lo < hi <= 1")
    rng = random.Random(seed)
    instances = []
    for _ in range(count):
        b = lo + (hi - lo) * rng.random()
        p = min(1.0, 0.5 + b)
        instances.append(
            ProblemInstance(
                [ResponseDistribution((p, 1.0 - p))],
                [1.0],
                correct_option=0,
            )
        )
    return instances


def mixture_advantage_instance(epsilon: float) -> ProblemInstance:
    """Two crowds, three options, uniform costs: each crowd has gap epsilon,
    but mixing them uniformly yields an induced gap of 1/10 + 3*epsilon/2.

    The crowds agree on the top option and disagree on where the rest of the
    mass sits, so pooling them separates the top option from both others.
    """
    if not 0 < epsilon < 0.2:
        raise ValueError("epsilon must lie in (0, 1/5)")
    top = 0.4 + epsilon
    low = 1.0 - top - 0.4
    return ProblemInstance(
        [
            ResponseDistribution((top, 0.4, low)),
            ResponseDistribution((top, low, 0.4)),
        ],
        [1.0, 1.0],
        correct_option=0,
    )


@dataclass(frozen=True)
class JudgmentRecord:
    """One worker's vote on one task, as ingested from a judgment log."""

    task_id: str
    worker_id: str
    option: str


@dataclass(frozen=True)
class GapCdfRow:
    rank: int
    empirical_gap: float


@dataclass(frozen=True)
class GapCdfResult:
    """Ranked per-task empirical gaps plus the least-squares line through the
    (rank, gap) points -- an R^2 near 1 means gaps are close to uniform."""

    rows: tuple[GapCdfRow, ...]
    slope: float
    intercept: float
    r_squared: float
    skipped: int


def ingest_judgments(records: Iterable[JudgmentRecord | tuple]) -> GapCdfResult:
    """Group votes by task, compute each task's empirical gap over the
    corpus-wide label set, and rank tasks by gap.

    Malformed records (empty fields) are skipped and counted. Labels absent
    from a task's votes count as probability zero, so a task where everyone
    agrees has gap 1 whenever the corpus has at least two distinct labels.
    """
    votes: dict[str, dict[str, int]] = {}
    labels: set[str] = set()
    skipped = 0
    for rec in records:
        if isinstance(rec, JudgmentRecord):
            task, worker, option = rec.task_id, rec.worker_id, rec.option
        else:
            if len(rec) != 3:
                skipped += 1
                continue
            task, worker, option = rec
        if not task or not worker or not option:
            skipped += 1
            continue
        labels.add(option)
        counter = votes.setdefault(task, {})
        counter[option] = counter.get(option, 0) + 1
    gaps = []
    for task, counter in votes.items():
        total = sum(counter.values())
        if len(labels) < 2:
            gaps.append(0.0)
            continue
        counts = sorted(counter.values(), reverse=True)
        top = counts[0]
        second = counts[1] if len(counts) > 1 else 0
        gaps.append((top - second) / total)
    gaps.sort()
    rows = tuple(GapCdfRow(rank, g) for rank, g in enumerate(gaps))
    if len(gaps) >= 2:
        x = np.arange(len(gaps), dtype=float)
        y = np.asarray(gaps)
        slope, intercept = np.polyfit(x, y, 1)
        ss_res = float(((y - (slope * x + intercept)) ** 2).sum())
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    else:
        slope, intercept, r_squared = 0.0, (gaps[0] if gaps else 0.0), 1.0
    return GapCdfResult(rows, float(slope), float(intercept), float(r_squared), skipped)


JUDGMENT_FIELDS = ("task_id", "worker_id", "option")


def read_judgments_csv(path) -> list[tuple]:
    """Rows of a header-bearing UTF-8 CSV with columns task_id, worker_id, option.

    Rows are returned raw (possibly incomplete); ingest_judgments does the
    skipping and counting.
    """
    out: list[tuple] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in JUDGMENT_FIELDS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"judgment CSV is missing columns: {missing}")
        for row in reader:
            out.append(tuple((row.get(c) or "").strip() for c in JUDGMENT_FIELDS))
    return out


def write_gap_cdf_csv(result: GapCdfResult, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("rank,empirical_gap\n")
        for row in result.rows:
            fh.write(f"{row.rank},{row.empirical_gap:.6g}\n")
