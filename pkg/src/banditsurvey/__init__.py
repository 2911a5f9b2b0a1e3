"""Adaptive crowd selection and stopping rules for multiple-choice microtasks.

A library and CLI simulator for the bandit survey problem: online policies
pick which crowd of workers to ask next, stopping rules decide when the
collected votes suffice and which option to output, and a reproducible
experiment harness measures the cost / error-rate tradeoff against
omniscient benchmarks and exact small-case oracles.
"""

from .core import (
    NoSamplesError,
    ProblemInstance,
    ResponseDistribution,
    TallySheet,
    gap,
    induced_gap,
    mix,
)
from .stopping import (
    CompositeRule,
    StoppingDecision,
    ThresholdRuleConfig,
    TotalRuleConfig,
    composite_decide,
    majority_option,
    threshold_decide,
    total_decide,
)
from .selection import (
    EerConfig,
    EerPolicy,
    Policy,
    RoundRobinPolicy,
    ThompsonPolicy,
    UcbConfig,
    UcbPolicy,
    UnifPolicy,
    eer_step,
    rr_select,
    simplex_grid,
    thompson_select,
    ucb_select,
    unif_select,
)
from .benchmark import (
    BenchmarkReport,
    NoInformationError,
    approx_best_crowd,
    deterministic_benchmark,
    randomized_benchmark,
    simulate_stream,
)
from .oracle import (
    FiniteStopReport,
    RuleStats,
    check_vector_inequality,
    exact_rule_stats,
    finite_stop_bound_check,
)
from .workload import (
    BiasSpec,
    GapCdfResult,
    GapCdfRow,
    JudgmentRecord,
    fixed_bias_workload,
    ingest_judgments,
    mixture_advantage_instance,
    uniform_bias_workload,
    uniform_gap_workload,
)
from .experiment import (
    AlgorithmSpec,
    CampaignConfig,
    RunResult,
    StoppingSetup,
    SweepRecord,
    SweepReport,
    child_seed,
    emit_csv,
    load_campaign_config,
    run_once,
    sweep,
)

__version__ = "0.1.0"
