"""Numerical laboratory for rate-distortion analysis of coding for machines:
finite-alphabet solvers, machine-oriented reductions, identity verification,
task-appropriateness scoring, a synthetic two-class experiment, and
rate-curve comparison."""

from .probspace import (
    Alphabet,
    AlphabetMismatchError,
    Channel,
    DeterministicMap,
    DistortionMatrix,
    FiniteDistribution,
    HypothesisViolatedError,
    TaskModel,
    channel_compose,
    compose,
    entropy,
    expected_distortion,
    lift_reproduction,
    map_then_channel,
    merge_reproduction_letters,
    mutual_information,
    pushforward,
)
from .rd_solver import (
    ConvergenceError,
    InstanceTooLargeError,
    RDCurve,
    RDPoint,
    RDSolverConfig,
    SweepError,
    blahut_arimoto,
    brute_force_rd,
    rate_at_distortion,
    sweep,
)
from .machine_rd import (
    CodingApproach,
    MachineRDInstance,
    SupervisedGapResult,
    compare_curves,
    distortion_levels,
    induced_distortion,
    machine_rd,
    reduce,
    supervised_gap,
)
from .theorem_suite import (
    InstanceSpec,
    Verdict,
    generate_instance,
    verify,
    verify_merge_property,
)
from .task_appropriateness import (
    AppropriatenessReport,
    LabeledFeatureSet,
    compute_report,
    depth_sweep,
    load_feature_set,
    save_feature_set,
)
from .bd_metrics import BDResult, RateMetricCurve, bd_metric, bd_rate, load_curve

__version__ = "1.0.0"
