"""Probability vectors and joint distributions with prescribed Shannon entropies."""

from .cascade import (
    DEFAULT_MATERIALIZATION_CAP,
    build_from_schedule,
    build_with_reports,
    entry_at,
    extend,
    marginal,
    materialize,
)
from .entropy_core import (
    DenseJointTensor,
    EntropySchedule,
    FactoredJointDistribution,
    ProbabilityVector,
    SolverMethod,
    SolverReport,
    conditional_increments,
    cumulative_targets,
    joint_entropy_dense,
    joint_entropy_factored,
    shannon_entropy,
    validate_schedule,
)
from .errors import *  # noqa: F401,F403
from .sampler import SampleBatch, empirical_entropy, sample_tuples
from .solver import (
    SolveOutcome,
    SolverConfig,
    solve_exponential_family,
    solve_random_search,
    solve_two_level,
    solve_vector,
)

__version__ = "0.1.0"
