"""Exit-time sampling for stochastic reaction systems.

Two backends compute the first time a reaction system satisfies an exit
condition: the classical Gillespie SSA, and an exit-time method that runs
trajectories without clocks, groups the recorded total propensities by
relative tolerance epsilon, and reconstructs the elapsed time as a sum of
one Erlang variate per group. A hypoexponential/Erlang analytic module
serves as the validation oracle, and a harness runs paired ensembles,
error norms and epsilon-convergence studies.
"""
from .grouping import GroupedPropensities, partition, rho, sample_exit_time
from .harness import (
    AllCensoredError,
    ComparisonResult,
    ConvergenceRecord,
    EnsembleHistogram,
    EnsembleSample,
    GridMismatchError,
    compare_ensembles,
    collect,
    collect_until_exits,
    convergence_study,
    pointwise_error,
    run_ensemble,
)
from .hypoexp import (
    ErlangDistribution,
    HypoexpDistribution,
    approximation_gap,
    erlang_pdf,
    hypoexp_cdf,
    hypoexp_inverse_cdf,
    hypoexp_pdf,
    laplace_of_pdf,
    mixture_coefficients,
    pdf_by_numerical_convolution,
)
from .model import (
    ExitCondition,
    ModelError,
    Reaction,
    ReactionSystem,
    Species,
    SystemState,
    apply_reaction,
    load_model,
    parse_model,
    propensity,
    total_propensity,
)
from .ssa import Status, TrajectoryOutcome, run_ssa, run_timefree
from .streams import RandomStream, exponential_inverse, select_index

__all__ = [
    "AllCensoredError",
    "ComparisonResult",
    "ConvergenceRecord",
    "EnsembleHistogram",
    "EnsembleSample",
    "ErlangDistribution",
    "ExitCondition",
    "GridMismatchError",
    "GroupedPropensities",
    "HypoexpDistribution",
    "ModelError",
    "RandomStream",
    "Reaction",
    "ReactionSystem",
    "Species",
    "Status",
    "SystemState",
    "TrajectoryOutcome",
    "apply_reaction",
    "approximation_gap",
    "compare_ensembles",
    "collect",
    "collect_until_exits",
    "convergence_study",
    "erlang_pdf",
    "exponential_inverse",
    "hypoexp_cdf",
    "hypoexp_inverse_cdf",
    "hypoexp_pdf",
    "laplace_of_pdf",
    "load_model",
    "mixture_coefficients",
    "parse_model",
    "partition",
    "pdf_by_numerical_convolution",
    "pointwise_error",
    "propensity",
    "rho",
    "run_ensemble",
    "run_ssa",
    "run_timefree",
    "sample_exit_time",
    "select_index",
    "total_propensity",
]
