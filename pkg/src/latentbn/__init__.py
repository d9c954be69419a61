"""Latent-copula Bayesian network learning and discrete-network inference.

The package learns directed graphs from mixed continuous/ordinal/binary
data by estimating a latent Gaussian correlation matrix from rank
statistics, restricting a tabu score search to a constraint-based
skeleton, and optionally stabilizing the result over bootstrap
resamples. A downstream discrete stack fits conditional probability
tables on a fixed graph and answers exact posterior, scenario and
sensitivity queries.
"""

__version__ = "0.1.0"

from .benchmark import (
    BenchmarkOptions,
    BenchmarkReport,
    BenchmarkRow,
    run_benchmark,
)
from .citest import CiTestConfig, ci_test, latent_pc, partial_correlation, pc_cpdag, pc_skeleton
from .data import Column, MixedDataset, read_dataset, write_dataset
from .discrete import (
    DiscreteBayesNet,
    discretize_round,
    fit_cpts,
    network_from_json,
    network_to_json,
    query,
    sample_dataset,
    scenario,
    sobol_first_order,
)
from .errors import (
    CollinearityError,
    ConstantOutputError,
    DegenerateColumnError,
    GraphFormatError,
    IllConditionedError,
    InsufficientSampleError,
    LatentBnError,
)
from .graphs import (
    Dag,
    Pdag,
    StructuralMetrics,
    dag_to_cpdag,
    d_separated,
    graph_from_dot,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    sensitivity_specificity,
    shd,
)
from .latentcorr import (
    estimate_latent_sigma,
    kendall_tau,
    nearest_psd_correlation,
    normal_scores,
    tau_to_latent_corr,
)
from .scores import ScoreConfig, gauss_scorer, local_score_gauss, local_score_sem, sem_scorer
from .search import SearchConfig, latent_mmhc, score_based_only, tabu_search
from .simulate import SimConfig, WeightedDag, mixify, simulate_dag, simulate_dataset, simulate_latent
from .stability import (
    EdgeStrengthTable,
    bootstrap_learn,
    consensus_dag,
    inclusion_threshold,
    stable_latent_mmhc,
)

__all__ = [
    "__version__",
    "BenchmarkOptions",
    "BenchmarkReport",
    "BenchmarkRow",
    "run_benchmark",
    "CiTestConfig",
    "ci_test",
    "latent_pc",
    "partial_correlation",
    "pc_cpdag",
    "pc_skeleton",
    "Column",
    "MixedDataset",
    "read_dataset",
    "write_dataset",
    "DiscreteBayesNet",
    "discretize_round",
    "fit_cpts",
    "network_from_json",
    "network_to_json",
    "query",
    "sample_dataset",
    "scenario",
    "sobol_first_order",
    "CollinearityError",
    "ConstantOutputError",
    "DegenerateColumnError",
    "GraphFormatError",
    "IllConditionedError",
    "InsufficientSampleError",
    "LatentBnError",
    "Dag",
    "Pdag",
    "StructuralMetrics",
    "dag_to_cpdag",
    "d_separated",
    "graph_from_dot",
    "graph_from_json",
    "graph_to_dot",
    "graph_to_json",
    "sensitivity_specificity",
    "shd",
    "estimate_latent_sigma",
    "kendall_tau",
    "nearest_psd_correlation",
    "normal_scores",
    "tau_to_latent_corr",
    "ScoreConfig",
    "gauss_scorer",
    "local_score_gauss",
    "local_score_sem",
    "sem_scorer",
    "SearchConfig",
    "latent_mmhc",
    "score_based_only",
    "tabu_search",
    "SimConfig",
    "WeightedDag",
    "mixify",
    "simulate_dag",
    "simulate_dataset",
    "simulate_latent",
    "EdgeStrengthTable",
    "bootstrap_learn",
    "consensus_dag",
    "inclusion_threshold",
    "stable_latent_mmhc",
]
