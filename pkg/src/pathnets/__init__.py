"""Bayesian modelling of populations of interaction networks via distances."""

from .core import (
    Dataset,
    SpaceBounds,
    VertexSet,
    canonicalize,
    in_bounds,
    multiplicity_profile,
    vertex_count,
)
from .distances import (
    MetricSpec,
    common_subpath_len,
    common_subseq_len,
    frechet_mean,
    graph_distance,
    multiset_distance,
    path_distance,
    seq_distance,
    steinhaus,
)
from .estimators import (
    FrechetMean,
    MajorityVoteGraph,
    RoundedMeanGraph,
    SIMPosterior,
    SISPosterior,
    SNFPosterior,
)
from .models import (
    HollywoodParams,
    SIMParams,
    SISParams,
    TrPoisson,
    exact_entropy,
    exact_partition,
    exact_pmf,
    hollywood_sample,
    log_kernel,
)
from .moves import CoOccurrence, MoveConfig, build_cooccurrence, informed_entry_dist
from .posterior import (
    GammaPrior,
    PosteriorChain,
    PosteriorConfig,
    PriorSpec,
    UniformPrior,
    fit,
    point_estimates,
    posterior_predictive,
    true_predictive,
)
from .samplers import ChainConfig, a_count, sim_mcmc_sample, sis_mcmc_sample
from .graphs import aggregate, majority_vote, rounded_mean, snf_fit, snf_mcmc_sample

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "SpaceBounds",
    "VertexSet",
    "canonicalize",
    "in_bounds",
    "multiplicity_profile",
    "vertex_count",
    "MetricSpec",
    "common_subpath_len",
    "common_subseq_len",
    "frechet_mean",
    "graph_distance",
    "multiset_distance",
    "path_distance",
    "seq_distance",
    "steinhaus",
    "FrechetMean",
    "MajorityVoteGraph",
    "RoundedMeanGraph",
    "SIMPosterior",
    "SISPosterior",
    "SNFPosterior",
    "HollywoodParams",
    "SIMParams",
    "SISParams",
    "TrPoisson",
    "exact_entropy",
    "exact_partition",
    "exact_pmf",
    "hollywood_sample",
    "log_kernel",
    "CoOccurrence",
    "MoveConfig",
    "build_cooccurrence",
    "informed_entry_dist",
    "GammaPrior",
    "PosteriorChain",
    "PosteriorConfig",
    "PriorSpec",
    "UniformPrior",
    "fit",
    "point_estimates",
    "posterior_predictive",
    "true_predictive",
    "ChainConfig",
    "a_count",
    "sim_mcmc_sample",
    "sis_mcmc_sample",
    "aggregate",
    "majority_vote",
    "rounded_mean",
    "snf_fit",
    "snf_mcmc_sample",
]
