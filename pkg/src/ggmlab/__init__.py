"""Semiblind sparse subgraph recovery in Gaussian graphical models.

A target subnetwork is estimated from internal samples plus a noisy
precision summary of the unobserved external subnetwork, with graphical
lasso and latent-variable baselines and a reproducible benchmark harness.
"""
from ._kernels import backend as kernel_backend
from .baselines import (GlassoEstimate, LvggmEstimate, SolverOptions,
                        glasso_fit, lvggm_fit)
from .dilat import (CcpState, DilatProblem, SummaryNotPDError, dilat_fit,
                    dilat_objective, infer_latent_mean, initialize)
from .evaluation import (ExperimentConfig, ResultRow, SupportSet,
                         jaccard_distance, run_experiment, sensitivity_sweep,
                         support_set)
from .graphs import (GraphModel, GraphSpec, Partition, PartitionedPrecision,
                     build_ground_truth, generate_graph, marginal_precision,
                     normalized_laplacian, partition_vertices)
from .sampling import (ExternalSummary, SampleSet, internal_samples,
                       make_external_summary, sample_covariance,
                       sample_gaussian)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "kernel_backend",
    "GraphSpec", "GraphModel", "Partition", "PartitionedPrecision",
    "generate_graph", "normalized_laplacian", "partition_vertices",
    "build_ground_truth", "marginal_precision",
    "SampleSet", "ExternalSummary", "sample_gaussian", "sample_covariance",
    "internal_samples", "make_external_summary",
    "SolverOptions", "GlassoEstimate", "LvggmEstimate", "glasso_fit",
    "lvggm_fit",
    "DilatProblem", "CcpState", "SummaryNotPDError", "dilat_fit",
    "dilat_objective", "initialize", "infer_latent_mean",
    "SupportSet", "ExperimentConfig", "ResultRow", "support_set",
    "jaccard_distance", "run_experiment", "sensitivity_sweep",
]
