"""Galton-Watson trees, their conjugate change of measure, and scaling limits
toward continuous-state branching processes."""

from .contour import ContourPath, concat, contour_of, eval_at, occupation_below, rescale, sup_path, truncate
from .experiments import ExperimentReport, Functional, default_catalog, ks_statistic, weighted_mean_se
from .gwtree import Forest, OrderedTree, enumerate_truncated, generation_sizes, sample_forest, sample_truncated
from .limits import ScalingFamily, family_near_critical_binary
from .mechanism import BranchingMechanism, classify, extinction_cdf, largest_root, shift, u_solve
from .offspring import OffspringDistribution, conjugate, extinction_prob, gf_eval, gf_iterate, mean

__version__ = "0.1.0"

__all__ = [
    "BranchingMechanism",
    "ContourPath",
    "ExperimentReport",
    "Forest",
    "Functional",
    "OffspringDistribution",
    "OrderedTree",
    "ScalingFamily",
    "classify",
    "concat",
    "conjugate",
    "contour_of",
    "default_catalog",
    "enumerate_truncated",
    "eval_at",
    "extinction_cdf",
    "extinction_prob",
    "family_near_critical_binary",
    "generation_sizes",
    "gf_eval",
    "gf_iterate",
    "ks_statistic",
    "largest_root",
    "mean",
    "occupation_below",
    "rescale",
    "sample_forest",
    "sample_truncated",
    "shift",
    "sup_path",
    "truncate",
    "u_solve",
    "weighted_mean_se",
]
