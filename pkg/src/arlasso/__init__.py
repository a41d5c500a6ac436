"""Accept-Reject Lasso feature selection and benchmark tools."""

from .data import Dataset, GenConfig, GroundTruth, example_config, generate, load_csv, preprocess
from .ensembles import EnsembleSpec, random_lasso, stability_selection
from .evaluation import ConfusionCounts, group_confusion, ols_refit_eval, precision_recall_f1
from .exceptions import (ARLError, ConfigError, DegenerateSignalError, GroupTooLargeError,
                         NoUsableSubsetsError, PreconditionError)
from .groups import ProblemGroup, identify_problem_groups
from .methods import METHODS, run_base
from .partition import kmeans, partition_data, silhouette_score
from .rescue import ARLParams, RescueReport, arl_select, count_cooccurrence
from .solvers import (CvSpec, SelectionResult, adaptive_lasso, cv_lasso, elastic_net_cv, lasso_cd,
                      ridge, ridge_cv)

__all__ = [
    "ARLError", "ARLParams", "ConfigError", "ConfusionCounts", "CvSpec", "Dataset", "DegenerateSignalError",
    "EnsembleSpec", "GenConfig", "GroundTruth", "GroupTooLargeError", "METHODS", "NoUsableSubsetsError",
    "PreconditionError", "ProblemGroup", "RescueReport", "SelectionResult", "adaptive_lasso", "arl_select",
    "count_cooccurrence", "cv_lasso", "elastic_net_cv", "example_config", "generate", "group_confusion",
    "identify_problem_groups", "kmeans", "lasso_cd", "load_csv", "ols_refit_eval", "partition_data",
    "precision_recall_f1", "preprocess", "random_lasso", "ridge", "ridge_cv", "run_base", "silhouette_score",
    "stability_selection",
]
__version__ = "0.1.0"
