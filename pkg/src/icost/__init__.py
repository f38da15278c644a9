"""Instance-complexity-based cost-sensitive learning.

Minority-class training instances are graded by how hard they are to learn
(k-nearest-neighbour composition or minimum-spanning-tree adjacency to the
other class) and given per-instance misclassification costs; the weights
then drive cost-sensitive logistic regression, linear SVM, CART trees or
random forests.
"""

from .complexity import Category, build_mst, knn_profiles, mst_profiles
from .costing import CostSpec, IRScaled, Mode, Scheme, assign_weights, weigh
from .dataset import Dataset, imbalance_stats, load_csv, make_split_plan
from .harness import ExperimentPlan, GridSpec, grid_search, make_synthetic, run_experiment, standard_grid
from .learners import LearnerConfig, predict_score

__version__ = "0.1.0"

__all__ = [
    "Category", "build_mst", "knn_profiles", "mst_profiles",
    "CostSpec", "IRScaled", "Mode", "Scheme", "assign_weights", "weigh",
    "Dataset", "imbalance_stats", "load_csv", "make_split_plan",
    "ExperimentPlan", "GridSpec", "grid_search", "make_synthetic", "run_experiment", "standard_grid",
    "LearnerConfig", "predict_score",
]
