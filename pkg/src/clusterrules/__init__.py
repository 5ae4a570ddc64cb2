"""Rule-based explanations for the clusters of a black-box clustering pipeline."""
from .binning import BinningConfig, BinningMethod, Interval
from .dataset import AttributeKind, Dataset, cluster_rows, load_csv
from .explain import (Explanation, ExplanationMetrics, Predicate, Thresholds, explain_all,
                      qse, qse_aggregate, skyline)
from .gfim import GeneralizedItemset, mine
from .taxonomy import Taxonomy, build_taxonomy
from .transactions import augment_dataset

__all__ = [
    "AttributeKind", "BinningConfig", "BinningMethod", "Dataset", "Explanation",
    "ExplanationMetrics", "GeneralizedItemset", "Interval", "Predicate", "Taxonomy",
    "Thresholds", "augment_dataset", "build_taxonomy", "cluster_rows", "explain_all",
    "load_csv", "mine", "qse", "qse_aggregate", "skyline",
]
__version__ = "0.1.0"
