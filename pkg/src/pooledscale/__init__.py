"""Pooled scale estimators for variable scaling before cluster analysis."""

__version__ = "0.1.0"

from .engines import (  # noqa: E402
    Dendrogram,
    DistMatrix,
    Partition,
    cut_dendrogram,
    hclust,
    kmeans_multi,
    pairwise_distances,
    pam,
)
from .evaluation import adjusted_rand_index, best_ari_over_k  # noqa: E402
from .gap import (  # noqa: E402
    GapCurve,
    GapReference,
    build_reference,
    gap_curve,
    select_k_gap,
    select_k_jump,
)
from .scaling import (  # noqa: E402
    ScaleDecision,
    ScaleReport,
    classic_scale,
    pooled_scale_variable,
    scale_dataset,
    scale_ratios,
)
from .univariate import UnivariateSolution, solve_kmeans_1d, solve_kmedians_1d, solve_path  # noqa: E402

__all__ = [
    "Dendrogram", "DistMatrix", "GapCurve", "GapReference", "Partition", "ScaleDecision",
    "ScaleReport", "UnivariateSolution", "adjusted_rand_index", "best_ari_over_k",
    "build_reference", "classic_scale", "cut_dendrogram", "gap_curve", "hclust", "iris_path",
    "kmeans_multi", "pairwise_distances", "pam", "pooled_scale_variable", "scale_dataset",
    "scale_ratios", "select_k_gap", "select_k_jump", "solve_kmeans_1d", "solve_kmedians_1d",
    "solve_path",
]


def iris_path():
    """Path of the bundled Fisher iris CSV (label column ``species``)."""
    from importlib.resources import files

    return files(__name__) / "data" / "iris.csv"
