"""Hierarchical subgraph nomination with user-in-the-loop re-ranking."""

__version__ = "0.1.0"

from .graph import (BlockRef, Graph, HierarchicalFunction, InterestSet,
                    block, iso_equivalence_class, param_count, parent_merge,
                    validate_hierarchy)
from .models import HsbmParams, SbmParams, SimModelSpec, build_sim_model, \
    sample_hsbm, sample_sbm
from .embed import Embedding, ase, augment_features, select_dim
from .cluster import ClusterConfig, PartitionEstimate, estimate_hierarchy, gmm_fit
from .dissim import (Dissimilarity, delta_method1, delta_method2,
                     delta_oracle01, gm_expected, gm_min_approx, gm_min_exact,
                     pad)
from .nominate import (Ranking, block_overlap, hit_curve, loss, rank_subgraphs,
                       top_vertices_recall)
from .user import (UserModel, first_affirmative_rerank, iterate_user,
                   partition_labels, rerank, sample_user, select_eta)
from .theory import (binom_cdf, heatmap_grid, mc_verify, prob_fn_only,
                     prob_general, prob_general_sum, prob_oracle,
                     relative_loss)
from .estimators import SpectralBlockClusterer, SubgraphNominator

__all__ = [
    "BlockRef", "Graph", "HierarchicalFunction", "InterestSet", "block",
    "iso_equivalence_class", "param_count", "parent_merge",
    "validate_hierarchy",
    "HsbmParams", "SbmParams", "SimModelSpec", "build_sim_model",
    "sample_hsbm", "sample_sbm",
    "Embedding", "ase", "augment_features", "select_dim",
    "ClusterConfig", "PartitionEstimate", "estimate_hierarchy", "gmm_fit",
    "Dissimilarity", "delta_method1", "delta_method2", "delta_oracle01",
    "gm_expected", "gm_min_approx", "gm_min_exact", "pad",
    "Ranking", "block_overlap", "hit_curve", "loss", "rank_subgraphs",
    "top_vertices_recall",
    "UserModel", "first_affirmative_rerank", "iterate_user",
    "partition_labels", "rerank", "sample_user", "select_eta",
    "binom_cdf", "heatmap_grid", "mc_verify", "prob_fn_only", "prob_general",
    "prob_general_sum", "prob_oracle", "relative_loss",
    "SpectralBlockClusterer", "SubgraphNominator",
]
