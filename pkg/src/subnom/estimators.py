"""Scikit-learn style estimators wrapping the functional core.

These make the partition estimator and the nomination scheme compose with
standard tooling (get_params/set_params, clone, fit/predict conventions).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .cluster import ClusterConfig, estimate_hierarchy
from .dissim import Dissimilarity, Method1Config, Method2Config
from .graph import Graph, HierarchicalFunction, InterestSet
from .nominate import Ranking, rank_subgraphs


def _as_graph(X) -> Graph:
    if isinstance(X, Graph):
        return X
    return Graph(np.asarray(X, dtype=float))


class SpectralBlockClusterer(BaseEstimator, ClusterMixin):
    """Adjacency spectral embedding followed by Gaussian-mixture clustering.

    Parameters mirror ClusterConfig: ``dim=None`` selects the embedding
    dimension by a profile-likelihood elbow; ``n_blocks`` forces the block
    count, otherwise BIC chooses among ``candidates``.

    Attributes after fit: ``labels_`` (1-based block labels), ``n_blocks_``,
    ``hierarchy_`` (one-level HierarchicalFunction), ``estimate_``.
    """

    def __init__(self, dim=None, max_dim=20, n_blocks=None,
                 candidates=(2, 3, 4, 5, 6, 7, 8), restarts=5,
                 log_weights=False, random_state=0):
        self.dim = dim
        self.max_dim = max_dim
        self.n_blocks = n_blocks
        self.candidates = candidates
        self.restarts = restarts
        self.log_weights = log_weights
        self.random_state = random_state

    def fit(self, X, y=None, features=None):
        g = _as_graph(X)
        config = ClusterConfig(dim=self.dim, max_dim=self.max_dim,
                               n_blocks=self.n_blocks,
                               candidates=tuple(self.candidates),
                               restarts=self.restarts,
                               log_weights=self.log_weights,
                               features=features)
        rng = np.random.default_rng(self.random_state)
        hierarchy, estimate = estimate_hierarchy(g, config, rng)
        self.hierarchy_ = hierarchy
        self.estimate_ = estimate
        self.labels_ = np.asarray(estimate.assignment)
        self.n_blocks_ = estimate.m_hat
        return self

    def fit_predict(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).labels_


class SubgraphNominator(BaseEstimator):
    """Rank candidate blocks of a second graph against training subgraphs.

    fit() takes the training graph and its interesting blocks; predict()
    takes the candidate graph plus a partition (given or estimated by an
    inner SpectralBlockClusterer) and returns a Ranking.
    """

    def __init__(self, method="method2", level=1, n_blocks=None, dim=None,
                 exact_cap=8, restarts=10, random_state=0):
        self.method = method
        self.level = level
        self.n_blocks = n_blocks
        self.dim = dim
        self.exact_cap = exact_cap
        self.restarts = restarts
        self.random_state = random_state

    def _delta(self) -> Dissimilarity:
        if self.method == "method2":
            cfg = Method2Config(exact_cap=self.exact_cap, restarts=self.restarts)
        elif self.method == "method1":
            cfg = Method1Config(dim=self.dim or 2)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        return Dissimilarity(kind=self.method, config=cfg, seed=self.random_state)

    def fit(self, X, y):
        """X: training graph (Graph or adjacency); y: interesting blocks.

        y is either an InterestSet or an iterable of vertex collections.
        """
        g = _as_graph(X)
        if isinstance(y, InterestSet):
            training = tuple(y.resolved)
        else:
            training = tuple(frozenset(int(v) for v in blk) for blk in y)
        if not training:
            raise ValueError("need at least one training subgraph")
        self.training_graph_ = g
        self.training_blocks_ = training
        return self

    def predict(self, X, hierarchy: HierarchicalFunction = None) -> Ranking:
        check_is_fitted(self, "training_blocks_")
        g2 = _as_graph(X)
        if hierarchy is None:
            clusterer = SpectralBlockClusterer(
                dim=self.dim, n_blocks=self.n_blocks,
                random_state=self.random_state)
            clusterer.fit(g2)
            hierarchy = clusterer.hierarchy_
        # A synthetic interest set over the stored training blocks; the
        # ranking only consumes the resolved vertex sets.
        delta = self._delta()
        from .graph import BlockRef  # local to avoid unused import at top

        refs = tuple(BlockRef(0, i) for i in range(len(self.training_blocks_)))
        t1 = InterestSet(refs=refs, resolved=self.training_blocks_)
        return rank_subgraphs(t1, hierarchy, self.training_graph_, g2,
                              delta, self.level)
