import numpy as np
import pytest

from subnom import ClusterConfig, estimate_hierarchy, gmm_fit, validate_hierarchy
from subnom.graph import Graph


def _two_blobs(rng, n=60, sep=8.0):
    x = np.vstack([rng.normal(0.0, 0.5, size=(n // 2, 2)),
                   rng.normal(sep, 0.5, size=(n // 2, 2))])
    return x


class TestGmmFit:
    def test_forced_count_separates_blobs(self, rng):
        x = _two_blobs(rng)
        est = gmm_fit(x, 2, rng)
        assert est.m_hat == 2
        first = est.assignment[:30]
        second = est.assignment[30:]
        assert len(set(first)) == 1 and len(set(second)) == 1
        assert first[0] != second[0]

    def test_bic_selects_two(self, rng):
        x = _two_blobs(rng)
        est = gmm_fit(x, [1, 2, 3], rng)
        assert est.m_hat == 2
        assert set(est.scores) == {1, 2, 3}
        assert est.scores[2] < est.scores[1]

    def test_labels_are_compact(self, rng):
        x = _two_blobs(rng)
        est = gmm_fit(x, [4], rng)
        labels = set(int(v) for v in est.assignment)
        assert labels == set(range(1, est.m_hat + 1))

    def test_single_component(self, rng):
        est = gmm_fit(rng.normal(size=(20, 2)), 1, rng)
        assert est.m_hat == 1
        assert np.all(est.assignment == 1)

    def test_deterministic_given_seed(self):
        x = _two_blobs(np.random.default_rng(0))
        a = gmm_fit(x, [2, 3], np.random.default_rng(5))
        b = gmm_fit(x, [2, 3], np.random.default_rng(5))
        assert np.array_equal(a.assignment, b.assignment)
        assert a.log_likelihood == b.log_likelihood

    def test_one_dimensional_input(self, rng):
        x = np.concatenate([rng.normal(0, 0.1, 20), rng.normal(5, 0.1, 20)])
        est = gmm_fit(x, 2, rng)
        assert est.m_hat == 2

    def test_collinear_data_survives_via_ridge(self, rng):
        # Points on a line: full covariance is singular without the ridge.
        t = np.concatenate([rng.normal(0, 0.1, 20), rng.normal(5, 0.1, 20)])
        x = np.column_stack([t, 2.0 * t])
        est = gmm_fit(x, 2, rng)
        assert est.m_hat == 2

    def test_invalid_candidates(self, rng):
        with pytest.raises(ValueError, match="candidate"):
            gmm_fit(np.ones((5, 1)), [0], rng)
        with pytest.raises(ValueError, match="candidate"):
            gmm_fit(np.ones((5, 1)), [6], rng)
        with pytest.raises(ValueError, match="at least 2"):
            gmm_fit(np.ones((1, 1)), [1], rng)


class TestEstimateHierarchy:
    def test_two_cliques_forced(self, two_cliques, rng):
        h, est = estimate_hierarchy(two_cliques, ClusterConfig(dim=2, n_blocks=2),
                                    rng)
        assert validate_hierarchy(h, 20).ok
        assert h.k == 1 and est.m_hat == 2
        labels = h.level_labels(1)
        assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1
        assert labels[0] != labels[10]

    def test_elbow_dimension_selection(self, two_cliques, rng):
        cfg = ClusterConfig(dim=None, max_dim=6, n_blocks=2)
        h, est = estimate_hierarchy(two_cliques, cfg, rng)
        assert est.m_hat == 2

    def test_bic_candidates(self, two_cliques, rng):
        cfg = ClusterConfig(dim=2, candidates=(1, 2, 3))
        _, est = estimate_hierarchy(two_cliques, cfg, rng)
        assert est.m_hat == 2

    def test_feature_augmentation_changes_partition(self, rng):
        # An empty graph carries no signal; separable features carry all of it.
        g = Graph(np.zeros((20, 20)))
        feats = np.vstack([np.zeros((10, 1)), np.full((10, 1), 9.0)])
        feats = feats + rng.normal(scale=0.01, size=(20, 1))
        cfg = ClusterConfig(dim=1, n_blocks=2, features=feats)
        with pytest.warns(UserWarning, match="rank"):  # empty graph: rank 0
            h, _ = estimate_hierarchy(g, cfg, rng)
        labels = h.level_labels(1)
        assert len(set(labels[:10])) == 1 and labels[0] != labels[10]
