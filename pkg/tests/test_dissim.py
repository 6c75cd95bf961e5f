import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subnom import (Graph, delta_method1, delta_method2, delta_oracle01,
                    gm_expected, gm_min_approx, gm_min_exact, pad)
from subnom.dissim import (Dissimilarity, Method1Config, Method2Config,
                           Oracle01Config, embedding_discrepancy)

P3 = Graph.from_edges(3, [(1, 2), (2, 3)])
K3 = Graph.from_edges(3, [(1, 2), (2, 3), (1, 3)])


def _brute_mean(ai, aj):
    n = ai.shape[0]
    vals = [float(np.sum((ai - aj[np.ix_(p, p)]) ** 2))
            for p in itertools.permutations(range(n))]
    return float(np.mean(vals))


def _random_graph(rng, n, p=0.5):
    a = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    a[iu] = (rng.random(len(iu[0])) < p).astype(float)
    return Graph(a + a.T)


class TestPad:
    def test_naive_zero_pads(self):
        out = pad(np.ones((2, 2)) - np.eye(2), 4)
        assert out.shape == (4, 4)
        assert out[0, 1] == 1.0 and np.all(out[2:, :] == 0.0)

    def test_centered_on_empty_two_vertex(self):
        out = pad(np.zeros((2, 2)), 3, mode="centered")
        expected = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        assert np.array_equal(out, expected)

    def test_centered_maps_edges_to_plus_one(self):
        out = pad(np.asarray(K3.adjacency), 3, mode="centered")
        assert np.array_equal(out, np.ones((3, 3)) - np.eye(3))

    def test_too_small_target(self):
        with pytest.raises(ValueError, match="smaller"):
            pad(np.zeros((3, 3)), 2)

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            pad(np.zeros((2, 2)), 2, mode="weird")


class TestExactMatching:
    def test_p3_vs_k3(self):
        val, perm = gm_min_exact(np.asarray(P3.adjacency),
                                 np.asarray(K3.adjacency))
        assert val == 2.0
        assert sorted(perm) == [0, 1, 2]

    def test_isomorphic_graphs_reach_zero(self, rng):
        g = _random_graph(rng, 6)
        p = rng.permutation(6)
        a = np.asarray(g.adjacency)
        val, perm = gm_min_exact(a, a[np.ix_(p, p)])
        assert val == 0.0

    def test_argmin_attains_value(self, rng):
        ai = np.asarray(_random_graph(rng, 5).adjacency)
        aj = np.asarray(_random_graph(rng, 5).adjacency)
        val, perm = gm_min_exact(ai, aj)
        assert val == float(np.sum((ai - aj[np.ix_(perm, perm)]) ** 2))

    def test_cap_enforced(self):
        with pytest.raises(ValueError, match="capped"):
            gm_min_exact(np.zeros((9, 9)), np.zeros((9, 9)))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="equal size"):
            gm_min_exact(np.zeros((3, 3)), np.zeros((4, 4)))


class TestExpectedMatching:
    def test_p3_self_value(self):
        a = np.asarray(P3.adjacency)
        assert gm_expected(a, a) == pytest.approx(8.0 / 3.0, abs=1e-12)

    def test_k3_self_is_zero(self):
        a = np.asarray(K3.adjacency)
        assert gm_expected(a, a) == pytest.approx(0.0, abs=1e-12)

    def test_matches_brute_force(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            ai = np.asarray(_random_graph(rng, n).adjacency)
            aj = np.asarray(_random_graph(rng, n).adjacency)
            assert gm_expected(ai, aj) == pytest.approx(_brute_mean(ai, aj),
                                                        abs=1e-12)

    def test_centered_matrices_with_diagonal(self, rng):
        # The closed form also covers padded centered matrices (nonzero
        # diagonal blocks are still zero, but entries may be negative).
        ai = pad(np.asarray(P3.adjacency), 5, mode="centered")
        aj = pad(np.asarray(K3.adjacency), 5, mode="centered")
        assert gm_expected(ai, aj) == pytest.approx(_brute_mean(ai, aj),
                                                    abs=1e-12)


class TestApproxMatching:
    def test_never_below_exact(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 8))
            ai = np.asarray(_random_graph(rng, n).adjacency)
            aj = np.asarray(_random_graph(rng, n).adjacency)
            exact, _ = gm_min_exact(ai, aj)
            approx = gm_min_approx(ai, aj, restarts=5, rng=rng)
            assert approx >= exact - 1e-9

    def test_trivial_sizes(self):
        assert gm_min_approx(np.zeros((1, 1)), np.zeros((1, 1))) == 0.0

    def test_deterministic_with_seeded_rng(self):
        rng1 = np.random.default_rng(3)
        rng2 = np.random.default_rng(3)
        g1 = _random_graph(np.random.default_rng(0), 12)
        g2 = _random_graph(np.random.default_rng(1), 12)
        a1, a2 = np.asarray(g1.adjacency), np.asarray(g2.adjacency)
        assert gm_min_approx(a1, a2, rng=rng1) == gm_min_approx(a1, a2, rng=rng2)


class TestDeltaMethod2:
    def test_isomorphic_is_zero(self, rng):
        g = _random_graph(rng, 6)
        p = rng.permutation(6)
        g2 = Graph(np.asarray(g.adjacency)[np.ix_(p, p)])
        assert delta_method2(g, g2) == 0.0

    def test_p3_vs_k3_is_maximal(self):
        assert delta_method2(P3, K3) == 1.0

    def test_empty_pair_is_zero(self):
        g = Graph(np.zeros((3, 3)))
        assert delta_method2(g, g) == 0.0

    def test_padding_handles_size_mismatch(self):
        g5 = Graph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5)])
        val = delta_method2(P3, g5)
        assert 0.0 <= val <= 1.0

    def test_centered_padding_mode(self):
        cfg = Method2Config(padding="centered")
        g5 = Graph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5)])
        val = delta_method2(P3, g5, config=cfg)
        assert 0.0 <= val <= 1.0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 15 - 1), st.integers(2, 6), st.integers(2, 6))
    def test_range_invariant(self, bits, n1, n2):
        rng = np.random.default_rng(bits)
        g1 = _random_graph(rng, n1)
        g2 = _random_graph(rng, n2)
        val = delta_method2(g1, g2)
        assert 0.0 <= val <= 1.0
        # Symmetry of the underlying matching objective.
        assert val == pytest.approx(delta_method2(g2, g1), abs=1e-9)


class TestDeltaMethod1:
    def test_identical_graphs_are_zero(self, two_cliques):
        assert delta_method1(two_cliques, two_cliques) == pytest.approx(0.0,
                                                                        abs=1e-9)

    def test_sign_alignment(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 0.5]])
        assert embedding_discrepancy(x, -x) == pytest.approx(0.0, abs=1e-12)

    def test_different_structures_are_positive(self, two_cliques):
        sparse = Graph.from_edges(20, [(1, 2), (3, 4)])
        val = delta_method1(two_cliques, sparse)
        assert 0.0 < val < 1.0

    def test_empty_graph_raises(self):
        g = Graph(np.zeros((0, 0)))
        with pytest.raises(ValueError, match="nonempty"):
            delta_method1(g, P3)

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="dimension"):
            embedding_discrepancy(np.ones((3, 2)), np.ones((3, 3)))


class TestDeltaOracle01:
    def test_exact_membership(self):
        blocks = (frozenset({1, 2, 3}),)
        assert delta_oracle01({1, 2, 3}, blocks) == 0.0
        assert delta_oracle01({1, 2}, blocks) == 1.0

    def test_jaccard_threshold(self):
        cfg = Oracle01Config(jaccard_threshold=0.5)
        blocks = (frozenset({1, 2, 3, 4}),)
        assert delta_oracle01({1, 2, 3}, blocks, config=cfg) == 0.0
        assert delta_oracle01({9}, blocks, config=cfg) == 1.0


class TestDissimilarityDispatch:
    def test_method2_on_induced_subgraphs(self, two_cliques):
        d = Dissimilarity(kind="method2")
        val = d(two_cliques, range(1, 11), two_cliques, range(11, 21))
        assert val == 0.0

    def test_oracle01_requires_blocks(self, two_cliques):
        d = Dissimilarity(kind="oracle01")
        with pytest.raises(ValueError, match="interesting_blocks"):
            d(two_cliques, {1}, two_cliques, {2})

    def test_oracle01_dispatch(self, two_cliques):
        d = Dissimilarity(kind="oracle01",
                          interesting_blocks=(frozenset({2, 3}),))
        assert d(two_cliques, {1}, two_cliques, {2, 3}) == 0.0
        assert d(two_cliques, {1}, two_cliques, {2, 4}) == 1.0

    def test_unknown_kind(self, two_cliques):
        d = Dissimilarity(kind="nope")
        with pytest.raises(ValueError, match="kind"):
            d(two_cliques, {1}, two_cliques, {2})

    def test_method1_dispatch(self, two_cliques):
        d = Dissimilarity(kind="method1", config=Method1Config(dim=2))
        val = d(two_cliques, range(1, 11), two_cliques, range(11, 21))
        assert val == pytest.approx(0.0, abs=1e-9)
