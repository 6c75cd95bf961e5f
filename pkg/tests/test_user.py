import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subnom import (HierarchicalFunction, Ranking, UserModel,
                    first_affirmative_rerank, iterate_user, partition_labels,
                    rerank, sample_user, select_eta)
from subnom.user import apply_user


def _flat(labels):
    return HierarchicalFunction.single_level(labels)


@pytest.fixture
def four_blocks():
    """4 blocks of 3 vertices; identity pre-user ranking."""
    hhat = _flat([1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4])
    ranking = Ranking(level=1, order=(1, 2, 3, 4),
                      scores=(0.1, 0.2, 0.3, 0.4), m_hat=4)
    return hhat, ranking


class TestUserModel:
    def test_oracle(self):
        m = UserModel.oracle(3)
        assert m.theta == 1.0 and m.gamma == 0.0 and m.capacity == 3
        assert m.is_oracle

    def test_validation(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            UserModel(theta=1.5, gamma=0.0, capacity=1)
        with pytest.raises(ValueError, match="capacity"):
            UserModel(theta=1.0, gamma=0.0, capacity=0)


class TestSampleUser:
    def test_oracle_replies_track_membership(self, rng):
        replies = sample_user((1, 5, 9), {5}, UserModel.oracle(3), rng)
        assert list(replies) == [0, 1, 0]

    def test_duplicate_queries_rejected(self, rng):
        with pytest.raises(ValueError, match="distinct"):
            sample_user((1, 1), {1}, UserModel.oracle(2), rng)

    def test_errorful_rates(self):
        rng = np.random.default_rng(0)
        model = UserModel(theta=0.8, gamma=0.1, capacity=1)
        interesting = set(range(1, 501))
        hits = np.mean([sample_user((v,), interesting, model, rng)[0]
                        for v in range(1, 501)])
        misses = np.mean([sample_user((v,), interesting, model, rng)[0]
                          for v in range(501, 1001)])
        assert abs(hits - 0.8) < 0.06
        assert abs(misses - 0.1) < 0.06


class TestSelectEta:
    def test_one_vertex_per_top_block(self, four_blocks, rng):
        hhat, ranking = four_blocks
        eta, skipped = select_eta(ranking, hhat, 3, rng)
        assert skipped == ()
        assert len(eta) == 3
        blocks = [hhat(v, 1) for v in eta]
        assert blocks == [1, 2, 3]

    def test_per_block_multiplicity(self, four_blocks, rng):
        hhat, ranking = four_blocks
        eta, _ = select_eta(ranking, hhat, 4, rng, per_block=2)
        blocks = [hhat(v, 1) for v in eta]
        assert blocks == [1, 1, 2, 2]
        assert len(set(eta)) == 4

    def test_exclusion_skips_exhausted_blocks(self, four_blocks, rng):
        hhat, ranking = four_blocks
        eta, skipped = select_eta(ranking, hhat, 2, rng, exclude={1, 2, 3})
        assert skipped == (1,)
        assert [hhat(v, 1) for v in eta] == [2, 3]

    def test_capacity_exceeds_pool(self, four_blocks, rng):
        hhat, ranking = four_blocks
        with pytest.raises(ValueError, match="exceeds"):
            select_eta(ranking, hhat, 5, rng)

    def test_pool_exhaustion(self, four_blocks, rng):
        hhat, ranking = four_blocks
        with pytest.raises(ValueError, match="exhausted"):
            select_eta(ranking, hhat, 4, rng, exclude=set(range(1, 13)))


class TestPartitionLabels:
    def test_groups(self, four_blocks):
        hhat, ranking = four_blocks
        eta = (1, 4, 7)  # one vertex in each of blocks 1..3
        i_set, n_set, m_set = partition_labels(ranking, hhat, eta, (1, 0, 1))
        assert i_set == (1, 3)
        assert n_set == (2,)
        assert m_set == (4,)

    def test_exact_tie_goes_to_n(self, four_blocks):
        hhat, ranking = four_blocks
        eta = (1, 2)  # two vertices of block 1, split replies
        i_set, n_set, m_set = partition_labels(ranking, hhat, eta, (1, 0))
        assert n_set == (1,)
        assert 1 not in i_set

    def test_majority_one_wins(self, four_blocks):
        hhat, ranking = four_blocks
        eta = (1, 2, 3)
        i_set, n_set, _ = partition_labels(ranking, hhat, eta, (1, 1, 0))
        assert i_set == (1,)

    def test_misaligned_replies(self, four_blocks):
        hhat, ranking = four_blocks
        with pytest.raises(ValueError, match="align"):
            partition_labels(ranking, hhat, (1, 2), (1,))


class TestRerank:
    def test_group_order_and_stability(self, four_blocks):
        _, ranking = four_blocks
        out = rerank(ranking, i_set=(3,), n_set=(1,), m_set=(2, 4))
        assert out.order == (3, 2, 4, 1)
        # Scores follow their blocks.
        assert out.scores == (0.3, 0.2, 0.4, 0.1)

    def test_invalid_partition(self, four_blocks):
        _, ranking = four_blocks
        with pytest.raises(ValueError, match="partition"):
            rerank(ranking, i_set=(1,), n_set=(2,), m_set=(3,))

    @settings(max_examples=50, deadline=None)
    @given(st.permutations([1, 2, 3, 4, 5]), st.integers(0, 2 ** 5 - 1),
           st.integers(0, 2 ** 5 - 1))
    def test_rerank_is_stable_permutation(self, order, i_bits, m_bits):
        ranking = Ranking(level=1, order=tuple(order),
                          scores=tuple(0.1 * k for k in range(5)), m_hat=5)
        i_set = tuple(j for j in order if (i_bits >> (j - 1)) & 1)
        rest = [j for j in order if j not in i_set]
        m_set = tuple(j for j in rest if (m_bits >> (j - 1)) & 1)
        n_set = tuple(j for j in rest if j not in m_set)
        out = rerank(ranking, i_set, n_set, m_set)
        assert sorted(out.order) == [1, 2, 3, 4, 5]
        # Each group preserves its original relative order.
        pos = {j: r for r, j in enumerate(order)}
        for group in (i_set, m_set, n_set):
            got = [j for j in out.order if j in group]
            assert got == sorted(group, key=pos.get)
        # Group precedence: all of I before all of M before all of N.
        out_pos = {j: r for r, j in enumerate(out.order)}
        for a in i_set:
            assert all(out_pos[a] < out_pos[b] for b in m_set + n_set)
        for a in m_set:
            assert all(out_pos[a] < out_pos[b] for b in n_set)


class TestFirstAffirmative:
    def test_promotes_first_affirmative_block(self, four_blocks):
        hhat, ranking = four_blocks
        out = first_affirmative_rerank(ranking, hhat, (1, 4, 7), (0, 1, 1))
        assert out.order == (2, 1, 3, 4)

    def test_no_affirmative_keeps_order(self, four_blocks):
        hhat, ranking = four_blocks
        out = first_affirmative_rerank(ranking, hhat, (1, 4), (0, 0))
        assert out.order == ranking.order

    def test_requires_one_query_per_block(self, four_blocks):
        hhat, ranking = four_blocks
        with pytest.raises(ValueError, match="one queried vertex"):
            first_affirmative_rerank(ranking, hhat, (1, 2), (1, 1))


class TestApplyAndIterate:
    def test_oracle_round_promotes_true_block(self, four_blocks, rng):
        hhat, ranking = four_blocks
        interesting = {7, 8, 9}  # block 3
        out, eta, replies = apply_user(ranking, hhat, interesting,
                                       UserModel.oracle(3), rng)
        assert out.order[0] == 3
        assert len(eta) == 3
        assert list(replies) == [0, 0, 1]

    def test_iterate_uses_fresh_vertices(self, four_blocks):
        hhat, ranking = four_blocks
        rng = np.random.default_rng(0)
        seen = []
        orig = sample_user

        # Spy on the queried vertices via a pass-through user.
        def spy(eta, interesting, model, inner_rng):
            seen.extend(eta)
            return orig(eta, interesting, model, inner_rng)

        import subnom.user as user_mod
        old = user_mod.sample_user
        user_mod.sample_user = spy
        try:
            iterate_user(ranking, hhat, {7, 8, 9}, UserModel.oracle(3),
                         rounds=3, rng=rng)
        finally:
            user_mod.sample_user = old
        assert len(seen) == 9
        assert len(set(seen)) == 9

    def test_iterate_stops_when_pool_dries_up(self, four_blocks, rng):
        hhat, ranking = four_blocks
        # 12 vertices, capacity 4 per round: the 4th round cannot fill eta.
        out = iterate_user(ranking, hhat, {1, 2, 3}, UserModel.oracle(4),
                           rounds=10, rng=rng)
        assert sorted(out.order) == [1, 2, 3, 4]

    def test_rounds_validation(self, four_blocks, rng):
        hhat, ranking = four_blocks
        with pytest.raises(ValueError, match="rounds"):
            iterate_user(ranking, hhat, set(), UserModel.oracle(1), 0, rng)
