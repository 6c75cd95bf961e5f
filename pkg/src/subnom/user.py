"""Errorful binary user model and user-aided re-ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BlockRef, HierarchicalFunction, block
from .nominate import Ranking


@dataclass(frozen=True)
class UserModel:
    """Capacity-t binary labeler: P(1 | interesting) = theta,
    P(1 | uninteresting) = gamma.  The oracle is (theta, gamma) = (1, 0)."""

    theta: float
    gamma: float
    capacity: int

    def __post_init__(self):
        if not (0 <= self.theta <= 1 and 0 <= self.gamma <= 1):
            raise ValueError("theta and gamma must lie in [0, 1]")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")

    @property
    def is_oracle(self) -> bool:
        return self.theta == 1.0 and self.gamma == 0.0

    @staticmethod
    def oracle(capacity: int) -> "UserModel":
        return UserModel(theta=1.0, gamma=0.0, capacity=capacity)


def sample_user(eta, interesting_vertices, model: UserModel, rng) -> np.ndarray:
    """Independent Bernoulli replies for the queried tuple eta."""
    eta = list(eta)
    if len(set(eta)) != len(eta):
        raise ValueError("queried vertices must be distinct")
    interesting = frozenset(interesting_vertices)
    probs = np.array([model.theta if v in interesting else model.gamma
                      for v in eta])
    return (rng.random(len(eta)) < probs).astype(int)


def select_eta(ranking: Ranking, hhat: HierarchicalFunction, t: int, rng,
               per_block: int = 1, exclude=()) -> tuple:
    """Draw t query vertices from the top-ranked blocks.

    Default: one uniformly random vertex from each of the top-t blocks.
    With per_block > 1, consecutive top blocks each contribute per_block
    vertices.  Blocks exhausted by ``exclude`` are skipped (reported in the
    second return value); raises if the ranked pool cannot supply t.

    Returns (eta, skipped_blocks).
    """
    if t > ranking.m_hat * per_block:
        raise ValueError(
            f"capacity t={t} exceeds {ranking.m_hat} blocks x {per_block}")
    exclude = set(exclude)
    eta, skipped = [], []
    for j in ranking.order:
        if len(eta) >= t:
            break
        pool = sorted(block(hhat, BlockRef(ranking.level, j)) - exclude)
        if not pool:
            skipped.append(j)
            continue
        take = min(per_block, t - len(eta), len(pool))
        picks = rng.choice(len(pool), size=take, replace=False)
        eta.extend(pool[int(i)] for i in picks)
    if len(eta) < t:
        raise ValueError(f"vertex pool exhausted: drew {len(eta)} of t={t}")
    return tuple(eta), tuple(skipped)


def partition_labels(ranking: Ranking, hhat: HierarchicalFunction, eta,
                     replies) -> tuple:
    """Split ranked block indices into (I, N, M) from the user replies.

    I: strictly more than half the queried vertices labeled 1;
    N: at least half labeled 0 (exact ties land here);
    M: blocks with no queried vertices.
    """
    eta = list(eta)
    replies = list(replies)
    if len(eta) != len(replies):
        raise ValueError("replies must align with eta")
    ones = {}
    totals = {}
    vertex_block = {}
    for j in ranking.order:
        for v in block(hhat, BlockRef(ranking.level, j)):
            vertex_block[v] = j
    for v, x in zip(eta, replies):
        j = vertex_block[v]
        totals[j] = totals.get(j, 0) + 1
        ones[j] = ones.get(j, 0) + int(x)
    i_set, n_set, m_set = [], [], []
    for j in ranking.order:
        if j not in totals:
            m_set.append(j)
        elif 2 * (totals[j] - ones[j]) >= totals[j]:
            n_set.append(j)
        else:
            i_set.append(j)
    return tuple(i_set), tuple(n_set), tuple(m_set)


def rerank(ranking: Ranking, i_set, n_set, m_set) -> Ranking:
    """User-improved order: I blocks, then M, then N, each group stable."""
    if sorted(list(i_set) + list(n_set) + list(m_set)) != sorted(ranking.order):
        raise ValueError("I, N, M must partition the ranked indices")
    pos = {j: r for r, j in enumerate(ranking.order)}
    new_order = (sorted(i_set, key=pos.get) + sorted(m_set, key=pos.get)
                 + sorted(n_set, key=pos.get))
    return ranking.reordered(new_order)


def apply_user(ranking: Ranking, hhat: HierarchicalFunction,
               interesting_vertices, model: UserModel, rng,
               per_block: int = 1, exclude=()) -> tuple:
    """One supervision round: select eta, query the user, re-rank.

    Returns (new ranking, eta, replies).
    """
    eta, _skipped = select_eta(ranking, hhat, model.capacity, rng,
                               per_block=per_block, exclude=exclude)
    replies = sample_user(eta, interesting_vertices, model, rng)
    i_set, n_set, m_set = partition_labels(ranking, hhat, eta, replies)
    return rerank(ranking, i_set, n_set, m_set), eta, replies


def first_affirmative_rerank(ranking: Ranking, hhat: HierarchicalFunction,
                             eta, replies) -> Ranking:
    """Promote the first block (rank order) with an affirmative reply.

    Assumes one queried vertex per block in rank order; everything else
    keeps its relative order.
    """
    eta = list(eta)
    replies = list(replies)
    vertex_block = {}
    for j in ranking.order:
        for v in block(hhat, BlockRef(ranking.level, j)):
            vertex_block[v] = j
    queried_blocks = [vertex_block[v] for v in eta]
    if len(set(queried_blocks)) != len(queried_blocks):
        raise ValueError("expected one queried vertex per block")
    for j in ranking.order:
        if j in queried_blocks and replies[queried_blocks.index(j)] == 1:
            rest = [b for b in ranking.order if b != j]
            return ranking.reordered([j] + rest)
    return ranking


def iterate_user(ranking: Ranking, hhat: HierarchicalFunction,
                 interesting_vertices, model: UserModel, rounds: int, rng,
                 per_block: int = 1) -> Ranking:
    """Sequential supervision rounds with fresh query vertices each round.

    Vertices are drawn without replacement across rounds; if the top blocks
    run dry the iteration stops early.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    used = set()
    current = ranking
    for _ in range(rounds):
        try:
            current, eta, _replies = apply_user(
                current, hhat, interesting_vertices, model, rng,
                per_block=per_block, exclude=used)
        except ValueError:
            break
        used.update(eta)
    return current
