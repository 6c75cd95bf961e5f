"""Ranking of candidate blocks, nomination loss, and retrieval metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import BlockRef, Graph, HierarchicalFunction, InterestSet, block


@dataclass(frozen=True)
class Ranking:
    """Per-level total ordering of candidate blocks, best first.

    ``order`` is a permutation of the 1-based block indices at ``level``;
    ``scores`` are the corresponding min-over-training dissimilarities.
    Fresh rankings list scores non-decreasing; user re-ranking may reorder
    them.  ``tie_groups`` lists index tuples sharing a score.
    """

    level: int
    order: tuple
    scores: tuple
    m_hat: int
    tie_groups: tuple = ()

    def __post_init__(self):
        if sorted(self.order) != list(range(1, self.m_hat + 1)):
            raise ValueError("order must be a permutation of [m_hat]")
        if len(self.scores) != len(self.order):
            raise ValueError("scores must align with order")

    def rank_of(self, index: int) -> int:
        """1-based position of a block index in the list."""
        return self.order.index(index) + 1

    def reordered(self, new_order) -> "Ranking":
        """Same blocks in a new order; scores follow their blocks."""
        lut = dict(zip(self.order, self.scores))
        return Ranking(level=self.level, order=tuple(new_order),
                       scores=tuple(lut[i] for i in new_order),
                       m_hat=self.m_hat, tie_groups=self.tie_groups)


def rank_subgraphs(t1: InterestSet, hhat: HierarchicalFunction, g1: Graph,
                   g2: Graph, delta, level: int) -> Ranking:
    """Score each level-``level`` candidate block of hhat against t1.

    The score is the min over training subgraphs of delta; candidates sort
    by increasing score with ties broken by ascending block index.
    """
    if not t1.refs:
        raise ValueError("empty training interest set")
    labels = hhat.level_labels(level)
    m_hat = int(labels.max()) if len(labels) else 0
    if m_hat == 0:
        return Ranking(level=level, order=(), scores=(), m_hat=0)
    scores = []
    for j in range(1, m_hat + 1):
        cand = block(hhat, BlockRef(level, j))
        s = min(delta(g1, t1_block, g2, cand) for t1_block in t1.resolved)
        scores.append(float(s))
    order = sorted(range(1, m_hat + 1), key=lambda j: (scores[j - 1], j))
    sorted_scores = tuple(scores[j - 1] for j in order)
    ties = []
    i = 0
    while i < m_hat:
        j = i
        while j + 1 < m_hat and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        if j > i:
            ties.append(tuple(order[i:j + 1]))
        i = j + 1
    return Ranking(level=level, order=tuple(order), scores=sorted_scores,
                   m_hat=m_hat, tie_groups=tuple(ties))


def _block_misses(ranking: Ranking, hhat: HierarchicalFunction, s2: InterestSet,
                  g2: Graph, delta_e, threshold: float):
    """Indicator per ranked position: 1 if far from every interesting block."""
    out = []
    for j in ranking.order:
        cand = block(hhat, BlockRef(ranking.level, j))
        miss = all(delta_e(g2, s2_block, g2, cand) > threshold
                   for s2_block in s2.resolved)
        out.append(1.0 if miss else 0.0)
    return out


def loss(ranking: Ranking, hhat: HierarchicalFunction, s2: InterestSet, g2: Graph,
         delta_e, i: int, threshold: float) -> float:
    """Precision-style nomination loss over the top min(i, m_hat) positions."""
    if i < 1:
        raise ValueError("i must be >= 1")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if ranking.m_hat == 0:
        return 1.0
    misses = _block_misses(ranking, hhat, s2, g2, delta_e, threshold)
    top = min(i, ranking.m_hat)
    return float(sum(misses[:top]) / top)


def hit_curve(ranking: Ranking, hhat: HierarchicalFunction, s2: InterestSet,
              g2: Graph, delta_e, threshold: float) -> tuple:
    """First interesting position and the cumulative found-by-n indicator.

    Returns (position, curve) where curve[j] = 1 iff an interesting block
    appears at rank <= j+1.  Position is m_hat + 1 when nothing qualifies.
    """
    if ranking.m_hat == 0:
        raise ValueError("empty ranking")
    misses = _block_misses(ranking, hhat, s2, g2, delta_e, threshold)
    try:
        pos = misses.index(0.0) + 1
    except ValueError:
        pos = ranking.m_hat + 1
    curve = np.zeros(ranking.m_hat)
    if pos <= ranking.m_hat:
        curve[pos - 1:] = 1.0
    return pos, curve


def top_vertices_recall(ranking: Ranking, hhat: HierarchicalFunction,
                        s2: InterestSet, m: int = 25) -> float:
    """Fraction of interesting vertices among the first m nominated vertices.

    Vertices are collected block by block in rank order until m are drawn;
    the last block is truncated arbitrarily-but-deterministically (sorted
    vertex order).
    """
    target = s2.vertex_union
    if not target:
        return 0.0
    collected = []
    for j in ranking.order:
        verts = sorted(block(hhat, BlockRef(ranking.level, j)))
        room = m - len(collected)
        if room <= 0:
            break
        collected.extend(verts[:room])
    return len(set(collected) & target) / len(target)


def block_overlap(hhat: HierarchicalFunction, h2: HierarchicalFunction,
                  s2: InterestSet) -> tuple:
    """(alpha, beta) cluster-fidelity diagnostics for a single true block.

    alpha: purity of the estimated block best overlapping the true block;
    beta: minimum contamination fraction among the other estimated blocks.
    """
    if len(s2.refs) != 1:
        raise ValueError("block_overlap expects a single interesting block")
    ref = s2.refs[0]
    true_set = set(block(h2, ref))
    level = ref.level if ref.level <= hhat.k else hhat.k
    labels = hhat.level_labels(level)
    m_hat = int(labels.max())
    inter, sizes = [], []
    for j in range(1, m_hat + 1):
        est = block(hhat, BlockRef(level, j))
        inter.append(len(est & true_set))
        sizes.append(len(est))
    best = int(np.argmax(inter))
    alpha = inter[best] / sizes[best]
    others = [inter[j] / sizes[j] for j in range(m_hat) if j != best]
    beta = min(others) if others else 0.0
    return float(alpha), float(beta)
