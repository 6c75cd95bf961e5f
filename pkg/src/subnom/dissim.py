"""Subgraph dissimilarities used to rank candidate blocks.

Three families, all mapping into [0,1] with smaller meaning more similar:

* method2 - ratio of the minimum graph-matching distance to its uniform-
  permutation mean, exact by enumeration on small graphs and Frank-Wolfe
  (FAQ) relaxation above that;
* method1 - Gaussian-kernel mean discrepancy between separate re-embeddings
  of the two subgraphs, sign-aligned and squashed to [0,1];
* oracle01 - membership test against known interesting vertex sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import quadratic_assignment
from scipy.spatial.distance import cdist

from .embed import ase
from .graph import Graph

EXACT_MATCH_CAP = 8


def pad(a: np.ndarray, n_target: int, mode: str = "naive") -> np.ndarray:
    """Grow an adjacency to n_target x n_target.

    naive: zero-pad.  centered: replace A by 2A - (J - I) first, then
    zero-pad; only meaningful inside the matching objective.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n_target < n:
        raise ValueError(f"n_target={n_target} smaller than matrix size {n}")
    if mode == "centered":
        a = 2.0 * a - (np.ones((n, n)) - np.eye(n))
    elif mode != "naive":
        raise ValueError(f"unknown padding mode {mode!r}")
    if n_target == n:
        return a.copy()
    out = np.zeros((n_target, n_target))
    out[:n, :n] = a
    return out


def _match_value(ai, aj, perm):
    pj = aj[np.ix_(perm, perm)]
    diff = ai - pj
    return float(np.sum(diff * diff))


def gm_min_exact(ai: np.ndarray, aj: np.ndarray, cap: int = EXACT_MATCH_CAP):
    """Exact min over all permutations of ||Ai - P Aj P^T||_F^2.

    Enumerates n! permutations; serves as the oracle for the relaxed solver.
    Returns (min value, argmin permutation as a 0-based index array).
    """
    ai = np.asarray(ai, dtype=float)
    aj = np.asarray(aj, dtype=float)
    n = ai.shape[0]
    if aj.shape != ai.shape:
        raise ValueError("matrices must have equal size (pad first)")
    if n > cap:
        raise ValueError(f"exact matching capped at n={cap}, got {n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=int)
    batch = aj[perms[:, :, None], perms[:, None, :]]  # (n!, n, n)
    vals = np.sum((ai[None] - batch) ** 2, axis=(1, 2))
    best = int(np.argmin(vals))
    return float(vals[best]), perms[best].copy()


def gm_min_approx(ai: np.ndarray, aj: np.ndarray, restarts: int = 10,
                  rng=None, maxiter: int = 100) -> float:
    """Frank-Wolfe relaxation (FAQ) of the matching minimum.

    Runs from the barycenter plus ``restarts`` random starts and keeps the
    best projected permutation, so the value is always attained by a true
    permutation and never undercuts the exact minimum.
    """
    ai = np.asarray(ai, dtype=float)
    aj = np.asarray(aj, dtype=float)
    if aj.shape != ai.shape:
        raise ValueError("matrices must have equal size (pad first)")
    n = ai.shape[0]
    if n <= 1:
        return 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    norm2 = float(np.sum(ai * ai) + np.sum(aj * aj))
    best = np.inf
    for r in range(restarts + 1):
        # r == 0: deterministic barycenter start; others random.
        opts = {"maximize": True, "maxiter": maxiter, "shuffle_input": False,
                "rng": rng}
        if r > 0:
            opts["P0"] = "randomized"
        res = quadratic_assignment(ai, aj, method="faq", options=opts)
        perm = res.col_ind
        val = norm2 - 2.0 * float(np.sum(ai * aj[np.ix_(perm, perm)]))
        best = min(best, val)
        if best <= 1e-12:
            break
    return max(best, 0.0)


def gm_expected(ai: np.ndarray, aj: np.ndarray) -> float:
    """Mean of ||Ai - P Aj P^T||_F^2 over uniformly random permutations.

    Closed form from pair statistics: off-diagonal entries land on a
    uniformly random ordered pair, diagonal entries on a uniform diagonal
    position.  Equals the brute-force permutation mean exactly.
    """
    ai = np.asarray(ai, dtype=float)
    aj = np.asarray(aj, dtype=float)
    if aj.shape != ai.shape:
        raise ValueError("matrices must have equal size (pad first)")
    n = ai.shape[0]
    if n == 0:
        return 0.0
    di, dj = np.diag(ai), np.diag(aj)
    off_i = float(ai.sum() - di.sum())
    off_j = float(aj.sum() - dj.sum())
    cross = float(di.sum() * dj.sum()) / n
    if n > 1:
        cross += off_i * off_j / (n * (n - 1))
    return float(np.sum(ai * ai) + np.sum(aj * aj)) - 2.0 * cross


@dataclass(frozen=True)
class Method2Config:
    padding: str = "naive"
    exact_cap: int = EXACT_MATCH_CAP
    restarts: int = 10
    maxiter: int = 100


def delta_method2(gi: Graph, gj: Graph, config: Method2Config = Method2Config(),
                  rng=None) -> float:
    """Scaled graph-matching ratio: min distance over its permutation mean.

    Zero for isomorphic graphs; a vanishing mean (both graphs saturated by
    automorphisms) also maps to zero.
    """
    n = max(gi.n, gj.n)
    ai = pad(gi.adjacency, n, mode=config.padding)
    aj = pad(gj.adjacency, n, mode=config.padding)
    mean = gm_expected(ai, aj)
    if mean <= 1e-12:
        return 0.0
    if n <= config.exact_cap:
        mn, _ = gm_min_exact(ai, aj, cap=config.exact_cap)
    else:
        mn = gm_min_approx(ai, aj, restarts=config.restarts, rng=rng,
                           maxiter=config.maxiter)
    return float(np.clip(mn / mean, 0.0, 1.0))


@dataclass(frozen=True)
class Method1Config:
    dim: int = 2
    bandwidth: float = None  # None: median pairwise distance of the pooled set


def _mmd2(x, y, bw):
    kxx = np.exp(-cdist(x, x, "sqeuclidean") / (2 * bw * bw))
    kyy = np.exp(-cdist(y, y, "sqeuclidean") / (2 * bw * bw))
    kxy = np.exp(-cdist(x, y, "sqeuclidean") / (2 * bw * bw))
    return float(kxx.mean() + kyy.mean() - 2.0 * kxy.mean())


def embedding_discrepancy(x: np.ndarray, y: np.ndarray, bw: float = None) -> float:
    """Squared-kernel mean discrepancy after per-dimension sign alignment."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = x.shape[1]
    if y.shape[1] != d:
        raise ValueError("point sets must share a dimension")
    if bw is None:
        pooled = np.vstack([x, y])
        dists = cdist(pooled, pooled)
        pos = dists[dists > 0]
        bw = float(np.median(pos)) if len(pos) else 1.0
    best = np.inf
    for signs in itertools.product([1.0, -1.0], repeat=d):
        best = min(best, _mmd2(x, y * np.array(signs), bw))
    return max(best, 0.0)


def delta_method1(gi: Graph, gj: Graph, config: Method1Config = Method1Config()) -> float:
    """Nonparametric embedding statistic between two subgraphs.

    Each subgraph is re-embedded separately at a common dimension; the
    embeddings are compared by a Gaussian-kernel mean discrepancy with a
    median-heuristic bandwidth, minimized over per-dimension sign flips,
    and squashed to [0,1] via x/(1+x).
    """
    if gi.n == 0 or gj.n == 0:
        raise ValueError("both graphs must be nonempty")
    d = min(config.dim, gi.n, gj.n)
    xi = ase(gi, d).points
    xj = ase(gj, d).points
    # Common dimension: ase may truncate below d on rank-deficient inputs.
    d_common = min(xi.shape[1], xj.shape[1])
    xi, xj = xi[:, :d_common], xj[:, :d_common]
    if np.allclose(xi, xi[0]) and np.allclose(xj, xj[0]) and np.allclose(xi[0], xj[0]):
        return 0.0
    stat = embedding_discrepancy(xi, xj, bw=config.bandwidth)
    return stat / (1.0 + stat)


@dataclass(frozen=True)
class Oracle01Config:
    jaccard_threshold: float = 1.0


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def delta_oracle01(candidate_vertices, interesting_blocks,
                   config: Oracle01Config = Oracle01Config()) -> float:
    """0 iff the candidate matches some interesting block, else 1.

    Match means Jaccard overlap >= the configured threshold (default 1.0,
    i.e. exact vertex-set equality).
    """
    cand = frozenset(candidate_vertices)
    for blk in interesting_blocks:
        if _jaccard(cand, frozenset(blk)) >= config.jaccard_threshold:
            return 0.0
    return 1.0


@dataclass(frozen=True)
class Dissimilarity:
    """Pluggable dissimilarity: kind plus method-specific configuration.

    Called with (training graph, training vertices, candidate graph,
    candidate vertices); graph-based kinds compare induced subgraphs, the
    oracle compares vertex sets against its configured interesting blocks.
    """

    kind: str = "method2"
    config: object = None
    interesting_blocks: tuple = None  # oracle01 only
    seed: int = 0

    def __call__(self, g1: Graph, t1_vertices, g2: Graph, cand_vertices) -> float:
        if self.kind == "method2":
            cfg = self.config or Method2Config()
            rng = np.random.default_rng(self.seed)
            return delta_method2(g1.induced(t1_vertices), g2.induced(cand_vertices),
                                 config=cfg, rng=rng)
        if self.kind == "method1":
            cfg = self.config or Method1Config()
            return delta_method1(g1.induced(t1_vertices), g2.induced(cand_vertices),
                                 config=cfg)
        if self.kind == "oracle01":
            cfg = self.config or Oracle01Config()
            if self.interesting_blocks is None:
                raise ValueError("oracle01 requires interesting_blocks")
            return delta_oracle01(cand_vertices, self.interesting_blocks, config=cfg)
        raise ValueError(f"unknown dissimilarity kind {self.kind!r}")
