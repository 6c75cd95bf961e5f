"""Blockmodel parameterizations, samplers, and the simulation distribution.

Samplers are pure functions of (params, rng state): the same seed yields the
same graph bit-for-bit.  Replicate-level parallelism should derive one child
seed per replicate via numpy SeedSequence spawning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, HierarchicalFunction


class EmptyBlockError(RuntimeError):
    """Multinomial assignment kept producing an empty block."""


_RESAMPLE_LIMIT = 100


@dataclass(frozen=True)
class SbmParams:
    """Flat stochastic blockmodel (n, K, Lambda, pi).

    ``fixed_sizes`` switches membership from Multinomial(1, pi) draws to a
    deterministic contiguous assignment with the given block sizes.
    """

    n: int
    K: int
    Lambda: np.ndarray
    pi: np.ndarray = None
    fixed_sizes: tuple = None

    def __post_init__(self):
        lam = np.asarray(self.Lambda, dtype=float)
        if lam.shape != (self.K, self.K):
            raise ValueError("Lambda must be K x K")
        if not np.allclose(lam, lam.T):
            raise ValueError("Lambda must be symmetric")
        if lam.min() < 0 or lam.max() > 1:
            raise ValueError("Lambda entries must lie in [0, 1]")
        lam = lam.copy()
        lam.setflags(write=False)
        object.__setattr__(self, "Lambda", lam)
        if self.fixed_sizes is not None:
            sizes = tuple(int(s) for s in self.fixed_sizes)
            if len(sizes) != self.K or any(s < 1 for s in sizes):
                raise ValueError("fixed_sizes must give K positive sizes")
            if sum(sizes) != self.n:
                raise ValueError("fixed_sizes must sum to n")
            object.__setattr__(self, "fixed_sizes", sizes)
        else:
            pi = np.asarray(self.pi, dtype=float)
            if pi.shape != (self.K,) or pi.min() < 0 or not np.isclose(pi.sum(), 1):
                raise ValueError("pi must be a length-K probability vector")
            pi = pi.copy()
            pi.setflags(write=False)
            object.__setattr__(self, "pi", pi)

    @property
    def depth(self) -> int:
        return 1


@dataclass(frozen=True)
class HsbmParams:
    """Recursive blockmodel: top-level (K1, Lambda1, pi1) plus K1 children.

    Lambda1 only governs cross-block edges and must be hollow.  Children are
    SbmParams or deeper HsbmParams, all of equal depth.
    """

    n: int
    K1: int
    Lambda1: np.ndarray
    children: tuple
    pi1: np.ndarray = None
    fixed_sizes: tuple = None

    def __post_init__(self):
        lam = np.asarray(self.Lambda1, dtype=float)
        if lam.shape != (self.K1, self.K1):
            raise ValueError("Lambda1 must be K1 x K1")
        if not np.allclose(lam, lam.T):
            raise ValueError("Lambda1 must be symmetric")
        if np.any(np.diag(lam) != 0):
            raise ValueError("Lambda1 must be hollow")
        if lam.min() < 0 or lam.max() > 1:
            raise ValueError("Lambda1 entries must lie in [0, 1]")
        lam = lam.copy()
        lam.setflags(write=False)
        object.__setattr__(self, "Lambda1", lam)
        children = tuple(self.children)
        if len(children) != self.K1:
            raise ValueError("need exactly K1 child parameter sets")
        depths = {c.depth for c in children}
        if len(depths) != 1:
            raise ValueError("children must all have the same depth")
        object.__setattr__(self, "children", children)
        if self.fixed_sizes is not None:
            sizes = tuple(int(s) for s in self.fixed_sizes)
            if len(sizes) != self.K1 or any(s < 1 for s in sizes):
                raise ValueError("fixed_sizes must give K1 positive sizes")
            if sum(sizes) != self.n:
                raise ValueError("fixed_sizes must sum to n")
            for s, c in zip(sizes, children):
                if c.n != s:
                    raise ValueError("child n must match its fixed size")
            object.__setattr__(self, "fixed_sizes", sizes)
        else:
            pi = np.asarray(self.pi1, dtype=float)
            if pi.shape != (self.K1,) or pi.min() < 0 or not np.isclose(pi.sum(), 1):
                raise ValueError("pi1 must be a length-K1 probability vector")
            pi = pi.copy()
            pi.setflags(write=False)
            object.__setattr__(self, "pi1", pi)

    @property
    def depth(self) -> int:
        return 1 + self.children[0].depth


def _draw_memberships(n, K, pi, rng):
    """iid Multinomial(1, pi) memberships with all K blocks non-empty."""
    for _ in range(_RESAMPLE_LIMIT):
        b = rng.choice(K, size=n, p=pi)
        if len(np.unique(b)) == K:
            return b
    raise EmptyBlockError(f"no non-empty assignment of {n} vertices to {K} "
                          f"blocks in {_RESAMPLE_LIMIT} attempts")


def _memberships(params, rng):
    sizes = params.fixed_sizes
    if sizes is not None:
        return np.repeat(np.arange(len(sizes)), sizes)
    K = params.K if isinstance(params, SbmParams) else params.K1
    pi = params.pi if isinstance(params, SbmParams) else params.pi1
    return _draw_memberships(params.n, K, pi, rng)


def _bernoulli_edges(prob: np.ndarray, rng) -> np.ndarray:
    """Symmetric hollow 0/1 adjacency with independent upper-triangle draws."""
    n = prob.shape[0]
    u = rng.random((n, n))
    iu = np.triu_indices(n, k=1)
    a = np.zeros((n, n))
    a[iu] = (u[iu] < prob[iu]).astype(float)
    return a + a.T


def sample_sbm(params: SbmParams, rng) -> tuple:
    """Sample a graph and its ground-truth (1-based) block vector."""
    b = _memberships(params, rng)
    prob = params.Lambda[np.ix_(b, b)]
    a = _bernoulli_edges(prob, rng)
    return Graph(a), b + 1


def _sample_hier(params, rng):
    """Recursive sampler; returns (adjacency, level-label columns)."""
    if isinstance(params, SbmParams):
        g, b = sample_sbm(params, rng)
        return np.asarray(g.adjacency).copy(), [b]
    b1 = _memberships(params, rng)
    n = params.n
    # Cross-block edges from the hollow top-level matrix.
    prob = params.Lambda1[np.ix_(b1, b1)]
    same = b1[:, None] == b1[None, :]
    prob = np.where(same, 0.0, prob)
    a = _bernoulli_edges(prob, rng)
    cols = [b1 + 1] + [np.zeros(n, dtype=int) for _ in range(params.children[0].depth)]
    offsets = [0] * params.children[0].depth
    for j in range(params.K1):
        members = np.nonzero(b1 == j)[0]
        child = params.children[j]
        if child.n != len(members):
            if child.fixed_sizes is not None:
                raise ValueError(
                    f"child {j + 1} expects n={child.n}, sampled {len(members)}")
            child = _resize_child(child, len(members))
        sub_a, sub_cols = _sample_hier(child, rng)
        a[np.ix_(members, members)] = sub_a
        for d, col in enumerate(sub_cols):
            cols[1 + d][members] = col + offsets[d]
        for d, col in enumerate(sub_cols):
            offsets[d] += int(col.max())
    return a, cols


def _resize_child(child, n):
    """Re-target a multinomial-mode child at the sampled block size."""
    if isinstance(child, SbmParams):
        return SbmParams(n=n, K=child.K, Lambda=child.Lambda, pi=child.pi)
    return HsbmParams(n=n, K1=child.K1, Lambda1=child.Lambda1,
                      children=child.children, pi1=child.pi1)


def sample_hsbm(params: HsbmParams, rng) -> tuple:
    """Sample (Graph, HierarchicalFunction) from a recursive blockmodel.

    Block labels at each level run in parent order, so H(v, i) reproduces
    the level-i membership vector.
    """
    a, cols = _sample_hier(params, rng)
    h = HierarchicalFunction(np.column_stack(cols))
    return Graph(a), h


@dataclass(frozen=True)
class SimModelSpec:
    """Knobs of the motif-based simulation distribution."""

    K1: int = 16
    n_motifs: int = 3
    cross_p: float = 0.01
    size_scale: int = 10
    size_base: float = 20.0
    size_spread: float = 50.0
    duplicate_block: int = 9   # forced to reuse the motif of source_block
    source_block: int = 1
    sub_blocks: int = 3
    omega_low: float = 2.0
    omega_high: float = 10.0


def _dirichlet_motif(rng, dim=3) -> np.ndarray:
    """Gram matrix of probability-vector columns: symmetric, entries in [0,1]."""
    x = rng.dirichlet(np.ones(dim), size=dim).T  # columns iid Dirichlet(1,1,1)
    return x.T @ x


def _child_sizes(total: int, omega: np.ndarray, rng) -> tuple:
    """Split ``total`` into 3 positive sizes via tenth-rounded Dirichlet draws."""
    for _ in range(_RESAMPLE_LIMIT):
        prop = rng.dirichlet(omega)
        s1 = int(round(total * round(prop[0], 1)))
        s2 = int(round(total * round(prop[1], 1)))
        s3 = total - s1 - s2
        if s1 >= 1 and s2 >= 1 and s3 >= 1:
            return (s1, s2, s3)
    raise EmptyBlockError(f"could not split {total} into positive child sizes")


def build_sim_model(rng, spec: SimModelSpec = SimModelSpec()) -> tuple:
    """Draw one motif-based 2-level HSBM parameterization.

    Returns (HsbmParams, motif_assignment) where motif_assignment[j] is the
    1-based motif index used by top-level block j+1.
    """
    sizes = spec.size_scale * np.floor(
        spec.size_base + spec.size_spread * rng.random(spec.K1)).astype(int)
    motifs = [_dirichlet_motif(rng, spec.sub_blocks) for _ in range(spec.n_motifs)]
    assignment = rng.integers(1, spec.n_motifs + 1, size=spec.K1)
    if 1 <= spec.duplicate_block <= spec.K1 and 1 <= spec.source_block <= spec.K1:
        assignment[spec.duplicate_block - 1] = assignment[spec.source_block - 1]
    children = []
    for j in range(spec.K1):
        omega = rng.uniform(spec.omega_low, spec.omega_high, size=spec.sub_blocks)
        child_sizes = _child_sizes(int(sizes[j]), omega, rng)
        children.append(SbmParams(
            n=int(sizes[j]), K=spec.sub_blocks,
            Lambda=motifs[assignment[j] - 1], fixed_sizes=child_sizes))
    n = int(sizes.sum())
    lam1 = np.full((spec.K1, spec.K1), spec.cross_p)
    np.fill_diagonal(lam1, 0.0)
    params = HsbmParams(n=n, K1=spec.K1, Lambda1=lam1,
                        children=tuple(children), fixed_sizes=tuple(int(s) for s in sizes))
    return params, assignment
