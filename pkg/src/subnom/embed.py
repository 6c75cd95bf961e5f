"""Adjacency spectral embedding, dimension selection, feature augmentation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .graph import Graph

_DENSE_EIG_LIMIT = 2000


@dataclass(frozen=True)
class Embedding:
    """Latent positions (one row per vertex) and the retained spectrum."""

    points: np.ndarray
    spectrum: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        spec = np.asarray(self.spectrum, dtype=float)
        pts = pts.copy()
        pts.setflags(write=False)
        spec = spec.copy()
        spec.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "spectrum", spec)

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coordinate of each column positive."""
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0:
            vecs[:, j] = -vecs[:, j]
    return vecs


def ase(g: Graph, d: int, log_transform: bool = False) -> Embedding:
    """Scaled top-d spectral embedding of the (possibly weighted) adjacency.

    Rows are the top-d singular vectors scaled by square roots of singular
    values.  For a symmetric adjacency the singular pairs come from the
    eigendecomposition with magnitude-sorted eigenvalues.  A log(1 + w)
    transform is available for heavy-tailed weights.
    """
    a = np.asarray(g.adjacency, dtype=float)
    if log_transform:
        a = np.log1p(a)
    n = a.shape[0]
    if d > n:
        raise ValueError(f"d={d} exceeds n={n}")
    if n <= _DENSE_EIG_LIMIT or d >= n - 1:
        vals, vecs = scipy.linalg.eigh(a)
    else:
        # Fixed start vector keeps the iterative solver deterministic.
        vals, vecs = scipy.sparse.linalg.eigsh(
            a, k=min(2 * d, n - 1), which="LM", v0=np.ones(n))
    order = np.argsort(-np.abs(vals))
    vals = vals[order]
    vecs = vecs[:, order]
    svals = np.abs(vals[:d])
    rank = int(np.sum(svals > max(n, 1) * np.finfo(float).eps * (svals.max() if len(svals) else 0)))
    if rank < d:
        warnings.warn(f"requested d={d} exceeds numerical rank {rank}; truncating")
        d_eff = max(rank, 1)
    else:
        d_eff = d
    vecs = _fix_signs(vecs[:, :d_eff])
    points = vecs * np.sqrt(svals[:d_eff])
    return Embedding(points=points, spectrum=svals[:d_eff])


def select_dim(spectrum) -> int:
    """Profile-likelihood elbow on the magnitude-sorted spectrum.

    Splits the sorted values into a head and tail group at every position,
    scores each split with a common-variance Gaussian likelihood, and
    returns the split maximizing it (first maximizer on ties).
    """
    s = np.sort(np.abs(np.asarray(spectrum, dtype=float)))[::-1]
    p = len(s)
    if p == 0:
        raise ValueError("empty spectrum")
    if p == 1:
        return 1
    best_q, best_ll = 1, -np.inf
    for q in range(1, p):
        head, tail = s[:q], s[q:]
        mu1, mu2 = head.mean(), tail.mean()
        resid = np.concatenate([head - mu1, tail - mu2])
        var = float(resid @ resid) / p
        var = max(var, 1e-12)
        ll = -0.5 * p * np.log(2 * np.pi * var) - 0.5 * p
        if ll > best_ll + 1e-12:
            best_ll = ll
            best_q = q
    return best_q


def augment_features(e: Embedding, feats: np.ndarray) -> Embedding:
    """Column-concatenate z-scored features onto the z-scored embedding.

    Zero-variance columns on either side are dropped (their z-score is
    undefined).  The spectrum is kept from the embedding part.
    """
    feats = np.asarray(feats, dtype=float)
    if feats.size == 0:
        return e
    if feats.ndim != 2 or feats.shape[0] != e.points.shape[0]:
        raise ValueError("feature rows must align with vertices")

    def zscore(x):
        sd = x.std(axis=0)
        keep = sd > 0
        x = x[:, keep]
        return (x - x.mean(axis=0)) / sd[keep]

    combined = np.hstack([zscore(np.asarray(e.points)), zscore(feats)])
    return Embedding(points=combined, spectrum=e.spectrum)
