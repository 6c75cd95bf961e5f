"""Full-covariance Gaussian mixture EM and single-level partition estimation.

The EM is hand-rolled so that the documented contract holds exactly:
farthest-point seeding, best-of-r restarts by likelihood, per-iteration
monotone log-likelihood assertion, and ridge regularization on degenerate
covariances.  Model order is chosen by BIC unless a single count is forced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .embed import Embedding, ase, augment_features, select_dim
from .graph import Graph, HierarchicalFunction

_EM_TOL = 1e-7
_EM_MAX_ITER = 500
_RESTARTS = 5
_RIDGE = 1e-6


@dataclass(frozen=True)
class PartitionEstimate:
    """Estimated flat partition: 1-based labels, block count, model scores."""

    assignment: np.ndarray
    m_hat: int
    scores: dict = field(default_factory=dict)  # candidate m -> BIC
    log_likelihood: float = float("nan")
    regularized: bool = False

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int).copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)


def _farthest_point_seeds(x, m, rng):
    n = x.shape[0]
    seeds = [int(rng.integers(n))]
    d2 = np.sum((x - x[seeds[0]]) ** 2, axis=1)
    for _ in range(1, m):
        nxt = int(np.argmax(d2))
        seeds.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[seeds]


def _log_gauss(x, mean, cov):
    d = x.shape[1]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise np.linalg.LinAlgError("non-PD covariance")
    diff = x - mean
    sol = np.linalg.solve(cov, diff.T).T
    maha = np.sum(diff * sol, axis=1)
    return -0.5 * (d * np.log(2 * np.pi) + logdet + maha)


def _em_once(x, m, rng, ridge):
    n, d = x.shape
    means = _farthest_point_seeds(x, m, rng)
    base_cov = np.cov(x.T).reshape(d, d) + ridge * np.eye(d)
    covs = np.array([base_cov.copy() for _ in range(m)])
    weights = np.full(m, 1.0 / m)
    prev_ll = -np.inf
    regularized = ridge > _RIDGE
    for _ in range(_EM_MAX_ITER):
        log_comp = np.array([
            np.log(max(weights[j], 1e-300)) + _log_gauss(x, means[j], covs[j])
            for j in range(m)])  # (m, n)
        log_norm = logsumexp(log_comp, axis=0)
        ll = float(log_norm.sum())
        # EM guarantee for the exact M-step; the ridge perturbs it, so a
        # beyond-roundoff decrease means this ridge is too weak for the data
        # and the caller should escalate it.
        if ll < prev_ll - 1e-8 * max(1.0, abs(prev_ll)):
            raise np.linalg.LinAlgError("EM log-likelihood decreased")
        resp = np.exp(log_comp - log_norm)  # (m, n)
        nk = resp.sum(axis=1)
        weights = nk / n
        for j in range(m):
            if nk[j] < 1e-10:
                raise np.linalg.LinAlgError("empty component")
            means[j] = resp[j] @ x / nk[j]
            diff = x - means[j]
            covs[j] = (resp[j] * diff.T) @ diff / nk[j] + ridge * np.eye(d)
        if ll - prev_ll < _EM_TOL * max(1.0, abs(ll)) and np.isfinite(prev_ll):
            prev_ll = ll
            break
        prev_ll = ll
    labels = np.argmax(resp, axis=0) + 1
    return labels, prev_ll, regularized


def _fit_single_m(x, m, rng, restarts):
    best = None
    for _ in range(restarts):
        ridge = _RIDGE
        for _attempt in range(6):
            try:
                labels, ll, reg = _em_once(x, m, rng, ridge)
                break
            except np.linalg.LinAlgError:
                # Degenerate covariance: retry with a stronger ridge.
                ridge *= 100.0
        else:
            continue
        if best is None or ll > best[1]:
            best = (labels, ll, reg or ridge > _RIDGE)
    if best is None:
        raise RuntimeError(f"EM failed for m={m} on all restarts")
    return best


def _bic(ll, m, n, d):
    n_params = m - 1 + m * d + m * d * (d + 1) / 2
    return -2.0 * ll + n_params * np.log(n)


def _relabel_compact(labels):
    """Map labels onto 1..m with every block non-empty, preserving order."""
    uniq = np.unique(labels)
    lut = {int(u): i + 1 for i, u in enumerate(uniq)}
    return np.array([lut[int(v)] for v in labels], dtype=int), len(uniq)


def gmm_fit(points, m_candidates, rng, restarts: int = _RESTARTS) -> PartitionEstimate:
    """EM over full-covariance mixtures, best candidate block count by BIC.

    ``m_candidates`` may be a single int (forced count) or an iterable of
    candidates; BIC only arbitrates when there is more than one.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    if isinstance(m_candidates, (int, np.integer)):
        m_candidates = [int(m_candidates)]
    m_candidates = [int(m) for m in m_candidates]
    if any(m < 1 or m > n for m in m_candidates):
        raise ValueError("every candidate block count must lie in [1, n]")
    scores = {}
    fits = {}
    for m in m_candidates:
        if m == 1:
            mu = x.mean(axis=0)
            cov = np.cov(x.T).reshape(x.shape[1], x.shape[1]) + _RIDGE * np.eye(x.shape[1])
            ll = float(_log_gauss(x, mu, cov).sum())
            fits[m] = (np.ones(n, dtype=int), ll, False)
        else:
            fits[m] = _fit_single_m(x, m, rng, restarts)
        scores[m] = _bic(fits[m][1], m, n, x.shape[1])
    best_m = min(scores, key=lambda m: (scores[m], m))
    labels, ll, reg = fits[best_m]
    labels, m_eff = _relabel_compact(labels)
    return PartitionEstimate(assignment=labels, m_hat=m_eff, scores=scores,
                             log_likelihood=ll, regularized=reg)


@dataclass(frozen=True)
class ClusterConfig:
    """Knobs for the embed-then-cluster partition estimator."""

    dim: int = None                 # None: profile-likelihood elbow
    max_dim: int = 20               # spectrum length offered to the elbow
    n_blocks: int = None            # forced block count
    candidates: tuple = (2, 3, 4, 5, 6, 7, 8)
    restarts: int = _RESTARTS
    log_weights: bool = False
    features: np.ndarray = None     # optional n x f vertex features


def estimate_hierarchy(g2: Graph, config: ClusterConfig, rng) -> tuple:
    """ASE -> optional feature augmentation -> GMM; one-level hierarchy.

    Returns (HierarchicalFunction, PartitionEstimate).
    """
    if config.dim is not None:
        d = min(config.dim, g2.n)
        emb = ase(g2, d, log_transform=config.log_weights)
    else:
        probe = ase(g2, min(config.max_dim, g2.n), log_transform=config.log_weights)
        d = select_dim(probe.spectrum)
        emb = Embedding(points=probe.points[:, :d], spectrum=probe.spectrum[:d])
    if config.features is not None:
        emb = augment_features(emb, config.features)
    m = config.n_blocks if config.n_blocks is not None else config.candidates
    est = gmm_fit(emb.points, m, rng, restarts=config.restarts)
    return HierarchicalFunction.single_level(est.assignment), est
