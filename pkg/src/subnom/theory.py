"""Closed-form user-benefit probabilities and their Monte Carlo oracle.

Setting: the c candidate blocks indistinguishable from the true one occupy
the top c ranks in uniform random order; a capacity-t user labels one vertex
from each of the top t blocks (success 1-p on the true block, q elsewhere);
the labeled ranking is regrouped as interesting > unqueried > uninteresting.
All functions return P(E_h): the probability the true block lands below
rank h after re-ranking.  p = q = 0 is the oracle user.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import binom


def binom_cdf(i: int, n: int, p: float) -> float:
    """CDF of Binomial(n, p) at i; 0 below the support, 1 above it."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if i < 0:
        return 0.0
    if i >= n:
        return 1.0
    return float(binom.cdf(i, n, p))


def _cdf_sum(i_lo: int, i_hi: int, n, p: float) -> float:
    """Vectorized sum over i in [i_lo, i_hi] of the Binomial(n, p) CDF at i-1.

    ``n`` may be a scalar or an array aligned with the i range.
    """
    if i_hi < i_lo:
        return 0.0
    i = np.arange(i_lo - 1, i_hi)
    return float(np.sum(binom.cdf(i, n, p)))


def _clamp01(x: float) -> float:
    """Snap sub-roundoff excursions outside [0, 1] back onto the boundary."""
    return float(min(max(x, 0.0), 1.0))


def _check_params(c, t, h, p=0.0, q=0.0):
    if not 1 <= t <= c:
        raise ValueError(f"need 1 <= t <= c, got t={t}, c={c}")
    if not 1 <= h < c:
        raise ValueError(f"need 1 <= h < c, got h={h}, c={c}")
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise ValueError("p and q must lie in [0, 1]")


def prob_oracle(c: int, t: int, h: int) -> float:
    """Miss probability with an error-free user."""
    _check_params(c, t, h)
    return max(1.0 - (h + t) / c, 0.0)


def prob_fn_only(c: int, t: int, h: int, p: float) -> float:
    """Miss probability when the user only errs on interesting vertices."""
    _check_params(c, t, h, p=p)
    if t + h <= c:
        return 1.0 - h / c - (1.0 - p) * t / c
    return t * p / c


def prob_general(c: int, t: int, h: int, p: float, q: float) -> float:
    """Miss probability for a (1-p, q) user; four simplified case formulas."""
    _check_params(c, t, h, p, q)
    if t <= h:
        if t + h <= c:
            return _clamp01(1.0 - h / c - (1.0 - p - q) * t / c)
        return _clamp01(p * t / c + _cdf_sum(1, c - h, t, 1 - q) / c)
    head = ((1.0 - p) / c) * _cdf_sum(1, t - h, h + np.arange(1, t - h + 1) - 1,
                                      1 - q)
    if t + h <= c:
        tail = _cdf_sum(t - h + 1, t, t, 1 - q) / c
        return _clamp01(1.0 - h / c - (1.0 - p) * t / c + head + tail)
    tail = _cdf_sum(t - h + 1, c - h, t, 1 - q) / c
    return _clamp01(p * t / c + head + tail)


def prob_general_sum(c: int, t: int, h: int, p: float, q: float) -> float:
    """Un-simplified rank-decomposition route to the same probability.

    Conditions on the uniform pre-user rank of the true block and sums the
    per-rank miss probabilities directly; agrees with prob_general to
    floating-point roundoff and guards its algebra.
    """
    _check_params(c, t, h, p, q)
    if t <= h:
        total = p * t / c
        if t + h <= c:
            # Ranks h+1 .. h+t survive only if enough false positives pile up.
            total += _cdf_sum(1, t, t, 1 - q) / c
            total += 1.0 - (h + t) / c
        else:
            total += _cdf_sum(1, c - h, t, 1 - q) / c
        return _clamp01(total)
    # t > h: queried true block at rank h+i can miss either by its own
    # false negative or by i-or-more false positives above it.
    total = p * h / c
    total += (p * (t - h)
              + (1.0 - p) * _cdf_sum(1, t - h, h + np.arange(1, t - h + 1) - 1,
                                     1 - q)) / c
    if t + h <= c:
        total += _cdf_sum(t - h + 1, t, t, 1 - q) / c
        total += 1.0 - (h + t) / c
    else:
        total += _cdf_sum(t - h + 1, c - h, t, 1 - q) / c
    return _clamp01(total)


def relative_loss(c: int, t: int, h: int, p: float, q: float) -> float:
    """Relative change in miss probability versus the no-user baseline."""
    if h >= c:
        raise ValueError("relative loss requires h < c")
    baseline = 1.0 - h / c
    return (prob_general(c, t, h, p, q) - baseline) / baseline


def heatmap_grid(c: int, p: float, q: float, clip: bool = False) -> np.ndarray:
    """(c-1) x (c-1) matrix of relative_loss over h (rows) and t (columns)."""
    if c < 2:
        raise ValueError("c must be >= 2")
    grid = np.empty((c - 1, c - 1))
    for h in range(1, c):
        for t in range(1, c):
            grid[h - 1, t - 1] = relative_loss(c, t, h, p, q)
    if clip:
        grid = np.minimum(grid, 1.0)
    return grid


def mc_verify(c: int, t: int, h: int, p: float, q: float, reps: int, rng,
              m_k: int = None) -> tuple:
    """Simulate the generative process behind the closed forms.

    The c indistinguishable blocks are shuffled uniformly into the top c
    ranks; one vertex per top-t block is labeled (success 1-p on the true
    block, q elsewhere); the strict interesting > unqueried > uninteresting
    re-ranking is applied.  Returns (miss-rate estimate, binomial SE).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    _check_params(c, t, h, p, q)
    if m_k is None:
        # Large enough that the unqueried group alone pushes any
        # negatively-labeled true block below rank h.
        m_k = c + t + h + 1
    if m_k <= c:
        raise ValueError("need m_k > c")
    r = rng.integers(1, c + 1, size=reps)                # pre-user rank
    replies = (rng.random((reps, t)) < q).astype(np.int8)
    true_reply = rng.random(reps) < (1.0 - p)
    queried = r <= t
    miss = np.empty(reps, dtype=bool)

    # Unqueried true block: rank = |I| + (r - t).
    ones_total = replies.sum(axis=1)
    unq = ~queried
    miss[unq] = ones_total[unq] + r[unq] - t > h

    # Queried, labeled 1: rank = 1 + (false positives ranked above it).
    col = np.arange(t)
    above = (replies * (col[None, :] < (r[:, None] - 1))).sum(axis=1)
    lab1 = queried & true_reply
    miss[lab1] = 1 + above[lab1] > h

    # Queried, labeled 0: lands after |I| + (m_k - t) unqueried blocks.
    lab0 = queried & ~true_reply
    zeros_above = ((1 - replies) * (col[None, :] < (r[:, None] - 1))).sum(axis=1)
    ones_other = ones_total - (replies * (col[None, :] == (r[:, None] - 1))).sum(axis=1)
    rank0 = ones_other + (m_k - t) + zeros_above + 1
    miss[lab0] = rank0[lab0] > h

    est = float(miss.mean())
    se = float(np.sqrt(est * (1.0 - est) / reps))
    return est, se
