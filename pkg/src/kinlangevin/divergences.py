"""Divergences on finite discrete distributions.

Brute-force playground for the information-theoretic inequalities the
convergence analysis leans on (Pinsker, the chi-square control of total
variation, and the approximate triangle inequality for relative
entropy), checked independently of any Gaussian structure.  +inf is a
first-class return value throughout, never an exception.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiscreteDist:
    """Probability vector on a finite support, renormalized on construction."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite and nonnegative")
        s = p.sum()
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"probs sum to {s}, expected 1 within 1e-12")
        object.__setattr__(self, "probs", p / s)

    @classmethod
    def from_weights(cls, weights) -> "DiscreteDist":
        """Normalize an arbitrary nonnegative weight vector."""
        w = np.asarray(weights, dtype=float)
        s = w.sum()
        if s <= 0:
            raise ValueError("weights must have positive sum")
        return cls(w / s)

    def __len__(self) -> int:
        return self.probs.size


def _check_sizes(p: DiscreteDist, q: DiscreteDist):
    if len(p) != len(q):
        raise ValueError(f"support sizes differ: {len(p)} vs {len(q)}")


def tv_discrete(p: DiscreteDist, q: DiscreteDist) -> float:
    """Total variation distance, half the L1 difference."""
    _check_sizes(p, q)
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def kl_discrete(p: DiscreteDist, q: DiscreteDist) -> float:
    """Relative entropy sum p_i log(p_i/q_i); +inf off q's support."""
    _check_sizes(p, q)
    pi = p.probs
    qi = q.probs
    pos = pi > 0
    if np.any(qi[pos] == 0):
        return np.inf
    return float(np.sum(pi[pos] * np.log(pi[pos] / qi[pos])))


def chi2_discrete(p: DiscreteDist, q: DiscreteDist) -> float:
    """Chi-square divergence sum p_i^2/q_i - 1; +inf off q's support."""
    _check_sizes(p, q)
    pi = p.probs
    qi = q.probs
    pos = pi > 0
    if np.any(qi[pos] == 0):
        return np.inf
    return float(np.sum(pi[pos] ** 2 / qi[pos]) - 1.0)


def check_triangle_lemma(m1: DiscreteDist, m2: DiscreteDist, m3: DiscreteDist):
    """Approximate triangle inequality for relative entropy.

    Evaluates lhs = D(m3 | m1) against
    rhs = 2 D(m3 | m2) + log(1 + chi2(m2 | m1)) and reports whether
    lhs <= rhs (with 1e-12 slack; inf <= inf holds).
    """
    _check_sizes(m1, m2)
    _check_sizes(m2, m3)
    lhs = kl_discrete(m3, m1)
    x2 = chi2_discrete(m2, m1)
    rhs = 2.0 * kl_discrete(m3, m2) + (np.inf if np.isinf(x2) else np.log1p(x2))
    holds = bool(lhs <= rhs + 1e-12) or (np.isinf(lhs) and np.isinf(rhs))
    return lhs, rhs, holds
