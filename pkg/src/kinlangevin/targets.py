"""Target measures: potential + gradient oracle + analytic metadata.

A target is any object exposing ``dim``, ``potential(x)``,
``gradient(x)``, ``gradient_batch(X)`` and ``metadata``.  The built-ins
below cover the analytically tractable cases used by the exact engine
and the experiment harness; metadata constants are declared, not
estimated (certifying a Poincare constant for a general measure is out
of scope, callers supply it when known).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TargetMetadata:
    """Smoothness / mixing constants attached to a target.

    Attributes:
        lipschitz_L: gradient Lipschitz constant, or None if unknown.
        poincare_CP: Poincare constant, or None if unknown.
        semiconvex_kappa: semi-convexity constant (V + kappa/2 |x|^2
            convex), or None.
        log_concave: whether the potential is convex.
    """

    lipschitz_L: Optional[float] = None
    poincare_CP: Optional[float] = None
    semiconvex_kappa: Optional[float] = None
    log_concave: bool = False

    def __post_init__(self):
        if self.lipschitz_L is not None and self.lipschitz_L <= 0:
            raise ValueError("lipschitz_L must be positive")
        if self.poincare_CP is not None and self.poincare_CP <= 0:
            raise ValueError("poincare_CP must be positive")
        if self.semiconvex_kappa is not None and self.semiconvex_kappa < 0:
            raise ValueError("semiconvex_kappa must be >= 0")
        if self.lipschitz_L is not None and self.poincare_CP is not None:
            # L*C_P >= 1 holds for every measure in this class.
            if self.lipschitz_L * self.poincare_CP < 1.0 - 1e-12:
                raise ValueError(
                    f"lipschitz_L * poincare_CP = "
                    f"{self.lipschitz_L * self.poincare_CP} < 1"
                )
        if self.log_concave and self.semiconvex_kappa not in (None, 0, 0.0):
            raise ValueError("log-concave targets must have kappa = 0")


class TargetMeasure:
    """Base class for gradient-oracle targets.

    Subclasses implement ``potential_batch`` and ``gradient_batch`` on
    arrays of shape (B, dim); the scalar entry points delegate.  Targets
    are immutable after construction and safe to share across threads.
    """

    dim: int
    metadata: TargetMetadata

    def potential(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(1, self.dim)
        return float(self.potential_batch(x)[0])

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(1, self.dim)
        return self.gradient_batch(x)[0]

    def potential_batch(self, X) -> np.ndarray:
        raise NotImplementedError

    def gradient_batch(self, X) -> np.ndarray:
        raise NotImplementedError


class DiagonalGaussianTarget(TargetMeasure):
    """Gaussian with diagonal Hessian: V(x) = 1/2 sum_i lam_i (x_i - m_i)^2."""

    def __init__(self, eigenvalues, mean_shift=None):
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        if eigenvalues.ndim != 1 or eigenvalues.size == 0:
            raise ValueError("eigenvalues must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(eigenvalues)) or np.any(eigenvalues <= 0):
            raise ValueError("eigenvalues must be positive and finite")
        n = eigenvalues.size
        if mean_shift is None:
            mean_shift = np.zeros(n)
        mean_shift = np.asarray(mean_shift, dtype=float)
        if mean_shift.shape != (n,):
            raise ValueError(
                f"mean_shift shape {mean_shift.shape} does not match ({n},)"
            )
        self.eigenvalues = eigenvalues
        self.mean_shift = mean_shift
        self.dim = n
        self.metadata = TargetMetadata(
            lipschitz_L=float(eigenvalues.max()),
            poincare_CP=float(1.0 / eigenvalues.min()),
            semiconvex_kappa=0.0,
            log_concave=True,
        )

    def potential_batch(self, X):
        d = np.asarray(X, dtype=float) - self.mean_shift
        return 0.5 * (d * d * self.eigenvalues).sum(axis=-1)

    def gradient_batch(self, X):
        return (np.asarray(X, dtype=float) - self.mean_shift) * self.eigenvalues


class GaussianMixtureTarget(TargetMeasure):
    """Mixture of unit-covariance Gaussians, V = -log sum_j w_j e^{-|x-c_j|^2/2}.

    The metadata constants are conservative closed-form bounds: with
    r2 = max_{j,k} |c_j - c_k|^2, kappa = r2/4 and L = 1 + r2/4.  The
    Poincare constant is left unset; supply it via ``poincare_CP`` when
    known for the particular configuration.
    """

    def __init__(self, centers, weights, poincare_CP=None):
        centers = np.asarray(centers, dtype=float)
        if centers.ndim != 2 or centers.shape[0] < 2:
            raise ValueError("need >= 2 centers of equal dimension")
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (centers.shape[0],):
            raise ValueError(
                f"{centers.shape[0]} centers but {weights.size} weights"
            )
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        self.centers = centers
        self.weights = weights / weights.sum()
        self.dim = centers.shape[1]
        diffs = centers[:, None, :] - centers[None, :, :]
        spread2 = float((diffs * diffs).sum(axis=-1).max())
        self.metadata = TargetMetadata(
            lipschitz_L=1.0 + spread2 / 4.0,
            poincare_CP=poincare_CP,
            semiconvex_kappa=spread2 / 4.0,
            log_concave=False,
        )

    def _logits(self, X):
        # (B, J): log w_j - |x - c_j|^2 / 2
        d = X[:, None, :] - self.centers[None, :, :]
        return np.log(self.weights) - 0.5 * (d * d).sum(axis=-1)

    def potential_batch(self, X):
        X = np.asarray(X, dtype=float)
        logits = self._logits(X)
        m = logits.max(axis=1)
        return -(m + np.log(np.exp(logits - m[:, None]).sum(axis=1)))

    def gradient_batch(self, X):
        X = np.asarray(X, dtype=float)
        logits = self._logits(X)
        logits -= logits.max(axis=1, keepdims=True)
        r = np.exp(logits)
        r /= r.sum(axis=1, keepdims=True)
        # grad V = x - sum_j r_j(x) c_j
        return X - r @ self.centers


def make_standard_gaussian(n: int) -> DiagonalGaussianTarget:
    """Standard Gaussian target: V(x) = |x|^2 / 2, L = C_P = 1."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return DiagonalGaussianTarget(np.ones(n))


def make_diagonal_gaussian(eigenvalues, mean_shift=None) -> DiagonalGaussianTarget:
    """Diagonal-Hessian Gaussian with L = max eig, C_P = 1/min eig."""
    return DiagonalGaussianTarget(eigenvalues, mean_shift)


def make_gaussian_mixture(centers, weights, poincare_CP=None) -> GaussianMixtureTarget:
    """Unit-covariance Gaussian mixture (semi-convex, not log-concave)."""
    return GaussianMixtureTarget(centers, weights, poincare_CP)
