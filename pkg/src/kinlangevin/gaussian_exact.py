"""Exact law propagation for quadratic targets with diagonal Hessian.

For V(x) = 1/2 sum_i lam_i x_i^2 both the continuous kinetic diffusion
and its discretized chain are affine-Gaussian, so per Hessian eigenvalue
the joint (position, velocity) law is a 2x2 Gaussian that can be tracked
exactly:

* discrete chain: mean <- A mean, cov <- A cov A' + S per step,
* continuous flow: drift F = [[0, 1], [-lam, -beta]], diffusion
  D = diag(0, 2 beta); the covariance integral comes from the 4x4
  augmented matrix exponential, composed over bounded substeps (a single
  augmented exponential mixes e^{+Ft} and e^{-Ft} scales and loses all
  accuracy once beta*t is large),
* stationary law of the chain: 3-unknown linear solve of
  cov = A cov A' + S.

Closed-form KL and chi-square divergences between product Gaussians
complete the oracle.  General quadratic forms are handled by the caller
via eigendecomposition; everything here is 2x2.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import UnstableParametersError
from .kernel import KernelCoefficients

# Covariance eigenvalues in (-1e-13, 0) are treated as rounding noise
# and clamped; at or below -1e-13 the matrix is rejected.
_EIG_CLAMP = -1e-13
# Positive-definiteness threshold for the chi-square finiteness test.
_PD_TOL = 1e-12


@dataclass(frozen=True)
class GaussianLaw2D:
    """Gaussian law of one (position, velocity) eigen-mode."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).reshape(2)
        C = np.asarray(self.cov, dtype=float).reshape(2, 2)
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(C))):
            raise ValueError("mean/cov must be finite")
        if abs(C[0, 1] - C[1, 0]) > 1e-12 * (1.0 + np.abs(C).max()):
            raise ValueError(f"covariance not symmetric: {C}")
        C = 0.5 * (C + C.T)
        w = np.linalg.eigvalsh(C)
        if w.min() < _EIG_CLAMP:
            raise ValueError(f"covariance has eigenvalue {w.min()} < {_EIG_CLAMP}")
        if w.min() < 0.0:
            ew, ev = np.linalg.eigh(C)
            C = (ev * np.clip(ew, 0.0, None)) @ ev.T
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", C)

    @property
    def degenerate(self) -> bool:
        return bool(np.linalg.eigvalsh(self.cov).min() <= _PD_TOL * max(1.0, float(np.abs(self.cov).max())))


@dataclass(frozen=True)
class ProductGaussianLaw:
    """Independent product of per-eigenvalue 2x2 Gaussian modes."""

    modes: List[GaussianLaw2D]

    def __post_init__(self):
        if len(self.modes) == 0:
            raise ValueError("need at least one mode")

    @property
    def dim(self) -> int:
        return len(self.modes)


def pi_mode_law(lam: float) -> GaussianLaw2D:
    """Per-mode stationary law of the continuous flow: N(0, diag(1/lam, 1))."""
    if lam <= 0:
        raise ValueError(f"eigenvalue must be positive, got {lam}")
    return GaussianLaw2D(np.zeros(2), np.diag([1.0 / lam, 1.0]))


def product_pi_law(lambdas: Sequence[float]) -> ProductGaussianLaw:
    return ProductGaussianLaw([pi_mode_law(l) for l in lambdas])


def warm_start_law(lambdas: Sequence[float], chi2_warm: float) -> ProductGaussianLaw:
    """Mean-shifted pi with joint position chi-square equal to chi2_warm.

    The log(1 + chi2) budget is split evenly over the coordinates, each
    mode getting a position mean shift of sqrt(log1p(chi2)/n / lam) with
    velocity exactly standard Gaussian.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if chi2_warm <= 0:
        raise ValueError("chi2_warm must be positive")
    share = np.log1p(chi2_warm) / lambdas.size
    modes = []
    for lam in lambdas:
        shift = np.sqrt(share / lam)
        modes.append(GaussianLaw2D(np.array([shift, 0.0]), np.diag([1.0 / lam, 1.0])))
    return ProductGaussianLaw(modes)


# ---------------------------------------------------------------------------
# discrete chain
# ---------------------------------------------------------------------------

def discrete_transition_matrices(lam: float, coeffs: KernelCoefficients):
    """Per-mode affine recursion (A, S) of the chain for grad V = lam x."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"eigenvalue must be positive, got {lam}")
    A = np.array([
        [1.0 - coeffs.pos_grad * lam, coeffs.pos_vel],
        [-coeffs.vel_grad * lam, coeffs.vel_decay],
    ])
    S = np.array([[coeffs.a, coeffs.c], [coeffs.c, coeffs.b]])
    return A, S


def spectral_radius_2x2(A: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(A)).max())


def propagate_discrete(law: ProductGaussianLaw, lambdas: Sequence[float],
                       coeffs: KernelCoefficients, k: int) -> ProductGaussianLaw:
    """Advance the exact law of the chain by k steps, mode by mode."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size != law.dim:
        raise ValueError(f"{law.dim} modes but {lambdas.size} eigenvalues")
    if k < 0:
        raise ValueError("k must be >= 0")
    modes = []
    for lam, mode in zip(lambdas, law.modes):
        A, S = discrete_transition_matrices(lam, coeffs)
        m = mode.mean.copy()
        C = mode.cov.copy()
        for _ in range(k):
            m = A @ m
            C = A @ C @ A.T + S
        modes.append(GaussianLaw2D(m, C))
    return ProductGaussianLaw(modes)


def discrete_stationary(lam: float, coeffs: KernelCoefficients) -> GaussianLaw2D:
    """Stationary law of the per-mode chain: solve cov = A cov A' + S.

    The symmetric 2x2 unknown is solved as a 3-variable linear system.

    Raises:
        UnstableParametersError: if the spectral radius of A is >= 1.
    """
    A, S = discrete_transition_matrices(lam, coeffs)
    rho = spectral_radius_2x2(A)
    if rho >= 1.0:
        raise UnstableParametersError(
            f"chain not contracting: spectral radius {rho} >= 1 "
            f"(lam={lam}, beta={coeffs.beta}, eta={coeffs.eta})"
        )
    a11, a12 = A[0]
    a21, a22 = A[1]
    M = np.eye(3) - np.array([
        [a11 * a11, 2.0 * a11 * a12, a12 * a12],
        [a11 * a21, a11 * a22 + a12 * a21, a12 * a22],
        [a21 * a21, 2.0 * a21 * a22, a22 * a22],
    ])
    s = np.linalg.solve(M, np.array([S[0, 0], S[0, 1], S[1, 1]]))
    C = np.array([[s[0], s[1]], [s[1], s[2]]])
    resid = np.abs(C - (A @ C @ A.T + S)).max()
    if resid > 1e-12:
        raise ArithmeticError(f"stationary solve residual {resid} > 1e-12")
    return GaussianLaw2D(np.zeros(2), C)


# ---------------------------------------------------------------------------
# continuous flow
# ---------------------------------------------------------------------------

def expm(M: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring on the Taylor series.

    The series is truncated once the term falls below tol relative to
    the running sum; only meant for the small matrices used here.
    """
    M = np.asarray(M, dtype=float)
    nrm = np.abs(M).sum(axis=1).max() if M.size else 0.0
    s = int(np.ceil(np.log2(nrm / 0.25))) if nrm > 0.25 else 0
    X = M / 2.0 ** s
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, 60):
        term = term @ X / k
        out = out + term
        if np.abs(term).max() < tol * 1e-2 * np.abs(out).max():
            break
    for _ in range(s):
        out = out @ out
    return out


def _mode_drift_diffusion(lam: float, beta: float):
    F = np.array([[0.0, 1.0], [-lam, -beta]])
    D = np.array([[0.0, 0.0], [0.0, 2.0 * beta]])
    return F, D


def _vanloan_step(lam: float, beta: float, dt: float):
    """(Phi, Q) over one substep via the 4x4 augmented exponential."""
    F, D = _mode_drift_diffusion(lam, beta)
    M = np.zeros((4, 4))
    M[:2, :2] = F
    M[:2, 2:] = D
    M[2:, 2:] = -F.T
    H = expm(M * dt)
    Phi = H[:2, :2]
    Q = H[:2, 2:] @ Phi.T
    return Phi, 0.5 * (Q + Q.T)


def propagate_continuous(law: GaussianLaw2D, lam: float, beta: float,
                         t: float) -> GaussianLaw2D:
    """Exact per-mode law of the continuous kinetic diffusion at time t.

    The time interval is split so each augmented exponential stays
    well-conditioned; substeps compose by the semigroup property.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"eigenvalue must be positive, got {lam}")
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")
    if not (np.isfinite(t) and t >= 0):
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return GaussianLaw2D(law.mean.copy(), law.cov.copy())
    nrm = max(1.0 + beta, lam + 3.0 * beta)
    nsub = max(1, int(np.ceil(nrm * t / 2.0)))
    Phi, Q = _vanloan_step(lam, beta, t / nsub)
    m = law.mean.copy()
    C = law.cov.copy()
    for _ in range(nsub):
        m = Phi @ m
        C = Phi @ C @ Phi.T + Q
    return GaussianLaw2D(m, C)


# ---------------------------------------------------------------------------
# divergences between Gaussian laws
# ---------------------------------------------------------------------------

def kl_gaussian_2d(p: GaussianLaw2D, q: GaussianLaw2D) -> float:
    """KL divergence D(p | q) of one mode; q must be nondegenerate.

    A degenerate p (point mass in some direction) against a full
    Gaussian q is +inf: no finite limit exists.
    """
    if q.degenerate:
        raise ValueError("q covariance is singular")
    if p.degenerate:
        return np.inf
    iq = np.linalg.inv(q.cov)
    d = q.mean - p.mean
    val = 0.5 * (np.trace(iq @ p.cov) + d @ iq @ d - 2.0
                 + np.log(np.linalg.det(q.cov) / np.linalg.det(p.cov)))
    return max(0.0, float(val))


def chi2_gaussian_2d(p: GaussianLaw2D, q: GaussianLaw2D) -> float:
    """Chi-square divergence chi2(p | q) of one mode, or +inf.

    Finite exactly when 2 inv(cov_p) - inv(cov_q) is positive definite
    (in one dimension: var_p < 2 var_q); the boundary counts as +inf.
    Degenerate laws give +inf unless p and q are the identical law.
    """
    if p.degenerate or q.degenerate:
        if np.array_equal(p.mean, q.mean) and np.array_equal(p.cov, q.cov):
            return 0.0
        return np.inf
    ip = np.linalg.inv(p.cov)
    iq = np.linalg.inv(q.cov)
    A = 2.0 * ip - iq
    if np.linalg.eigvalsh(A).min() <= _PD_TOL:
        return np.inf
    b = 2.0 * ip @ p.mean - iq @ q.mean
    c0 = 2.0 * p.mean @ ip @ p.mean - q.mean @ iq @ q.mean
    det_ratio = np.linalg.det(q.cov) / (np.linalg.det(A) * np.linalg.det(p.cov) ** 2)
    val = np.sqrt(det_ratio) * np.exp(0.5 * b @ np.linalg.solve(A, b) - 0.5 * c0)
    return max(0.0, float(val) - 1.0)


def kl_gaussian(p: ProductGaussianLaw, q: ProductGaussianLaw) -> float:
    """KL divergence of product laws: sum of the per-mode divergences."""
    if p.dim != q.dim:
        raise ValueError(f"mode count mismatch: {p.dim} vs {q.dim}")
    return float(sum(kl_gaussian_2d(pm, qm) for pm, qm in zip(p.modes, q.modes)))


def chi2_gaussian(p: ProductGaussianLaw, q: ProductGaussianLaw) -> float:
    """Chi-square of product laws: 1 + chi2 multiplies over modes."""
    if p.dim != q.dim:
        raise ValueError(f"mode count mismatch: {p.dim} vs {q.dim}")
    log1p_total = 0.0
    for pm, qm in zip(p.modes, q.modes):
        x2 = chi2_gaussian_2d(pm, qm)
        if np.isinf(x2):
            return np.inf
        log1p_total += np.log1p(x2)
    return float(np.expm1(log1p_total))


def log1p_chi2_gaussian(p: ProductGaussianLaw, q: ProductGaussianLaw) -> float:
    """log(1 + chi2(p | q)), accumulated in log space to avoid overflow."""
    if p.dim != q.dim:
        raise ValueError(f"mode count mismatch: {p.dim} vs {q.dim}")
    total = 0.0
    for pm, qm in zip(p.modes, q.modes):
        x2 = chi2_gaussian_2d(pm, qm)
        if np.isinf(x2):
            return np.inf
        total += np.log1p(x2)
    return float(total)


def tv_upper_from_chi2(chi2: float) -> float:
    """TV upper bound from a chi-square value: min(1, sqrt(log(1+chi2)))."""
    if np.isnan(chi2) or chi2 < 0:
        raise ValueError(f"chi2 must be >= 0, got {chi2}")
    if np.isinf(chi2):
        return 1.0
    return float(min(1.0, np.sqrt(np.log1p(chi2))))
