"""Explicit convergence bounds and runnable (beta, eta, k) schedules.

Three ingredients:

* the explicit-constant hypocoercive contraction factor
  exp(-beta t / (10 (3 + beta sqrt(C_P) + 2 sqrt(1 + kappa C_P))^2) + 1/60),
  valid as a multiplier on the initial chi-square divergence,
* the discretization TV bound
  C * sqrt(t) L eta / sqrt(beta) * (sqrt(n) + sqrt(log(1 + chi2_0))),
  valid in the regime 2 t L^2 eta^2 <= beta (outside it the bound is the
  trivial TV <= 1),
* the step-size / step-count schedules that balance the two, with
  friction beta = sqrt(L) in general and beta = 1/sqrt(C_P) for
  log-concave targets.

The universal constants in the schedules are not pinned by the theory;
they are exposed as c_const / C_const / C_disc with default 1 so that
experiments can calibrate them and record the calibrated values.
"""

from dataclasses import dataclass
import math

from .errors import ScheduleUndefinedError


@dataclass(frozen=True)
class ScheduleInput:
    """Problem description consumed by the schedule builder.

    chi2_warm is the chi-square divergence of the initial position law
    to the target (the warm-start quality); kappa is the semi-convexity
    constant, ignored for log-concave targets.
    """

    epsilon: float
    n: int
    L: float
    C_P: float
    kappa: float = 0.0
    chi2_warm: float = 1.0
    log_concave: bool = False
    c_const: float = 1.0
    C_const: float = 1.0
    C_disc: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.L <= 0 or self.C_P <= 0:
            raise ValueError("L and C_P must be positive")
        if self.L * self.C_P < 1.0 - 1e-12:
            raise ValueError(
                f"L * C_P = {self.L * self.C_P} < 1; no target measure attains this"
            )
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.chi2_warm <= 0:
            raise ValueError("chi2_warm must be positive")
        if self.c_const <= 0 or self.C_const <= 0 or self.C_disc <= 0:
            raise ValueError("constants must be positive")


@dataclass(frozen=True)
class Schedule:
    """Runnable parameter triple plus the accuracy it was built for.

    k is the integer (ceiling-rounded) step count; k_exact keeps the
    pre-rounding value for ratio checks.
    """

    beta: float
    eta: float
    k: int
    k_exact: float
    predicted_tv: float

    @property
    def total_time(self) -> float:
        return self.k * self.eta


def hypocoercive_factor_explicit(beta: float, C_P: float, kappa: float,
                                 t: float) -> float:
    """Chi-square contraction factor of the continuous flow at time t.

    chi2(law_t | pi) <= factor * chi2(law_0 | pi) for every starting
    law; all constants explicit, prefactor e^{1/60} at t = 0.
    """
    if beta <= 0 or C_P <= 0 or kappa < 0 or t < 0:
        raise ValueError("need beta > 0, C_P > 0, kappa >= 0, t >= 0")
    denom = 10.0 * (3.0 + beta * math.sqrt(C_P) + 2.0 * math.sqrt(1.0 + kappa * C_P)) ** 2
    return math.exp(-beta * t / denom + 1.0 / 60.0)


def discretization_tv_bound(t: float, L: float, eta: float, beta: float,
                            n: int, chi2_warm: float, C_disc: float = 1.0) -> float:
    """TV gap between the chain and the continuous flow at time t.

    Returns 1 outside the validity regime 2 t L^2 eta^2 <= beta (the
    trivial bound), else the capped explicit estimate.
    """
    if t < 0 or L <= 0 or eta < 0 or beta <= 0 or n < 1 or chi2_warm < 0 or C_disc <= 0:
        raise ValueError("invalid discretization bound inputs")
    if 2.0 * t * L * L * eta * eta > beta:
        return 1.0
    val = C_disc * math.sqrt(t) * L * eta / math.sqrt(beta) \
        * (math.sqrt(n) + math.sqrt(math.log1p(chi2_warm)))
    return min(1.0, val)


def make_schedule(inp: ScheduleInput) -> Schedule:
    """Build the (beta, eta, k) triple reaching TV accuracy epsilon.

    General case: beta = sqrt(L), k ~ eps^-1 (L C_P)^{3/2}; log-concave:
    beta = 1/sqrt(C_P), k ~ eps^-1 L C_P.  Both share
    eta = c * eps / (L sqrt(C_P)) / (sqrt(n) + sqrt(log(1+chi2_0)))
        / sqrt(log(chi2_0/eps)).

    Raises:
        ScheduleUndefinedError: when chi2_warm <= epsilon, where the
            log factors are undefined (the start is already closer than
            the requested accuracy; no steps are prescribed).
    """
    lg = math.log(inp.chi2_warm / inp.epsilon) if inp.chi2_warm > inp.epsilon else 0.0
    if lg <= 0.0:
        raise ScheduleUndefinedError(
            f"chi2_warm = {inp.chi2_warm} <= epsilon = {inp.epsilon}: the "
            "schedule's log(chi2_warm/epsilon) factors are undefined; start "
            "from a rougher warm start or request a smaller epsilon"
        )
    beta = inp.C_P ** -0.5 if inp.log_concave else math.sqrt(inp.L)
    mix = math.sqrt(inp.n) + math.sqrt(math.log1p(inp.chi2_warm))
    eta = inp.c_const * inp.epsilon / (inp.L * math.sqrt(inp.C_P)) / mix / math.sqrt(lg)
    lcp = inp.L * inp.C_P
    power = 1.0 if inp.log_concave else 1.5
    k_exact = inp.C_const / inp.epsilon * lcp ** power * mix * lg ** 1.5
    return Schedule(
        beta=beta,
        eta=eta,
        k=int(math.ceil(k_exact)),
        k_exact=k_exact,
        predicted_tv=inp.epsilon,
    )


def total_tv_prediction(inp: ScheduleInput, sched: Schedule) -> float:
    """Predicted TV to target after running the schedule.

    Discretization term plus sqrt of the hypocoercive factor times the
    warm-start chi-square (a gradient-Lipschitz potential is semi-convex
    with kappa = L, so the general case substitutes kappa -> L), capped
    at the trivial bound 1.
    """
    t = sched.k * sched.eta
    kappa_eff = 0.0 if inp.log_concave else inp.L
    disc = discretization_tv_bound(t, inp.L, sched.eta, sched.beta,
                                   inp.n, inp.chi2_warm, inp.C_disc)
    mix = math.sqrt(hypocoercive_factor_explicit(sched.beta, inp.C_P, kappa_eff, t)) \
        * math.sqrt(inp.chi2_warm)
    return min(1.0, disc + mix)
