"""Monte Carlo drivers for the kinetic chain and the overdamped baseline.

``kinetic_step``/``overdamped_step`` are single-replica reference
implementations; ``run_chain`` is the vectorized many-replica engine
with counter-based per-replica noise streams (see
:mod:`kinlangevin._engine` for the exact layout), running moment
reports, and per-replica divergence tracking.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import _engine
from .errors import ChainDivergedError
from .kernel import FrictionStep, KernelCoefficients, compute_coefficients, sample_noise, step_mean
from .targets import TargetMeasure

SAMPLER_KINDS = ("kinetic", "overdamped")


@dataclass(frozen=True)
class ChainState:
    """Position/velocity pair of one replica plus its step counter."""

    position: np.ndarray
    velocity: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        v = np.asarray(self.velocity, dtype=float)
        if p.ndim != 1 or p.shape != v.shape:
            raise ValueError(
                f"position {p.shape} and velocity {v.shape} must be equal-length vectors"
            )
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "velocity", v)


class InitDistribution:
    """Initial law: configurable position law, velocity always standard Gaussian.

    The velocity marginal is not a parameter on purpose: the convergence
    guarantees assume y0 ~ N(0, I) independent of x0.
    """

    def __init__(self, mean, cov_diag=None):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if mean.ndim != 1 or not np.all(np.isfinite(mean)):
            raise ValueError("init mean must be a finite vector")
        if cov_diag is not None:
            cov_diag = np.atleast_1d(np.asarray(cov_diag, dtype=float))
            if cov_diag.shape != mean.shape or np.any(cov_diag < 0) \
                    or not np.all(np.isfinite(cov_diag)):
                raise ValueError("cov_diag must be finite, nonnegative, and match mean")
        self.mean = mean
        self.cov_diag = cov_diag

    @classmethod
    def point(cls, x0):
        """Point mass at x0."""
        return cls(x0, None)

    @classmethod
    def gaussian(cls, mean, cov_diag):
        """Gaussian position law with diagonal covariance."""
        return cls(mean, cov_diag)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def is_point(self) -> bool:
        return self.cov_diag is None


@dataclass(frozen=True)
class MomentReport:
    """Running moments over the live replicas at one checkpoint."""

    step: int
    t: float
    mean_position: np.ndarray
    second_moment_position: float  # E|x|^2
    second_moment_velocity: float  # E|y|^2
    samples_used: int


@dataclass(frozen=True)
class RecordingPolicy:
    """Checkpoint cadence: powers of two by default, or a linear stride."""

    kind: str = "geometric"
    stride: int = 1

    def checkpoints(self, steps: int) -> List[int]:
        if self.kind == "geometric":
            pts = {0, steps}
            p = 1
            while p < steps:
                pts.add(p)
                p *= 2
            return sorted(pts)
        if self.kind == "linear":
            if self.stride < 1:
                raise ValueError("stride must be >= 1")
            pts = set(range(0, steps + 1, self.stride))
            pts.add(steps)
            return sorted(pts)
        raise ValueError(f"unknown recording kind {self.kind!r}")


@dataclass
class RunResult:
    """Output of run_chain: final ensemble, reports, divergence log."""

    sampler_kind: str
    steps: int
    eta: float
    final_positions: np.ndarray       # (R, n); NaN rows for diverged replicas
    final_velocities: np.ndarray      # (R, n); zeros for overdamped chains
    alive: np.ndarray                 # (R,) bool
    reports: List[MomentReport] = field(default_factory=list)
    diverged: List[Tuple[int, int]] = field(default_factory=list)  # (replica, step)

    def final_states(self) -> List[ChainState]:
        return [
            ChainState(self.final_positions[r], self.final_velocities[r], self.steps)
            for r in range(self.final_positions.shape[0])
        ]


def kinetic_step(state: ChainState, coeffs: KernelCoefficients,
                 target: TargetMeasure, rng: np.random.Generator) -> ChainState:
    """Advance one replica of the kinetic chain by one kernel step.

    Queries the gradient oracle exactly once, at the current position.

    Raises:
        ChainDivergedError: if the gradient is non-finite.
    """
    if state.position.size != target.dim:
        raise ValueError(
            f"state dimension {state.position.size} != target dimension {target.dim}"
        )
    grad = target.gradient(state.position)
    if not np.all(np.isfinite(grad)):
        raise ChainDivergedError(
            f"non-finite gradient at step {state.step_index}",
            state=state, step=state.step_index,
        )
    x_mean, y_mean = step_mean(coeffs, state.position, state.velocity, grad)
    xi_x, xi_y = sample_noise(coeffs, target.dim, rng)
    return ChainState(x_mean + xi_x, y_mean + xi_y, state.step_index + 1)


def overdamped_step(state: ChainState, eta: float, target: TargetMeasure,
                    rng: Optional[np.random.Generator]) -> ChainState:
    """One overdamped (unadjusted Langevin) step on the position only.

    x <- x + sqrt(2 eta) xi - eta grad V(x).  The velocity field is
    carried through untouched.  rng=None disables the noise (test hook
    for checking the deterministic drift).
    """
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    grad = target.gradient(state.position)
    if not np.all(np.isfinite(grad)):
        raise ChainDivergedError(
            f"non-finite gradient at step {state.step_index}",
            state=state, step=state.step_index,
        )
    if rng is None:
        xi = np.zeros(target.dim)
    else:
        xi = rng.standard_normal(target.dim)
    x_new = (state.position + np.sqrt(2.0 * eta) * xi) - eta * grad
    return ChainState(x_new, state.velocity, state.step_index + 1)


class _MomentAccumulator:
    """Per-checkpoint block partials, combined in block-index order."""

    def __init__(self, checkpoints, n, nblocks):
        self.checkpoints = checkpoints
        self.sum_x = {c: np.zeros((nblocks, n)) for c in checkpoints}
        self.sum_x2 = {c: np.zeros(nblocks) for c in checkpoints}
        self.sum_y2 = {c: np.zeros(nblocks) for c in checkpoints}
        self.count = {c: np.zeros(nblocks, dtype=np.int64) for c in checkpoints}

    def add(self, checkpoint, block, x, y, alive):
        xa = x[alive]
        ya = y[alive]
        # replicas about to diverge can carry finite values whose squares
        # overflow; an inf moment is the honest report
        with np.errstate(over="ignore"):
            self.sum_x[checkpoint][block] = xa.sum(axis=0)
            self.sum_x2[checkpoint][block] = (xa * xa).sum()
            self.sum_y2[checkpoint][block] = (ya * ya).sum()
        self.count[checkpoint][block] = int(alive.sum())

    def reports(self, eta) -> List[MomentReport]:
        out = []
        for c in self.checkpoints:
            used = int(self.count[c].sum())
            if used == 0:
                continue
            out.append(MomentReport(
                step=c,
                t=c * eta,
                mean_position=self.sum_x[c].sum(axis=0) / used,
                second_moment_position=float(self.sum_x2[c].sum() / used),
                second_moment_velocity=float(self.sum_y2[c].sum() / used),
                samples_used=used,
            ))
        return out


def run_chain(sampler_kind: str, target: TargetMeasure, fs: FrictionStep,
              init: InitDistribution, steps: int, replicas: int,
              rng_seed: int, record: RecordingPolicy = RecordingPolicy()) -> RunResult:
    """Run R independent replicas for k steps with per-replica noise streams.

    Fully deterministic given (seed, parameters, replica count); replica
    r's noise does not depend on how many other replicas run.  A replica
    whose state goes non-finite is recorded in ``diverged`` and dropped
    from the moment reports; the others continue.
    """
    if sampler_kind not in SAMPLER_KINDS:
        raise ValueError(f"sampler_kind must be one of {SAMPLER_KINDS}")
    if steps < 0 or replicas < 1:
        raise ValueError("need steps >= 0 and replicas >= 1")
    if not (0 <= rng_seed < 2 ** 64):
        raise ValueError(f"rng_seed must be in [0, 2^64), got {rng_seed}")
    n = target.dim
    if init.dim != n:
        raise ValueError(f"init dimension {init.dim} != target dimension {n}")

    coeffs = compute_coefficients(fs)
    kinetic = sampler_kind == "kinetic"
    if not kinetic and fs.eta <= 0:
        raise ValueError("overdamped chain requires eta > 0")
    sb, cb, so = coeffs.noise_factors()
    s2e = np.sqrt(2.0 * fs.eta)

    checkpoints = record.checkpoints(steps)
    cpset = set(checkpoints)
    cs = _engine.chunk_steps(n)
    nblocks = (replicas + _engine.BLOCK - 1) // _engine.BLOCK
    acc = _MomentAccumulator(checkpoints, n, nblocks)

    final_x = np.empty((replicas, n))
    final_y = np.zeros((replicas, n))
    alive_all = np.ones(replicas, dtype=bool)
    diverged: List[Tuple[int, int]] = []

    for b in range(nblocks):
        lo = b * _engine.BLOCK
        lanes = min(_engine.BLOCK, replicas - lo)
        zpos, zvel = _engine.draw_init(rng_seed, b, lanes, n, not init.is_point)
        if init.is_point:
            x = np.broadcast_to(init.mean, (lanes, n)).copy()
        else:
            x = init.mean + np.sqrt(init.cov_diag) * zpos
        y = zvel.copy()
        alive = np.ones(lanes, dtype=bool)
        if 0 in cpset:
            acc.add(0, b, x, y, alive)

        step = 0
        chunk = 0
        while step < steps:
            cs_eff = min(cs, steps - step)
            if kinetic:
                z = _engine.draw_kinetic_chunk(rng_seed, b, chunk, lanes, cs_eff, n)
            else:
                z = _engine.draw_overdamped_chunk(rng_seed, b, chunk, lanes, cs_eff, n)
            for s in range(cs_eff):
                grad = target.gradient_batch(x)
                if kinetic:
                    x, y = _engine.kinetic_update(
                        x, y, grad, np.ascontiguousarray(z[:, s, 0, :]),
                        np.ascontiguousarray(z[:, s, 1, :]),
                        coeffs.vel_decay, coeffs.pos_vel, coeffs.pos_grad,
                        coeffs.vel_grad, sb, cb, so)
                    ok = np.isfinite(x).all(axis=1) & np.isfinite(y).all(axis=1)
                else:
                    x = _engine.overdamped_update(
                        x, grad, np.ascontiguousarray(z[:, s, :]), s2e, fs.eta)
                    ok = np.isfinite(x).all(axis=1)
                step += 1
                newly_dead = alive & ~ok
                if newly_dead.any():
                    for lane in np.nonzero(newly_dead)[0]:
                        diverged.append((lo + int(lane), step))
                    alive &= ok
                if step in cpset and alive.any():
                    acc.add(step, b, x, y, alive)
            chunk += 1

        final_x[lo:lo + lanes] = x
        if kinetic:
            final_y[lo:lo + lanes] = y
        alive_all[lo:lo + lanes] = alive

    return RunResult(
        sampler_kind=sampler_kind,
        steps=steps,
        eta=fs.eta,
        final_positions=final_x,
        final_velocities=final_y,
        alive=alive_all,
        reports=acc.reports(fs.eta),
        diverged=sorted(diverged),
    )
