"""Command-line harness: sample, exact-gaussian, schedule, sweep.

Every command reads a flat key=value config (plus --set overrides) and
writes a deterministic CSV: ``#``-prefixed metadata lines carrying every
resolved parameter, a header row, then data rows, LF line endings.
Numbers are formatted with shortest round-trip precision so identical
configs produce byte-identical files.

Exit codes: 0 success, 2 config/usage error, 3 numerical failure
(diverged chains, unstable parameters).

The experiment designs here test verifiable consequences of the
convergence analysis (exact-law decay, bound dominance, step-count
scaling); they are not reproductions of published tables.
"""

import argparse
import math
import sys

import numpy as np
from numpy.random import Generator, Philox

from . import __version__
from ._backend import BACKEND
from .bounds import ScheduleInput, hypocoercive_factor_explicit, make_schedule, total_tv_prediction
from .chain import InitDistribution, RecordingPolicy, run_chain
from .config import Config, load_config
from .errors import ChainDivergedError, ConfigError, UnstableParametersError
from .gaussian_exact import (
    GaussianLaw2D,
    ProductGaussianLaw,
    kl_gaussian,
    log1p_chi2_gaussian,
    product_pi_law,
    propagate_continuous,
    propagate_discrete,
    warm_start_law,
)
from .kernel import FrictionStep, compute_coefficients
from .sweep import run_sweep
from .targets import make_diagonal_gaussian, make_gaussian_mixture, make_standard_gaussian

_SLICED_TV_SALT = (1 << 63) | 7


def _fmt(value) -> str:
    """Shortest round-trip text for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, metadata, header, rows):
    """Write '#'-metadata preamble, header, and rows with LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in metadata:
            fh.write(f"# {key} = {_fmt(value)}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(cell) for cell in row) + "\n")


def target_from_config(cfg: Config):
    kind = cfg.get_str("target.kind", "standard_gaussian")
    cfg.set("target.kind", kind)
    if kind == "standard_gaussian":
        return make_standard_gaussian(cfg.get_int("target.dim", 1))
    if kind == "diagonal_gaussian":
        eigs = cfg.get_floats("target.eigenvalues")
        shift = cfg.get_floats("target.mean_shift", None)
        try:
            return make_diagonal_gaussian(eigs, shift)
        except ValueError as exc:
            raise ConfigError(str(exc))
    if kind == "gaussian_mixture":
        centers = cfg.get_vectors("target.centers")
        weights = cfg.get_floats("target.weights")
        cp = cfg.get_float("target.poincare_cp", None)
        try:
            return make_gaussian_mixture(centers, weights, cp)
        except ValueError as exc:
            raise ConfigError(str(exc))
    raise ConfigError(f"unknown target.kind {kind!r}")


def _broadcast(values, n, key):
    if values is None:
        return np.zeros(n)
    arr = np.asarray(values, dtype=float)
    if arr.size == 1:
        return np.full(n, arr.item())
    if arr.size != n:
        raise ConfigError(f"key {key!r}: expected 1 or {n} values, got {arr.size}")
    return arr


def init_from_config(cfg: Config, n: int) -> InitDistribution:
    kind = cfg.get_str("init.kind", "point")
    cfg.set("init.kind", kind)
    mean = _broadcast(cfg.get_floats("init.mean", None), n, "init.mean")
    if kind == "point":
        return InitDistribution.point(mean)
    if kind == "gaussian":
        cov = _broadcast(cfg.get_floats("init.cov_diag", [1.0]), n, "init.cov_diag")
        return InitDistribution.gaussian(mean, cov)
    raise ConfigError(f"unknown init.kind {kind!r}")


def record_from_config(cfg: Config) -> RecordingPolicy:
    kind = cfg.get_str("record", "geometric")
    cfg.set("record", kind)
    if kind == "linear":
        return RecordingPolicy("linear", cfg.get_int("record.stride", 1))
    if kind == "geometric":
        return RecordingPolicy("geometric")
    raise ConfigError(f"record must be 'geometric' or 'linear', got {kind!r}")


def _metadata(cfg: Config, command: str):
    meta = [("tool", f"kinlangevin {__version__}"), ("command", command),
            ("backend", BACKEND)]
    # the output path has no effect on the data and is left out so that
    # identical experiments produce identical bytes wherever they land
    meta.extend((k, v) for k, v in cfg.items() if k != "out")
    return meta


def _normal_cdf(x):
    return 0.5 * (1.0 + np.vectorize(math.erf)(x / math.sqrt(2.0)))


def _projected_cdf(target, u, grid):
    """Exact CDF of u . X under the target, on the bin-edge grid."""
    if hasattr(target, "eigenvalues"):
        mu = float(u @ target.mean_shift)
        var = float(np.sum(u * u / target.eigenvalues))
        return _normal_cdf((grid - mu) / math.sqrt(var))
    # unit-covariance mixture: projection is a 1-d mixture with unit variances
    out = np.zeros_like(grid)
    for w, c in zip(target.weights, target.centers):
        out += w * _normal_cdf(grid - float(u @ c))
    return out


def sliced_tv_diagnostic(positions, target, seed, projections, bins) -> float:
    """Histogram TV between the sample cloud and the target on random
    1-d projections.  Biased (binning + finite sample); diagnostic only.
    """
    rng = Generator(Philox(key=np.array([np.uint64(seed), np.uint64(_SLICED_TV_SALT)],
                                        dtype=np.uint64)))
    n = positions.shape[1]
    total = 0.0
    for _ in range(projections):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        s = positions @ u
        lo, hi = float(s.min()), float(s.max())
        if hi - lo < 1e-9:
            lo, hi = lo - 1.0, hi + 1.0
        edges = np.linspace(lo, hi, bins + 1)
        emp, _ = np.histogram(s, bins=edges)
        emp = emp / s.size
        cdf = _projected_cdf(target, u, edges)
        exact = np.diff(cdf)
        outside = 1.0 - float(exact.sum())
        total += 0.5 * float(np.abs(emp - exact).sum()) + 0.5 * abs(outside)
    return total / projections


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_sample(cfg: Config) -> int:
    target = target_from_config(cfg)
    sampler = cfg.get_str("sampler", "kinetic")
    cfg.set("sampler", sampler)
    beta = cfg.get_float("beta", 1.0)
    eta = cfg.get_float("eta")
    steps = cfg.get_int("steps")
    replicas = cfg.get_int("replicas", 1)
    seed = cfg.get_int("seed", 0)
    for key, val in (("beta", beta), ("eta", eta), ("steps", steps),
                     ("replicas", replicas), ("seed", seed)):
        cfg.set(key, val)
    out = cfg.get_str("out")
    record = record_from_config(cfg)
    init = init_from_config(cfg, target.dim)
    try:
        fs = FrictionStep(beta, eta)
    except ValueError as exc:
        raise ConfigError(str(exc))

    result = run_chain(sampler, target, fs, init, steps, replicas, seed, record)

    meta = _metadata(cfg, "sample")
    meta.append(("diverged_count", len(result.diverged)))
    if result.diverged:
        first = result.diverged[:10]
        meta.append(("diverged_first", " ".join(f"{r}:{s}" for r, s in first)))
    if cfg.get_bool("sliced_tv", False):
        projections = cfg.get_int("sliced_tv.projections", 8)
        bins = cfg.get_int("sliced_tv.bins", 64)
        if result.alive.any():
            value = sliced_tv_diagnostic(
                result.final_positions[result.alive], target, seed, projections, bins)
        else:
            value = float("nan")
        meta.append(("sliced_tv_final", value))
        meta.append(("sliced_tv_note", "heuristic histogram estimator, biased; not an acceptance metric"))

    header = ["step", "t", "mean_abs_x2", "mean_abs_y2", "replica_count"]
    rows = [[r.step, r.t, r.second_moment_position, r.second_moment_velocity,
             r.samples_used] for r in result.reports]
    write_csv(out, meta, header, rows)
    if not result.alive.any():
        print(f"all {replicas} replicas diverged; see {out}", file=sys.stderr)
        return 3
    return 0


def _gaussian_eigenvalues(cfg: Config):
    kind = cfg.get_str("target.kind", "standard_gaussian")
    if kind == "standard_gaussian":
        return np.ones(cfg.get_int("target.dim", 1))
    if kind == "diagonal_gaussian":
        eigs = np.asarray(cfg.get_floats("target.eigenvalues"), dtype=float)
        if np.any(eigs <= 0):
            raise ConfigError("target.eigenvalues must be positive")
        return eigs
    raise ConfigError(
        f"unsupported target {kind!r}: this command needs a (diagonal) Gaussian target"
    )


def _init_law(cfg: Config, eigs) -> ProductGaussianLaw:
    shift = cfg.get_floats("init.shift", None)
    if shift is not None:
        shift = _broadcast(shift, eigs.size, "init.shift")
        modes = [GaussianLaw2D(np.array([s, 0.0]), np.diag([1.0 / lam, 1.0]))
                 for s, lam in zip(shift, eigs)]
        return ProductGaussianLaw(modes)
    chi2 = cfg.get_float("init.chi2", 10.0)
    cfg.set("init.chi2", chi2)
    return warm_start_law(eigs, chi2)


def cmd_exact_gaussian(cfg: Config) -> int:
    eigs = _gaussian_eigenvalues(cfg)
    mode = cfg.get_str("mode", "discrete")
    cfg.set("mode", mode)
    beta = cfg.get_float("beta", 1.0)
    cfg.set("beta", beta)
    out = cfg.get_str("out")
    if beta <= 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    C_P = float(1.0 / eigs.min())
    law = _init_law(cfg, eigs)
    pi = product_pi_law(eigs)
    log_chi2_0 = log1p_chi2_gaussian(law, pi)
    # the factor multiplies chi2, so the bound on log(1+chi2) uses log(chi2_0);
    # a start at pi has chi2_0 = 0 and the bound column is -inf (vacuous)
    chi2_0 = math.expm1(log_chi2_0)
    log_chi2_0_val = math.log(chi2_0) if chi2_0 > 0.0 else float("-inf")

    def bound_at(t):
        return log_chi2_0_val + math.log(
            hypocoercive_factor_explicit(beta, C_P, 0.0, t))

    rows = []
    if mode == "discrete":
        eta = cfg.get_float("eta")
        steps = cfg.get_int("steps")
        cfg.set("eta", eta)
        cfg.set("steps", steps)
        record = record_from_config(cfg)
        checkpoints = record.checkpoints(steps)
        coeffs = compute_coefficients(FrictionStep(beta, eta))
        prev = 0
        for cp in checkpoints:
            law = propagate_discrete(law, eigs, coeffs, cp - prev)
            prev = cp
            t = cp * eta
            rows.append([cp, t, kl_gaussian(law, pi),
                         log1p_chi2_gaussian(law, pi), bound_at(t)])
        header = ["step", "t", "kl_to_pi", "log1p_chi2_to_pi", "hypocoercive_log_bound"]
    elif mode == "continuous":
        t_max = cfg.get_float("t_max", 10.0)
        points = cfg.get_int("points", 101)
        cfg.set("t_max", t_max)
        cfg.set("points", points)
        if t_max < 0 or points < 2:
            raise ConfigError("need t_max >= 0 and points >= 2")
        grid = np.linspace(0.0, t_max, points)
        prev_t = 0.0
        for t in grid:
            law = ProductGaussianLaw([
                propagate_continuous(m, lam, beta, t - prev_t)
                for m, lam in zip(law.modes, eigs)])
            prev_t = t
            rows.append([t, kl_gaussian(law, pi),
                         log1p_chi2_gaussian(law, pi), bound_at(t)])
        header = ["t", "kl_to_pi", "log1p_chi2_to_pi", "hypocoercive_log_bound"]
    else:
        raise ConfigError(f"mode must be 'discrete' or 'continuous', got {mode!r}")

    write_csv(out, _metadata(cfg, "exact-gaussian"), header, rows)
    return 0


def cmd_schedule(cfg: Config) -> int:
    try:
        inp = ScheduleInput(
            epsilon=cfg.get_float("schedule.epsilon"),
            n=cfg.get_int("schedule.n"),
            L=cfg.get_float("schedule.L"),
            C_P=cfg.get_float("schedule.C_P"),
            kappa=cfg.get_float("schedule.kappa", 0.0),
            chi2_warm=cfg.get_float("schedule.chi2_warm"),
            log_concave=cfg.get_bool("schedule.log_concave", False),
            c_const=cfg.get_float("schedule.c_const", 1.0),
            C_const=cfg.get_float("schedule.C_const", 1.0),
            C_disc=cfg.get_float("schedule.C_disc", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    sched = make_schedule(inp)
    predicted = total_tv_prediction(inp, sched)
    for key, value in (("beta", sched.beta), ("eta", sched.eta), ("k", sched.k),
                       ("predicted_tv", sched.predicted_tv),
                       ("total_tv_prediction", predicted)):
        print(f"{key} = {_fmt(value)}")
    out = cfg.get_str("out", None)
    if out:
        header = ["epsilon", "n", "L", "C_P", "kappa", "chi2_warm", "log_concave",
                  "beta", "eta", "k", "k_exact", "predicted_tv", "total_tv_prediction"]
        row = [inp.epsilon, inp.n, inp.L, inp.C_P, inp.kappa, inp.chi2_warm,
               inp.log_concave, sched.beta, sched.eta, sched.k, sched.k_exact,
               sched.predicted_tv, predicted]
        write_csv(out, _metadata(cfg, "schedule"), header, [row])
    return 0


def cmd_sweep(cfg: Config) -> int:
    eigs_pattern = _gaussian_eigenvalues(cfg)
    dims = cfg.get_ints("sweep.dims", [16, 64, 256])
    epsilon = cfg.get_float("sweep.epsilon_target", 0.1)
    chi2_warm = cfg.get_float("sweep.chi2_warm", 10.0)
    mode = cfg.get_str("sweep.mode", "theory")
    max_steps = cfg.get_int("sweep.max_steps", 5_000_000)
    c_const = cfg.get_float("sweep.c_const", 1.0)
    for key, val in (("sweep.dims", ",".join(str(d) for d in dims)),
                     ("sweep.epsilon_target", epsilon),
                     ("sweep.chi2_warm", chi2_warm), ("sweep.mode", mode),
                     ("sweep.max_steps", max_steps), ("sweep.c_const", c_const)):
        cfg.set(key, val)
    out = cfg.get_str("out")
    if not (0.0 < epsilon < 1.0):
        raise ConfigError(f"sweep.epsilon_target must be in (0, 1), got {epsilon}")
    try:
        rows = run_sweep(dims, eigs_pattern, epsilon, chi2_warm, mode,
                         max_steps, c_const)
    except ValueError as exc:
        if isinstance(exc, UnstableParametersError):
            raise
        raise ConfigError(str(exc))
    header = ["n", "steps_kinetic", "steps_overdamped", "ratio", "eta_kinetic",
              "eta_overdamped", "beta_kinetic", "capped"]
    data = [[r.n, r.steps_kinetic, r.steps_overdamped, r.ratio, r.eta_kinetic,
             r.eta_overdamped, r.beta_kinetic, int(r.capped)] for r in rows]
    write_csv(out, _metadata(cfg, "sweep"), header, data)
    return 0


# ---------------------------------------------------------------------------

_COMMANDS = {
    "sample": cmd_sample,
    "exact-gaussian": cmd_exact_gaussian,
    "schedule": cmd_schedule,
    "sweep": cmd_sweep,
}

_HELP = {
    "sample": "run Monte Carlo chains and record moment diagnostics",
    "exact-gaussian": "propagate exact Gaussian laws and bound columns",
    "schedule": "compute the (beta, eta, k) schedule for a target accuracy",
    "sweep": "compare kinetic vs overdamped steps-to-accuracy over dimensions",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinlangevin",
        description="Kinetic Langevin sampling toolkit with an exact "
                    "linear-Gaussian verification engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", help="path to a flat key=value config file")
        p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                       help="override the seed config key")
        p.add_argument("--out", default=None, help="override the out config key")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config entry (repeatable)")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set, args.seed, args.out)
        return args.fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (UnstableParametersError, ChainDivergedError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
