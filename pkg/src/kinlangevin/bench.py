"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot paths (Monte Carlo chain stepping and the exact
per-mode law scan) in subprocesses, one per backend, so each measurement
goes through the same KINLANGEVIN_BACKEND selection users get.

    python -m kinlangevin.bench [--replicas R] [--steps K] [--dim N]
                                [--scan-steps M]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _workload(replicas, steps, dim, scan_steps):
    from .chain import InitDistribution, run_chain
    from .kernel import FrictionStep
    from .sweep import steps_to_accuracy_kinetic
    from .targets import make_standard_gaussian

    target = make_standard_gaussian(dim)
    fs = FrictionStep(1.0, 0.05)
    init = InitDistribution.point([3.0] + [0.0] * (dim - 1))

    def chain_once():
        run_chain("kinetic", target, fs, init, steps, replicas, rng_seed=42)

    def scan_once():
        # eps2 = 0 is unreachable from a shifted start: fixed-size workload
        steps_to_accuracy_kinetic([1.0] * dim, 1.0, 0.01, 10.0, 0.0, scan_steps)

    out = {}
    for name, fn in (("chain", chain_once), ("scan", scan_once)):
        t0 = time.perf_counter()
        fn()
        cold = time.perf_counter() - t0
        t0 = time.perf_counter()
        fn()
        warm = time.perf_counter() - t0
        out[name] = {"cold_s": cold, "warm_s": warm}
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicas", type=int, default=20_000)
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--dim", type=int, default=4)
    parser.add_argument("--scan-steps", type=int, default=500_000)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.worker:
        result = _workload(args.replicas, args.steps, args.dim, args.scan_steps)
        from ._backend import BACKEND
        print(json.dumps({"backend": BACKEND, **result}))
        return 0

    try:
        import numba  # noqa: F401
        backends = ["numba", "numpy"]
    except ImportError:
        print("numba not importable; timing the numpy fallback only")
        backends = ["numpy"]

    results = {}
    for backend in backends:
        env = dict(os.environ, KINLANGEVIN_BACKEND=backend)
        cmd = [sys.executable, "-m", "kinlangevin.bench", "--worker",
               "--replicas", str(args.replicas), "--steps", str(args.steps),
               "--dim", str(args.dim), "--scan-steps", str(args.scan_steps)]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{backend} worker failed:\n{proc.stderr}", file=sys.stderr)
            return 1
        results[backend] = json.loads(proc.stdout.strip().splitlines()[-1])

    print(f"workload: chain R={args.replicas} k={args.steps} n={args.dim}; "
          f"scan {args.scan_steps} iterations")
    print(f"{'kernel':<8} {'backend':<8} {'cold (s)':>10} {'warm (s)':>10}")
    for kernel in ("chain", "scan"):
        for backend in backends:
            r = results[backend][kernel]
            print(f"{kernel:<8} {backend:<8} {r['cold_s']:>10.3f} {r['warm_s']:>10.3f}")
    if len(backends) == 2:
        for kernel in ("chain", "scan"):
            speedup = results["numpy"][kernel]["warm_s"] / results["numba"][kernel]["warm_s"]
            print(f"{kernel}: numba warm speedup {speedup:.1f}x over numpy fallback")
    return 0


if __name__ == "__main__":
    sys.exit(main())
