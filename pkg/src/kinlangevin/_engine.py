"""Hot numeric kernels with numba and pure-numpy backends.

Two families live here:

* per-step state updates for the Monte Carlo chains, vectorized over a
  block of replicas, and
* first-crossing scans of the exact per-mode Gaussian law recursions
  used by the dimension sweep (up to millions of 2x2 iterations).

Both backends evaluate identical floating point expression trees in the
same order, so results are bit-for-bit equal; tests assert this.

Noise layout
------------
Replica streams are counter-based on top of numpy's Philox generator.
Replica r maps to block ``r // BLOCK`` and lane ``r % BLOCK``; the draws
for (block b, chunk c) come from ``Philox(key=[seed, b * 2^32 + c])``
where chunk 0 holds the initial-state draws and chunk c >= 1 holds the
step chunk c - 1.  Within a chunk the draw array is lane-major, so a
lane's values depend only on (seed, block, lane, chunk): adding replicas
or truncating a block never changes the noise any existing replica sees.
"""

import math

import numpy as np
from numpy.random import Generator, Philox

from ._backend import USING_NUMBA, njit

BLOCK = 4096          # replicas per noise block
_CHUNK_BUDGET = 512   # per-lane values per chunk, scaled down by dim


def chunk_steps(n: int) -> int:
    """Steps per noise chunk for dimension n (fixed per run)."""
    return max(1, _CHUNK_BUDGET // max(1, n))


def block_rng(seed: int, block: int, chunk_code: int) -> Generator:
    """Philox stream for one (block, chunk); chunk_code 0 is the init chunk."""
    key = np.array([np.uint64(seed), np.uint64((block << 32) | chunk_code)],
                   dtype=np.uint64)
    return Generator(Philox(key=key))


def draw_init(seed, block, lanes, n, with_position):
    """Initial-state normals: (position draws or None, velocity draws)."""
    rng = block_rng(seed, block, 0)
    if with_position:
        z = rng.standard_normal((lanes, 2, n))
        return z[:, 0, :], z[:, 1, :]
    z = rng.standard_normal((lanes, 1, n))
    return None, z[:, 0, :]


def draw_kinetic_chunk(seed, block, chunk_idx, lanes, cs, n):
    """Step normals for a kinetic chunk, shape (lanes, cs, 2, n).

    [:, s, 0, :] is the velocity draw z1 of step s, [:, s, 1, :] is z2.
    The layout is lane-major, so truncating lanes or steps only drops
    trailing values of the (block, chunk) stream.
    """
    rng = block_rng(seed, block, 1 + chunk_idx)
    return rng.standard_normal((lanes, cs, 2, n))


def draw_overdamped_chunk(seed, block, chunk_idx, lanes, cs, n):
    """Step normals for an overdamped chunk, shape (lanes, cs, n)."""
    rng = block_rng(seed, block, 1 + chunk_idx)
    return rng.standard_normal((lanes, cs, n))


# ---------------------------------------------------------------------------
# per-step updates (numpy arrays in, new arrays out)
# ---------------------------------------------------------------------------

def _kinetic_update_numpy(x, y, g, z1, z2, vd, pv, pg, vg, sb, cb, so):
    # overflow to inf is how diverging replicas get caught; no warning
    with np.errstate(over="ignore", invalid="ignore"):
        xi_y = sb * z1
        xi_x = cb * z1 + so * z2
        x_new = ((x + pv * y) - pg * g) + xi_x
        y_new = ((vd * y) - vg * g) + xi_y
    return x_new, y_new


def _kinetic_update_loop(x, y, g, z1, z2, vd, pv, pg, vg, sb, cb, so):
    x_new = np.empty_like(x)
    y_new = np.empty_like(y)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            xi_y = sb * z1[i, j]
            xi_x = cb * z1[i, j] + so * z2[i, j]
            x_new[i, j] = ((x[i, j] + pv * y[i, j]) - pg * g[i, j]) + xi_x
            y_new[i, j] = ((vd * y[i, j]) - vg * g[i, j]) + xi_y
    return x_new, y_new


def _overdamped_update_numpy(x, g, z, s2e, eta):
    with np.errstate(over="ignore", invalid="ignore"):
        return (x + s2e * z) - eta * g


def _overdamped_update_loop(x, g, z, s2e, eta):
    x_new = np.empty_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            x_new[i, j] = (x[i, j] + s2e * z[i, j]) - eta * g[i, j]
    return x_new


# ---------------------------------------------------------------------------
# exact per-mode law scans (sweep engine)
# ---------------------------------------------------------------------------
# State per mode i: kinetic (m1, m2, c11, c12, c22) against pi-mode
# N(0, diag(1/lam, 1)); overdamped (m, v) against N(0, 1/lam).  The scan
# returns the first k with  sum_i mult_i * log(1 + chi2_i(k)) <= eps2,
# or -1 if kmax is exhausted.  Chi-square uses the closed Gaussian form;
# a non-positive-definite reference combination means chi2 = +inf.

def _scan_kinetic_impl(a11, a12, a21, a22, s11, s12, s22,
                       lams, mults, m1, m2, c11, c12, c22, eps2, kmax):
    nm = lams.shape[0]
    for k in range(kmax + 1):
        tot = 0.0
        for i in range(nm):
            det_p = c11[i] * c22[i] - c12[i] * c12[i]
            if det_p <= 0.0:
                tot = math.inf
                break
            ip11 = c22[i] / det_p
            ip12 = -c12[i] / det_p
            ip22 = c11[i] / det_p
            A11 = 2.0 * ip11 - lams[i]
            A12 = 2.0 * ip12
            A22 = 2.0 * ip22 - 1.0
            detA = A11 * A22 - A12 * A12
            if A11 <= 1e-12 or detA <= 1e-12:
                tot = math.inf
                break
            b1 = 2.0 * (ip11 * m1[i] + ip12 * m2[i])
            b2 = 2.0 * (ip12 * m1[i] + ip22 * m2[i])
            c0 = m1[i] * b1 + m2[i] * b2
            quad = (A22 * b1 * b1 - 2.0 * A12 * b1 * b2 + A11 * b2 * b2) / detA
            val = math.sqrt((1.0 / lams[i]) / (detA * det_p * det_p)) \
                * math.exp(0.5 * quad - 0.5 * c0)
            tot += mults[i] * math.log1p(val - 1.0)
        if tot <= eps2:
            return k
        for i in range(nm):
            n1 = a11[i] * m1[i] + a12[i] * m2[i]
            n2 = a21[i] * m1[i] + a22[i] * m2[i]
            m1[i] = n1
            m2[i] = n2
            d11 = a11[i] * (a11[i] * c11[i] + a12[i] * c12[i]) \
                + a12[i] * (a11[i] * c12[i] + a12[i] * c22[i]) + s11
            d12 = a21[i] * (a11[i] * c11[i] + a12[i] * c12[i]) \
                + a22[i] * (a11[i] * c12[i] + a12[i] * c22[i]) + s12
            d22 = a21[i] * (a21[i] * c11[i] + a22[i] * c12[i]) \
                + a22[i] * (a21[i] * c12[i] + a22[i] * c22[i]) + s22
            c11[i] = d11
            c12[i] = d12
            c22[i] = d22
    return -1


def _scan_overdamped_impl(aods, sod, lams, mults, m, v, eps2, kmax):
    nm = lams.shape[0]
    for k in range(kmax + 1):
        tot = 0.0
        for i in range(nm):
            if v[i] <= 0.0:
                tot = math.inf
                break
            A0 = 2.0 / v[i] - lams[i]
            if A0 <= 1e-12:
                tot = math.inf
                break
            b = 2.0 * m[i] / v[i]
            c0 = 2.0 * m[i] * m[i] / v[i]
            val = math.sqrt((1.0 / lams[i]) / (A0 * v[i] * v[i])) \
                * math.exp(0.5 * b * b / A0 - 0.5 * c0)
            tot += mults[i] * math.log1p(val - 1.0)
        if tot <= eps2:
            return k
        for i in range(nm):
            m[i] = aods[i] * m[i]
            v[i] = aods[i] * aods[i] * v[i] + sod
    return -1


if USING_NUMBA:
    kinetic_update = njit(cache=True)(_kinetic_update_loop)
    overdamped_update = njit(cache=True)(_overdamped_update_loop)
    scan_kinetic = njit(cache=True)(_scan_kinetic_impl)
    scan_overdamped = njit(cache=True)(_scan_overdamped_impl)
else:
    kinetic_update = _kinetic_update_numpy
    overdamped_update = _overdamped_update_numpy
    scan_kinetic = _scan_kinetic_impl
    scan_overdamped = _scan_overdamped_impl
