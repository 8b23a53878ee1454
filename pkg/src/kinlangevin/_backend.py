"""Numba/numpy backend selection.

The hot numeric kernels in :mod:`kinlangevin._engine` exist in two
flavours: numba-jitted scalar loops and plain numpy array code.  Both
evaluate the same floating point expressions in the same order, so the
two backends produce bit-identical results; the jitted path is just
faster on the long scalar recursions.

The backend is picked once at import time:

* ``KINLANGEVIN_BACKEND=numpy``  forces the pure-numpy fallback,
* ``KINLANGEVIN_BACKEND=numba``  requires numba (ImportError if missing),
* unset: numba when importable, numpy otherwise.
"""

import os

_ENV_VAR = "KINLANGEVIN_BACKEND"


def _detect() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
        have_numba = True
    except ImportError:
        have_numba = False
    if choice == "numba" and not have_numba:
        raise ImportError(f"{_ENV_VAR}=numba but numba is not importable")
    return "numba" if have_numba else "numpy"


BACKEND = _detect()
USING_NUMBA = BACKEND == "numba"

if USING_NUMBA:
    from numba import njit
else:  # pragma: no cover - exercised via KINLANGEVIN_BACKEND=numpy runs
    def njit(*args, **kwargs):
        """No-op stand-in so jitted helpers stay importable."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap
