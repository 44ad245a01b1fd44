"""Hot matvec kernels for H = -Laplacian + V.

Two interchangeable paths compute the same stencil:

* a numba ``@njit`` gather kernel over the precomputed neighbor table
  (default when numba is importable), and
* a pure-numpy roll/slice stencil.

Set ``LATTICESCAPE_NO_NUMBA=1`` to force the numpy path. The two are
independent implementations, so the test suite cross-checks them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def _numba_disabled() -> bool:
    return os.environ.get("LATTICESCAPE_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}


USE_NUMBA = HAVE_NUMBA and not _numba_disabled()


def backend() -> str:
    """Name of the kernel backend selected at import time."""
    return "numba" if USE_NUMBA else "numpy"


if HAVE_NUMBA:

    @njit(cache=True)
    def _gather_apply(nbr, diag, phi, out):  # pragma: no cover - jitted
        n_sites, deg = nbr.shape
        for i in range(n_sites):
            acc = 0.0
            for j in range(deg):
                m = nbr[i, j]
                if m >= 0:
                    acc += phi[m]
            out[i] = diag[i] * phi[i] - acc


def apply_numba(phi: np.ndarray, nbr_table: np.ndarray, diag: np.ndarray) -> np.ndarray:
    """(diag * phi)_n - sum of phi over listed neighbors, via the jitted gather."""
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    out = np.empty_like(phi)
    _gather_apply(nbr_table, diag, phi, out)
    return out


def apply_numpy(phi: np.ndarray, side: int, dim: int, periodic: bool, diag: np.ndarray) -> np.ndarray:
    """Same stencil as apply_numba, built from axis rolls / shifted slices."""
    shape = (side,) * dim
    g = phi.reshape(shape, order="F")
    nbr_sum = np.zeros(shape, dtype=phi.dtype)
    for axis in range(dim):
        if periodic:
            nbr_sum += np.roll(g, 1, axis=axis)
            nbr_sum += np.roll(g, -1, axis=axis)
        else:
            lo = [slice(None)] * dim
            hi = [slice(None)] * dim
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            nbr_sum[tuple(hi)] += g[tuple(lo)]
            nbr_sum[tuple(lo)] += g[tuple(hi)]
    out = diag * phi - nbr_sum.reshape(-1, order="F")
    return out


def stencil_apply(phi, nbr_table, side, dim, periodic, diag):
    """Backend dispatch used by the operator layer."""
    if USE_NUMBA:
        return apply_numba(phi, nbr_table, diag)
    return apply_numpy(phi, side, dim, periodic, diag)
