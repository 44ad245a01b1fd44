"""Tight-binding Hamiltonians H = -Laplacian + V and their duals.

The operator acts matrix-free through the kernel layer; explicit sparse
and dense forms exist for small-instance oracles. The dual form carries
the complemented potential V_max - v; on a periodic lattice the dual is
admissible only for even side length.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import (
    AlreadyDual,
    DimensionMismatch,
    NotApplicable,
    OddPeriodicDual,
)
from .lattice import LatticeGeometry, neighbor_table


class OperatorForm(str, enum.Enum):
    STANDARD = "standard"
    DUAL = "dual"


@dataclass(frozen=True)
class PotentialField:
    """Per-site potential values with the recorded strength bound V_max.

    v_max is the nominal bound of the generating distribution, not the
    realized maximum; every value must lie in [0, v_max].
    """

    geom: LatticeGeometry
    values: np.ndarray
    v_max: float

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64)).copy()
        if vals.shape != (self.geom.n_sites,):
            raise DimensionMismatch(
                f"potential has {vals.size} entries, lattice has {self.geom.n_sites} sites"
            )
        if vals.size and vals.min() < 0.0:
            raise ValueError("potential values must be nonnegative")
        if self.v_max < 0.0:
            raise ValueError("v_max must be nonnegative")
        if vals.size and vals.max() > self.v_max:
            raise ValueError("potential values exceed the recorded v_max")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "v_max", float(self.v_max))


@dataclass(frozen=True)
class HamiltonianOperator:
    """H = -Laplacian + V (standard) or -Laplacian + (V_max - V) (dual)."""

    geom: LatticeGeometry
    potential: PotentialField
    form: OperatorForm = OperatorForm.STANDARD

    def __post_init__(self):
        if self.potential.geom != self.geom:
            raise DimensionMismatch("potential was built for a different geometry")
        if (
            self.form == OperatorForm.DUAL
            and self.geom.is_periodic
            and self.geom.side % 2 == 1
        ):
            raise OddPeriodicDual(
                f"periodic dual requires even side length, got K={self.geom.side}"
            )

    @property
    def n_sites(self) -> int:
        return self.geom.n_sites

    def site_values(self) -> np.ndarray:
        """Per-site potential values actually applied by this form."""
        if self.form == OperatorForm.DUAL:
            return self.potential.v_max - self.potential.values
        return self.potential.values


def dual_operator(H: HamiltonianOperator) -> HamiltonianOperator:
    """Operator with complemented potential V_max - v on the same geometry."""
    if H.form == OperatorForm.DUAL:
        raise AlreadyDual("operator is already in dual form")
    if H.geom.is_periodic and H.geom.side % 2 == 1:
        raise OddPeriodicDual(
            f"periodic dual requires even side length, got K={H.geom.side}"
        )
    return HamiltonianOperator(H.geom, H.potential, OperatorForm.DUAL)


def _check_length(geom: LatticeGeometry, phi: np.ndarray) -> np.ndarray:
    phi = np.ascontiguousarray(np.asarray(phi, dtype=np.float64))
    if phi.shape != (geom.n_sites,):
        raise DimensionMismatch(
            f"vector has {phi.size} entries, lattice has {geom.n_sites} sites"
        )
    return phi


def apply(H: HamiltonianOperator, phi) -> np.ndarray:
    """(H phi)_n = -sum of phi over in-domain neighbors + (2d + v_n) phi_n.

    Under Dirichlet the neighbor sum runs only over in-cube neighbors
    while the diagonal stays 2d (zero extension of the outside).
    """
    geom = H.geom
    phi = _check_length(geom, phi)
    diag = 2.0 * geom.dim + H.site_values()
    return _kernels.stencil_apply(
        phi, neighbor_table(geom), geom.side, geom.dim, geom.is_periodic, diag
    )


def inner(f, g) -> float:
    """Plain Euclidean inner product over sites, fixed accumulation order."""
    return float(np.dot(np.asarray(f, dtype=np.float64), np.asarray(g, dtype=np.float64)))


def gradient(geom: LatticeGeometry, f) -> np.ndarray:
    """(N, d) forward differences grad_i f_n = f_{n+e_i} - f_n.

    Periodic lattices wrap; Dirichlet cubes use the zero extension, so on
    the high face (c_i = K) the difference is -f_n. Edges whose source
    lies outside the cube belong to the boundary term of the Green form,
    not to this per-site field.
    """
    f = _check_length(geom, f)
    K, d = geom.side, geom.dim
    g = f.reshape((K,) * d, order="F")
    out = np.empty((geom.n_sites, d), dtype=np.float64)
    for axis in range(d):
        if geom.is_periodic:
            diff = np.roll(g, -1, axis=axis) - g
        else:
            shifted = np.zeros_like(g)
            lo = [slice(None)] * d
            hi = [slice(None)] * d
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            shifted[tuple(lo)] = g[tuple(hi)]
            diff = shifted - g
        out[:, axis] = diff.reshape(-1, order="F")
    return out


def green_gradient_form(geom: LatticeGeometry, f, g) -> float:
    """Gradient-sum side of Green's first identity for <g, -Laplacian f>.

    Periodic: sum over sites of (grad g . grad f). Dirichlet: forward
    differences of the zero extensions over every edge touching the cube,
    which adds f_n g_n on the high face (edge leaving the cube) and on
    the low face (edge entering from the outside shell).
    """
    f = _check_length(geom, f)
    g = _check_length(geom, g)
    K, d = geom.side, geom.dim
    gf = f.reshape((K,) * d, order="F")
    gg = g.reshape((K,) * d, order="F")
    total = 0.0
    for axis in range(d):
        if geom.is_periodic:
            df = np.roll(gf, -1, axis=axis) - gf
            dg = np.roll(gg, -1, axis=axis) - gg
            total += float(np.sum(df * dg))
        else:
            lo = [slice(None)] * d
            hi = [slice(None)] * d
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            df = gf[tuple(hi)] - gf[tuple(lo)]
            dg = gg[tuple(hi)] - gg[tuple(lo)]
            total += float(np.sum(df * dg))
            face_hi = [slice(None)] * d
            face_hi[axis] = -1
            face_lo = [slice(None)] * d
            face_lo[axis] = 0
            total += float(np.sum(gf[tuple(face_hi)] * gg[tuple(face_hi)]))
            total += float(np.sum(gf[tuple(face_lo)] * gg[tuple(face_lo)]))
    return total


def zero_potential(geom: LatticeGeometry) -> PotentialField:
    """All-zero potential (valid for operator algebra; not landscape-solvable on tori)."""
    return PotentialField(geom, np.zeros(geom.n_sites), 0.0)


def neg_laplacian_apply(geom: LatticeGeometry, phi) -> np.ndarray:
    """(-Laplacian phi) under the geometry's boundary condition."""
    H = HamiltonianOperator(geom, zero_potential(geom))
    return apply(H, phi)


def to_sparse(H: HamiltonianOperator) -> sp.csr_matrix:
    """Explicit CSR form, used by dense oracles and eigensolver factorizations."""
    geom = H.geom
    n = geom.n_sites
    table = neighbor_table(geom)
    rows = np.repeat(np.arange(n, dtype=np.int64), table.shape[1])
    cols = table.reshape(-1)
    keep = cols >= 0
    rows, cols = rows[keep], cols[keep]
    data = -np.ones(rows.size, dtype=np.float64)
    diag = 2.0 * geom.dim + H.site_values()
    A = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    A += sp.diags(diag)
    return A.tocsr()


def to_dense(H: HamiltonianOperator) -> np.ndarray:
    return to_sparse(H).toarray()


def antiperiodic_matrix_1d(side: int, v_tilde=None) -> np.ndarray:
    """K x K matrix of -Laplacian^AP + V-tilde: wrap hoppings carry +1, not -1."""
    if side < 3:
        raise ValueError("side must be >= 3")
    A = np.zeros((side, side))
    np.fill_diagonal(A, 2.0)
    idx = np.arange(side - 1)
    A[idx, idx + 1] = -1.0
    A[idx + 1, idx] = -1.0
    A[0, -1] = 1.0
    A[-1, 0] = 1.0
    if v_tilde is not None:
        v_tilde = np.asarray(v_tilde, dtype=np.float64)
        if v_tilde.shape != (side,):
            raise DimensionMismatch(f"v_tilde has {v_tilde.size} entries, expected {side}")
        A += np.diag(v_tilde)
    return A


def antiperiodic_apply_1d(v_tilde, phi) -> np.ndarray:
    """Apply the 1-d anti-periodic operator (demonstration-grade, d=1 only).

    Used solely to exhibit the failure of the maximum principle under the
    anti-periodic boundary condition.
    """
    v_tilde = np.asarray(v_tilde, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if v_tilde.ndim != 1 or phi.ndim != 1:
        raise NotApplicable("anti-periodic operator is 1-d only")
    if v_tilde.shape != phi.shape:
        raise DimensionMismatch(
            f"potential has {v_tilde.size} entries, vector has {phi.size}"
        )
    K = phi.size
    if K < 3:
        raise NotApplicable("need at least 3 sites")
    out = (2.0 + v_tilde) * phi
    out[1:] -= phi[:-1]
    out[:-1] -= phi[1:]
    # wrap hoppings enter with flipped sign
    out[0] += phi[-1]
    out[-1] += phi[0]
    return out
