"""Landscape equation Hu = 1: matrix-free CG solve and certified lower bounds.

The solution's reciprocal is the effective potential; its minimum is
bounded below by 1/V_max on the torus and 1/(V_max + d) on the Dirichlet
cube. Those bounds are recorded on the field and verified by checks, never
enforced by clamping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPotential, SolverDiverged
from .operators import HamiltonianOperator, OperatorForm, apply, dual_operator


@dataclass(frozen=True)
class LandscapeField:
    """Landscape u, effective potential 1/u, and solve metadata."""

    u: np.ndarray
    w_eff: np.ndarray
    residual_inf: float
    lower_bound: float
    is_dual: bool

    def __post_init__(self):
        for name in ("u", "w_eff"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float64))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _cg(matvec, b, x0, tol, maxiter):
    """CG with max-norm stopping confirmed against a freshly computed residual."""
    x = np.array(x0, dtype=np.float64, copy=True)
    r = b - matvec(x)
    p = r.copy()
    rs = float(r @ r)
    for _ in range(maxiter):
        if np.max(np.abs(r)) <= tol:
            r = b - matvec(x)
            if np.max(np.abs(r)) <= tol:
                return x, float(np.max(np.abs(r)))
            p = r.copy()
            rs = float(r @ r)
        Ap = matvec(p)
        denom = float(p @ Ap)
        if denom <= 0.0:
            break
        alpha = rs / denom
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    r = b - matvec(x)
    achieved = float(np.max(np.abs(r)))
    if achieved <= tol:
        return x, achieved
    raise SolverDiverged(
        f"CG did not reach tol={tol:g} within {maxiter} iterations "
        f"(achieved {achieved:g})",
        residual=achieved,
    )


def solve_landscape(
    H: HamiltonianOperator,
    tol: float = 1e-10,
    maxiter: int | None = None,
    x0: np.ndarray | None = None,
) -> LandscapeField:
    """Solve Hu = 1 to max-norm residual <= tol.

    Requires the invertibility hypothesis: site values nonnegative, and on
    a periodic lattice not identically zero. The returned field is strictly
    positive with the boundary-condition-specific lower bound recorded.
    """
    geom = H.geom
    v = H.site_values()
    if v.min() < 0.0:
        raise InvalidPotential("potential must be nonnegative")
    if geom.is_periodic and not v.any():
        raise InvalidPotential(
            "identically-zero potential on a torus: H is singular (constants in kernel)"
        )
    n = geom.n_sites
    if maxiter is None:
        maxiter = int(math.ceil(50.0 * math.sqrt(n)))
    b = np.ones(n)
    start = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64)
    u, residual = _cg(lambda x: apply(H, x), b, start, tol, maxiter)
    if u.min() <= 0.0:
        raise SolverDiverged(
            f"landscape solution not strictly positive (min {u.min():g})",
            residual=residual,
        )
    if geom.is_periodic:
        lower = 1.0 / H.potential.v_max
    else:
        lower = 1.0 / (H.potential.v_max + geom.dim)
    return LandscapeField(
        u=u,
        w_eff=1.0 / u,
        residual_inf=residual,
        lower_bound=lower,
        is_dual=(H.form == OperatorForm.DUAL),
    )


def dual_landscape(H: HamiltonianOperator, tol: float = 1e-10, **kwargs) -> LandscapeField:
    """Landscape of the dual operator (complemented potential); is_dual = True."""
    return solve_landscape(dual_operator(H), tol=tol, **kwargs)
