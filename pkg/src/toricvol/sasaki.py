"""Volume of toric Sasakian links as a function of the Reeb vector.

For a Reeb vector ``xi`` inside the cone spanned by the fan rays, the
truncated moment cone ``{y in C* : <y, xi> <= 1}`` has normalized volume

    Vol(xi) = sum_sigma |det U_sigma| / prod_{u in sigma} <u, xi>

over any simplicial decomposition of ``C*``.  The global transcendental
constant relating this to the Riemannian volume of the link is dropped.
``Vol`` is homogeneous of degree ``-n`` (``n`` the cone dimension) and convex;
it is minimized on the charge slice ``xi_1 = n``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConvergenceError, GeometryError, ReebConeError
from .polytope import MomentCone

__all__ = [
    "ReebVector",
    "ReebVolumeResult",
    "reeb_pairings",
    "reeb_volume",
    "reeb_volume_gradient",
    "reeb_volume_hessian",
    "minimize_reeb_volume",
    "sasaki_futaki",
    "slice_center",
]

MAX_ITER = 300


@dataclass(frozen=True)
class ReebVector:
    xi: tuple[float, ...]
    slice_residual: float

    @classmethod
    def make(cls, cone: MomentCone, xi) -> "ReebVector":
        xi = tuple(float(v) for v in xi)
        return cls(xi, xi[0] - cone.dim)


@dataclass(frozen=True)
class ReebVolumeResult:
    xi_star: ReebVector
    volume: float
    gradient_norm: float
    hessian_min_eigenvalue: float
    iterations: int

    def to_dict(self) -> dict:
        return asdict(self)


def reeb_pairings(cone: MomentCone, xi) -> np.ndarray:
    """``<u, xi>`` for every dual ray ``u``; all positive inside the Reeb cone."""
    return cone.dual_array @ np.asarray(xi, dtype=float)


def _checked(cone: MomentCone, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (cone.dim,):
        raise GeometryError("Reeb vector must have %d entries" % cone.dim)
    ell = reeb_pairings(cone, xi)
    if np.any(ell <= 0):
        i = int(np.argmin(ell))
        raise ReebConeError(
            "xi = %s is not inside the Reeb cone: <dual_rays[%d], xi> = %.6g"
            % (xi.tolist(), i, ell[i])
        )
    return ell


def _terms(cone: MomentCone, ell: np.ndarray):
    for idx, det in zip(cone.decomposition, cone.determinants):
        idx = list(idx)
        yield idx, det / float(np.prod(ell[idx]))


def reeb_volume(cone: MomentCone, xi) -> float:
    ell = _checked(cone, xi)
    return float(sum(t for _, t in _terms(cone, ell)))


def reeb_volume_gradient(cone: MomentCone, xi) -> np.ndarray:
    ell = _checked(cone, xi)
    U = cone.dual_array
    g = np.zeros(cone.dim)
    for idx, t in _terms(cone, ell):
        g -= t * (U[idx] / ell[idx, None]).sum(axis=0)
    return g


def reeb_volume_hessian(cone: MomentCone, xi) -> np.ndarray:
    ell = _checked(cone, xi)
    U = cone.dual_array
    H = np.zeros((cone.dim, cone.dim))
    for idx, t in _terms(cone, ell):
        W = U[idx] / ell[idx, None]
        s = W.sum(axis=0)
        H += t * (np.outer(s, s) + W.T @ W)
    return H


def slice_center(cone: MomentCone) -> np.ndarray:
    """Point of the charge slice proportional to the mean fan ray."""
    v = cone.fan_array.mean(axis=0)
    return cone.dim * v / v[0]


def sasaki_futaki(cone: MomentCone, xi, direction) -> float:
    """Derivative of ``Vol`` at ``xi`` along a slice-tangent direction."""
    Y = np.asarray(direction, dtype=float)
    if Y.shape != (cone.dim,) or Y[0] != 0:
        raise GeometryError("direction must be tangent to the charge slice (first entry 0)")
    return float(reeb_volume_gradient(cone, xi) @ Y)


def minimize_reeb_volume(cone: MomentCone, tol: float = 1e-10, xi0=None) -> ReebVolumeResult:
    """Newton's method on the charge slice with a feasibility-guarded
    backtracking line search.

    ``Vol`` diverges at the boundary of the Reeb cone, so it acts as its own
    barrier: steps leaving the cone or failing the Armijo test are halved.
    Convergence is declared when the slice gradient satisfies
    ``|grad| <= tol * Vol``.
    """
    n = cone.dim
    xi = slice_center(cone) if xi0 is None else np.asarray(xi0, dtype=float).copy()
    xi[0] = float(n)
    V = reeb_volume(cone, xi)
    gnorm = np.inf
    for it in range(MAX_ITER + 1):
        g = reeb_volume_gradient(cone, xi)[1:]
        H = reeb_volume_hessian(cone, xi)[1:, 1:]
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol * V:
            return ReebVolumeResult(
                ReebVector.make(cone, xi), V, gnorm, float(np.linalg.eigvalsh(H)[0]), it
            )
        if it == MAX_ITER:
            break
        step = -np.linalg.solve(H, g)
        slope = float(g @ step)
        t = 1.0
        while t > 1e-14:
            trial = xi.copy()
            trial[1:] += t * step
            if np.all(reeb_pairings(cone, trial) > 0):
                V_trial = reeb_volume(cone, trial)
                if V_trial <= V + 1e-4 * t * slope:
                    break
            t *= 0.5
        else:
            break
        xi, V = trial, V_trial
    raise ConvergenceError(
        "Reeb volume minimization did not converge",
        {"xi": xi.tolist(), "volume": V, "gradient_norm": gnorm, "iterations": it},
    )
