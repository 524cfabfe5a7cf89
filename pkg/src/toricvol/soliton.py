"""Soliton vector fields on toric Fano polytopes.

The coefficients ``c`` of the soliton field are the unique minimizer of the
strictly convex potential ``W(c) = int_P exp(<c, y>) dy``; its gradient is the
vector of weighted barycenter integrals that must vanish.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConvergenceError, PropernessError
from .polytope import Polytope
from .quadrature import AffineFunction, Kernel, polytope_moment

__all__ = [
    "SolitonField",
    "soliton_potential",
    "soliton_gradient",
    "soliton_hessian",
    "solve_soliton_field",
    "toric_futaki",
]

MAX_ITER = 200
ARMIJO_SLOPE = 1e-4


@dataclass(frozen=True)
class SolitonField:
    c: tuple[float, ...]
    potential_value: float
    gradient_norm: float
    hessian_condition: float
    iterations: int

    def to_dict(self) -> dict:
        return asdict(self)


def _require_proper(P: Polytope):
    if not P.contains_origin_strictly():
        bad = [i for i, f in enumerate(P.facets) if f.offset <= 0]
        raise PropernessError(
            "origin is not interior (facets %s); the soliton potential is not proper" % bad
        )


def _moment(P, c, order):
    return polytope_moment(P, AffineFunction.make(c, 0.0), Kernel.exp(), order)


def soliton_potential(P: Polytope, c) -> float:
    _require_proper(P)
    return float(_moment(P, np.asarray(c, dtype=float), 0))


def soliton_gradient(P: Polytope, c) -> np.ndarray:
    """``int_P y exp(<c, y>) dy``."""
    _require_proper(P)
    return _moment(P, np.asarray(c, dtype=float), 1)[: P.dim]


def soliton_hessian(P: Polytope, c) -> np.ndarray:
    """``int_P y y^T exp(<c, y>) dy``."""
    _require_proper(P)
    return _moment(P, np.asarray(c, dtype=float), 2)[: P.dim, : P.dim]


def toric_futaki(P: Polytope, c, direction) -> float:
    """Directional derivative of the potential at ``c``; on torus directions
    this is the toric Futaki-type obstruction, which vanishes exactly at the
    soliton field."""
    return float(np.dot(soliton_gradient(P, c), np.asarray(direction, dtype=float)))


def solve_soliton_field(P: Polytope, tol: float = 1e-10, c0=None) -> SolitonField:
    """Damped Newton iteration on ``W`` from ``c0`` (default the origin).

    Convergence is declared when ``|grad W| / W <= tol``.  Backtracking halves
    the step until the Armijo condition holds.
    """
    _require_proper(P)
    c = np.zeros(P.dim) if c0 is None else np.asarray(c0, dtype=float).copy()
    W = float(_moment(P, c, 0))
    for it in range(MAX_ITER + 1):
        g = _moment(P, c, 1)[: P.dim]
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol * W:
            H = _moment(P, c, 2)[: P.dim, : P.dim]
            return SolitonField(
                tuple(float(x) for x in c), W, gnorm / W, float(np.linalg.cond(H)), it
            )
        if it == MAX_ITER:
            break
        H = _moment(P, c, 2)[: P.dim, : P.dim]
        step = -np.linalg.solve(H, g)
        slope = float(g @ step)
        if -slope <= 1e-12 * W:
            # decrease is below the rounding of W; the Newton step is safe
            c = c + step
            W = float(_moment(P, c, 0))
            continue
        t = 1.0
        while True:
            trial = c + t * step
            W_trial = float(_moment(P, trial, 0))
            if W_trial <= W + ARMIJO_SLOPE * t * slope:
                break
            t *= 0.5
            if t < 1e-12:
                # no descent left at working precision
                W_trial, trial = W, c
                break
        if trial is c:
            break
        c, W = trial, W_trial
    raise ConvergenceError(
        "soliton Newton iteration did not converge",
        {"c": c.tolist(), "W": W, "gradient_norm": gnorm / W, "iterations": it},
    )
