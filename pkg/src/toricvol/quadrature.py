"""Exact integration of ``g(f(y))`` over simplices and polytopes.

For affine ``f`` the Hermite-Genocchi formula turns the integral of
``g(f)`` over an r-simplex into ``r! * weight * [l_0, ..., l_r]G``, where the
``l_i`` are the values of ``f`` at the vertices and ``G`` is an r-fold
antiderivative of ``g``.  Moments against barycentric coordinates come from
repeating nodes.  ``numeric_fallback`` is an adaptive cubature that shares no
code with this path and serves as its oracle.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from . import _backend
from .errors import AdmissibilityError, ConvergenceError
from .polytope import Polytope, Simplex

__all__ = [
    "AffineFunction",
    "Kernel",
    "divided_difference",
    "integrate_simplex",
    "integrate_polytope",
    "integrate_boundary",
    "integrate_weighted_exp",
    "polytope_moment",
    "numeric_fallback",
    "RESCUE_DIGITS",
]

# recurrence cancellation beyond this many digits triggers the numeric rescue
RESCUE_DIGITS = 6.0


@dataclass(frozen=True)
class AffineFunction:
    gradient: tuple[float, ...]
    constant: float

    @classmethod
    def make(cls, gradient, constant) -> "AffineFunction":
        return cls(tuple(float(x) for x in np.ravel(gradient)), float(constant))

    def __call__(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ np.asarray(self.gradient) + self.constant


@dataclass(frozen=True)
class Kernel:
    """One of ``exp(t)``, ``t**-k`` or ``t**s``."""

    tag: str
    param: int = 0

    @classmethod
    def exp(cls) -> "Kernel":
        return cls("exp", 0)

    @classmethod
    def inv_power(cls, k: int) -> "Kernel":
        if k < 1:
            raise ValueError("inverse power needs k >= 1")
        return cls("invpower", int(k))

    @classmethod
    def monomial(cls, s: int) -> "Kernel":
        if s < 0:
            raise ValueError("monomial degree must be nonnegative")
        return cls("monomial", int(s))

    @property
    def code(self) -> int:
        return {"exp": _backend.EXP, "invpower": _backend.INVPOWER,
                "monomial": _backend.MONOMIAL}[self.tag]

    @property
    def needs_positive(self) -> bool:
        return self.tag == "invpower"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.tag == "exp":
            return np.exp(t)
        if self.tag == "invpower":
            return t ** (-self.param)
        return t ** self.param

    def shifted(self, extra: int) -> "Kernel":
        """Kernel of the ``extra``-th derivative up to a constant factor (only
        meaningful for inverse powers)."""
        if self.tag != "invpower":
            return self
        return Kernel.inv_power(self.param + extra)


def divided_difference(kernel: Kernel, nodes) -> float:
    """``[l_0, ..., l_r]G`` where ``G`` is the r-fold antiderivative of the
    kernel (``r = len(nodes) - 1``); clustered nodes use a confluent Taylor
    expansion."""
    nodes = [float(x) for x in nodes]
    if not nodes:
        raise ValueError("need at least one node")
    if kernel.needs_positive and min(nodes) <= 0:
        raise AdmissibilityError("inverse-power kernel evaluated at non-positive node %r" % min(nodes))
    return _backend.divdiff(kernel.code, kernel.param, nodes)[0]


def _check_positive(points, f: AffineFunction, kernel: Kernel, what="vertex"):
    if not kernel.needs_positive:
        return
    vals = f(points)
    bad = np.flatnonzero(vals <= 0)
    if bad.size:
        i = int(bad[0])
        raise AdmissibilityError(
            "affine function is %.6g <= 0 at %s %d %s"
            % (vals[i], what, i, np.asarray(points)[i].tolist())
        )


def integrate_simplex(simplex: Simplex, f: AffineFunction, kernel: Kernel, rescue: bool = True) -> float:
    """Integral of ``kernel(f)`` over the simplex with respect to its measure."""
    verts = simplex.float_vertices
    _check_positive(verts, f, kernel)
    nodes = f(verts).tolist()
    value, lost = _backend.divdiff(kernel.code, kernel.param, nodes)
    value *= math.factorial(simplex.dim) * float(simplex.weight)
    if rescue and lost > RESCUE_DIGITS:
        return numeric_fallback(simplex, lambda y: kernel(f(y)), tol=1e-12)
    return value


def polytope_moment(P: Polytope, f: AffineFunction, kernel: Kernel, order: int = 0,
                    boundary: bool = False):
    """Integral over the polytope (or its boundary) of ``kernel(f)`` times
    1, ``X`` or ``X X^T`` with ``X = (y, 1)``, for order 0, 1, 2."""
    _check_positive(P.float_vertices, f, kernel)
    verts, weights = P.boundary_arrays if boundary else P.interior_arrays
    return _backend.simplex_moments(
        verts, weights, np.asarray(f.gradient, dtype=float), f.constant,
        kernel.code, kernel.param, order,
    )


def integrate_polytope(P: Polytope, f: AffineFunction, kernel: Kernel) -> float:
    return float(polytope_moment(P, f, kernel, 0))


def integrate_boundary(P: Polytope, f: AffineFunction, kernel: Kernel) -> float:
    """Integral over the boundary against the lattice measure."""
    return float(polytope_moment(P, f, kernel, 0, boundary=True))


def integrate_weighted_exp(P: Polytope, c, i: int) -> float:
    """``int_P y_i exp(<c, y>) dy``."""
    f = AffineFunction.make(c, 0.0)
    return float(polytope_moment(P, f, Kernel.exp(), 1)[i])


@lru_cache(maxsize=None)
def _conical_rule(r: int, n: int):
    """Collapsed-coordinate Gauss-Jacobi rule on the standard r-simplex.

    Returns barycentric points (N, r+1) and weights summing to 1.
    """
    if r == 0:
        return np.ones((1, 1)), np.ones(1)
    grids, wts = [], []
    for i in range(1, r + 1):
        alpha = r - i
        x, w = roots_jacobi(n, alpha, 0)
        grids.append((x + 1.0) / 2.0)
        wts.append(w / 2.0 ** (alpha + 1))
    mesh = np.meshgrid(*grids, indexing="ij")
    wmesh = np.meshgrid(*wts, indexing="ij")
    u = np.stack([g.ravel() for g in mesh], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wmesh], axis=1), axis=1)
    x = np.empty_like(u)
    rest = np.ones(u.shape[0])
    for i in range(r):
        x[:, i] = rest * u[:, i]
        rest = rest * (1.0 - u[:, i])
    bary = np.column_stack([1.0 - x.sum(axis=1), x])
    return bary, w / w.sum()


def _apply_rule(verts, integrand, r, n):
    bary, w = _conical_rule(r, n)
    pts = bary @ verts
    return float(np.dot(w, integrand(pts)))


def numeric_fallback(simplex: Simplex, integrand, tol: float = 1e-11, max_pieces: int = 20000,
                     low: int = 8, high: int = 12) -> float:
    """Adaptive cubature of ``integrand`` over a simplex against its measure.

    Pieces are refined by longest-edge bisection until the summed estimate
    ``|Q_high - Q_low|`` falls below ``tol`` relative to the running total.
    ``integrand`` maps an (N, m) array of points to N values.
    """
    r = simplex.dim
    verts0 = simplex.float_vertices
    total_weight = float(simplex.weight)

    def evaluate(verts, frac):
        hi = _apply_rule(verts, integrand, r, high) * frac * total_weight
        lo = _apply_rule(verts, integrand, r, low) * frac * total_weight
        return hi, abs(hi - lo)

    value, err = evaluate(verts0, 1.0)
    heap = [(-err, 0, verts0, 1.0, value)]
    total, total_err = value, err
    counter = 1
    while total_err > tol * abs(total) and total_err > 1e-300:
        if len(heap) >= max_pieces:
            raise ConvergenceError(
                "numeric fallback did not reach tolerance %.1e within %d pieces" % (tol, max_pieces),
                {"estimate": total, "error": total_err},
            )
        neg_err, _, verts, frac, val = heapq.heappop(heap)
        total -= val
        total_err += neg_err
        if r == 0:
            break
        best, pair = -1.0, (0, 1)
        for a in range(r + 1):
            for b in range(a + 1, r + 1):
                d = float(np.sum((verts[a] - verts[b]) ** 2))
                if d > best:
                    best, pair = d, (a, b)
        mid = 0.5 * (verts[pair[0]] + verts[pair[1]])
        for k in pair:
            child = verts.copy()
            child[k] = mid
            v, e = evaluate(child, frac / 2.0)
            total += v
            total_err += e
            heapq.heappush(heap, (-e, counter, child, frac / 2.0, v))
            counter += 1
    return total
