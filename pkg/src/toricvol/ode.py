"""Momentum profile for conformally Kähler Einstein-Maxwell metrics on
``CP^1 x M``.

The profile ``Psi`` on ``[a, a+1]`` solves

    t^2 Psi'' - 2(2m-1) t Psi' + 2m(2m-1) Psi = c t^2 - d

with ``Psi(a) = Psi(a+1) = 0``, ``Psi'(a) = 2``, ``Psi'(a+1) = -2`` and
``Psi > 0`` inside.  The indicial roots are ``2m-1`` and ``2m``, so every
solution has the form ``A t^2 + B + C1 t^(2m-1) + C2 t^(2m)`` with ``A`` and
``B`` fixed by ``c`` and ``d``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConvergenceError, GeometryError

__all__ = ["OdeSolution", "particular_coefficients", "profile", "solve_product_ode", "ode_residual"]


@dataclass(frozen=True)
class OdeSolution:
    m: int
    c: float
    a: float
    d: float
    A: float
    B: float
    C1: float
    C2: float
    boundary_residual: float
    ode_residual: float
    min_interior: float
    roots_found: int

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        p = 2 * self.m - 1
        return self.A * t**2 + self.B + self.C1 * t**p + self.C2 * t ** (p + 1)

    def to_dict(self) -> dict:
        return asdict(self)


def particular_coefficients(m: int, c, d):
    """``(A, B)`` making ``A t^2 + B`` a particular solution."""
    A = c / (2.0 * (m - 1) * (2 * m - 3))
    B = -d / (2.0 * m * (2 * m - 1))
    return A, B


def profile(m: int, c: float, a, d):
    """Coefficients ``(A, B, C1, C2)`` of the solution vanishing at both ends."""
    A, B = particular_coefficients(m, c, d)
    p = 2 * m - 1
    b = a + 1.0
    # Cramer's rule; stays valid for the complex-step Jacobian
    m11, m12, m21, m22 = a**p, a ** (p + 1), b**p, b ** (p + 1)
    r1, r2 = -(A * a * a + B), -(A * b * b + B)
    det = m11 * m22 - m12 * m21
    if det == 0:
        raise np.linalg.LinAlgError("singular endpoint system")
    return A, B, (r1 * m22 - m12 * r2) / det, (m11 * r2 - r1 * m21) / det


def _dpsi(m, coeffs, t):
    A, _, C1, C2 = coeffs
    p = 2 * m - 1
    return 2.0 * A * t + p * C1 * t ** (p - 1) + (p + 1) * C2 * t**p


def _residual(m, c, z):
    a, d = z[0], z[1]
    coeffs = profile(m, c, a, d)
    return np.array([_dpsi(m, coeffs, a) - 2.0, _dpsi(m, coeffs, a + 1.0) + 2.0])


def _jacobian(m, c, z):
    # complex-step differentiation; the residual is analytic in (a, d)
    J = np.empty((2, 2))
    h = 1e-30 * max(1.0, float(np.max(np.abs(z))))
    for k in range(2):
        zc = z.astype(complex)
        zc[k] += 1j * h
        J[:, k] = _residual(m, c, zc).imag / h
    return J


def ode_residual(sol: OdeSolution, n: int = 1000) -> float:
    """Largest relative residual of the ODE at ``n`` interior points."""
    m = sol.m
    p = 2 * m - 1
    t = np.linspace(sol.a, sol.a + 1.0, n + 2)[1:-1]
    psi = sol.psi(t)
    d1 = 2 * sol.A * t + p * sol.C1 * t ** (p - 1) + (p + 1) * sol.C2 * t**p
    d2 = 2 * sol.A + p * (p - 1) * sol.C1 * t ** (p - 2) + (p + 1) * p * sol.C2 * t ** (p - 1)
    lhs = t * t * d2 - 2 * (2 * m - 1) * t * d1 + 2 * m * (2 * m - 1) * psi
    rhs = sol.c * t * t - sol.d
    scale = np.abs(sol.c * t * t) + abs(sol.d) + np.abs(2 * m * (2 * m - 1) * psi)
    return float(np.max(np.abs(lhs - rhs) / scale))


def _newton(m, c, z0, tol, max_iter=60):
    z = np.array(z0, dtype=float)
    try:
        R = _residual(m, c, z)
    except np.linalg.LinAlgError:
        return None
    for _ in range(max_iter):
        rn = float(np.max(np.abs(R)))
        if rn < tol:
            return z
        try:
            step = -np.linalg.solve(_jacobian(m, c, z), R)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        while t > 1e-8:
            trial = z + t * step
            if trial[0] > 0:
                try:
                    R_trial = _residual(m, c, trial)
                except np.linalg.LinAlgError:
                    R_trial = None
                if R_trial is not None and np.all(np.isfinite(R_trial)) and \
                        np.max(np.abs(R_trial)) < (1 - 1e-4 * t) * rn:
                    break
            t *= 0.5
        else:
            return None
        z, R = trial, R_trial
    return z if float(np.max(np.abs(R))) < tol else None


def solve_product_ode(m: int = 2, c: float = 10.0, tol: float = 1e-12,
                      a_grid=None, d_grid=None) -> OdeSolution:
    """Find ``(a, d)`` with ``a, d > 0`` and a positive profile.

    Damped Newton is started from every point of a logarithmic ``(a, d)``
    grid; roots with ``a, d > 0`` and ``Psi > 0`` at 1000 interior samples
    are admissible.  Raises :class:`ConvergenceError` if none is found.
    """
    if int(m) != m or m < 2:
        raise GeometryError("m must be an integer >= 2")
    m = int(m)
    a_grid = np.geomspace(1e-2, 1e2, 17) if a_grid is None else a_grid
    d_grid = np.geomspace(1e-2, 1e4, 17) if d_grid is None else d_grid
    found = []
    for a0 in a_grid:
        for d0 in d_grid:
            z = _newton(m, float(c), (a0, d0), tol)
            if z is None or z[0] <= 0 or z[1] <= 0:
                continue
            coeffs = profile(m, float(c), z[0], z[1])
            t = np.linspace(z[0], z[0] + 1.0, 1002)[1:-1]
            A, B, C1, C2 = coeffs
            psi = A * t * t + B + C1 * t ** (2 * m - 1) + C2 * t ** (2 * m)
            if np.min(psi) <= 0:
                continue
            if not any(np.allclose(z, f[0], rtol=1e-7, atol=1e-9) for f in found):
                found.append((z, coeffs, float(np.min(psi))))
    if not found:
        raise ConvergenceError(
            "no admissible (a, d) found for m=%d, c=%g" % (m, c),
            {"m": m, "c": float(c), "grid": [len(a_grid), len(d_grid)]},
        )
    z, coeffs, min_psi = min(found, key=lambda f: float(np.max(np.abs(_residual(m, c, f[0])))))
    a, d = float(z[0]), float(z[1])
    A, B, C1, C2 = (float(v) for v in coeffs)
    psi_a = A * a * a + B + C1 * a ** (2 * m - 1) + C2 * a ** (2 * m)
    b = a + 1.0
    psi_b = A * b * b + B + C1 * b ** (2 * m - 1) + C2 * b ** (2 * m)
    bres = float(max(abs(psi_a), abs(psi_b), *np.abs(_residual(m, c, z))))
    sol = OdeSolution(m, float(c), a, d, A, B, C1, C2, bres, 0.0, min_psi, len(found))
    return OdeSolution(**{**asdict(sol), "ode_residual": ode_residual(sol)})
