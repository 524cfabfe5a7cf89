"""Normalized Einstein-Hilbert functional on moment polytopes.

For an affine function ``f = <K, y> + a`` positive on the polytope,

    EH(K, a) = 4 pi / (m!)^(1/m) * B / V^((m-1)/m),
    B = int_{dP} f^(2-2m) dsigma,   V = int_P f^(-2m) dy,

with ``dsigma`` the lattice boundary measure.  ``EH`` is homogeneous of
degree 0 in ``(K, a)``, so critical points are projective classes; the
finder works on the unit sphere.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import AdmissibilityError, ConvergenceError, GeometryError
from .polytope import Polytope, build_polytope
from .quadrature import AffineFunction, Kernel, polytope_moment

__all__ = [
    "AffineParameter",
    "CriticalPoint",
    "CriticalPointReport",
    "eh_value",
    "eh_gradient",
    "eh_hessian",
    "log_eh_derivatives",
    "find_critical_points",
    "angular_distance",
    "normalize_representative",
    "product_polytope",
    "blowup_polytope",
    "quartic",
    "quartic_roots",
    "closed_form_critical",
    "eh_landscape",
]

DEDUP_ANGLE = 1e-6
DEGENERATE_RTOL = 1e-7
GRADIENT_TOL = 1e-9
DEFLATION_STARTS = 20
DEFLATION_RADII = (0.05, 0.2, 0.5)
# EH stays finite where f touches a vertex, and its derivatives lose all
# precision there; such points must not pass as critical
INTERIOR_MARGIN = 1e-6


@dataclass(frozen=True)
class AffineParameter:
    K: tuple[float, ...]
    a: float

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.K + (self.a,), dtype=float)

    @classmethod
    def from_vector(cls, x) -> "AffineParameter":
        x = np.asarray(x, dtype=float)
        return cls(tuple(float(v) for v in x[:-1]), float(x[-1]))


def _as_vector(P: Polytope, K, a) -> np.ndarray:
    K = np.ravel(np.asarray(K, dtype=float))
    if K.size != P.dim:
        raise GeometryError("K must have %d entries" % P.dim)
    return np.append(K, float(a))


def _check_admissible(P: Polytope, x: np.ndarray):
    vals = P.float_vertices @ x[:-1] + x[-1]
    bad = np.flatnonzero(vals <= 0)
    if bad.size:
        i = int(bad[0])
        raise AdmissibilityError(
            "f_(K,a) = %.6g <= 0 at vertex %d %s" % (vals[i], i, P.float_vertices[i].tolist())
        )


def is_admissible(P: Polytope, x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(P.float_vertices @ x[:-1] + x[-1] > 0))


def _interior(P: Polytope, x) -> bool:
    vals = P.float_vertices @ np.asarray(x[:-1], dtype=float) + x[-1]
    return bool(vals.min() > INTERIOR_MARGIN * vals.max())


def _prefactor(m: int) -> float:
    return 4.0 * math.pi / math.factorial(m) ** (1.0 / m)


def log_eh_derivatives(P: Polytope, x, order: int = 2):
    """``log EH`` and, up to ``order``, its gradient and Hessian in ``(K, a)``."""
    x = np.asarray(x, dtype=float)
    m = P.dim
    f = AffineFunction.make(x[:m], x[m])
    kB, kV = 2 * m - 2, 2 * m
    alpha = (m - 1) / m
    if kB == 0:
        B = float(P.boundary_measure)
        gB = np.zeros(m + 1)
        HB = np.zeros((m + 1, m + 1))
    else:
        B = float(polytope_moment(P, f, Kernel.inv_power(kB), 0, boundary=True))
    V = float(polytope_moment(P, f, Kernel.inv_power(kV), 0))
    value = math.log(_prefactor(m)) + math.log(B) - alpha * math.log(V)
    if order == 0:
        return value
    if kB:
        gB = -kB * polytope_moment(P, f, Kernel.inv_power(kB + 1), 1, boundary=True)
    gV = -kV * polytope_moment(P, f, Kernel.inv_power(kV + 1), 1)
    grad = gB / B - alpha * gV / V
    if order == 1:
        return value, grad
    if kB:
        HB = kB * (kB + 1) * polytope_moment(P, f, Kernel.inv_power(kB + 2), 2, boundary=True)
    HV = kV * (kV + 1) * polytope_moment(P, f, Kernel.inv_power(kV + 2), 2)
    hess = HB / B - np.outer(gB, gB) / B**2 - alpha * (HV / V - np.outer(gV, gV) / V**2)
    return value, grad, hess


def eh_value(P: Polytope, K, a) -> float:
    x = _as_vector(P, K, a)
    _check_admissible(P, x)
    return math.exp(log_eh_derivatives(P, x, 0))


def eh_gradient(P: Polytope, K, a) -> np.ndarray:
    """Gradient of ``EH`` in ``(K, a)``; orthogonal to ``(K, a)``."""
    x = _as_vector(P, K, a)
    _check_admissible(P, x)
    value, grad = log_eh_derivatives(P, x, 1)
    return math.exp(value) * grad


def eh_hessian(P: Polytope, K, a) -> np.ndarray:
    x = _as_vector(P, K, a)
    _check_admissible(P, x)
    value, grad, hess = log_eh_derivatives(P, x, 2)
    return math.exp(value) * (hess + np.outer(grad, grad))


def normalize_representative(P: Polytope, x) -> np.ndarray:
    """Unit vector in the projective class of ``x`` on which ``f`` is positive."""
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    if is_admissible(P, x):
        return x
    if is_admissible(P, -x):
        return -x
    raise AdmissibilityError("neither sign of %s is positive on the polytope" % x.tolist())


def angular_distance(x, y) -> float:
    """Angle between projective classes of two nonzero vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x = x / np.linalg.norm(x)
    y = y / np.linalg.norm(y)
    if np.dot(x, y) < 0:
        y = -y
    return 2.0 * math.asin(min(1.0, float(np.linalg.norm(x - y)) / 2.0))


def _tangent_basis(x: np.ndarray) -> np.ndarray:
    _, _, vt = np.linalg.svd(x[None, :])
    return vt[1:].T


@dataclass
class _Run:
    x: np.ndarray
    residual: float
    last_step: float
    iterations: int
    converged: bool


def _deflation(x: np.ndarray, known: np.ndarray):
    """``log M`` and its ambient gradient for ``M = prod(1/d_i^2 + 1)``, with
    ``d_i`` the projective chord distance to the known roots."""
    signs = np.where(known @ x < 0, -1.0, 1.0)
    diff = x[None, :] - signs[:, None] * known
    d2 = np.maximum(np.einsum("ij,ij->i", diff, diff), 1e-300)
    inv = 1.0 / d2
    log_m = float(np.sum(np.log1p(inv)))
    grad = np.sum((-2.0 * inv * inv / (inv + 1.0))[:, None] * diff, axis=0)
    return log_m, grad


def _sphere_newton(P: Polytope, x0: np.ndarray, max_iter: int = 80) -> _Run:
    """Levenberg-damped Newton for a zero of the tangential gradient of log EH.

    By homogeneity the ambient gradient is tangent to the sphere and the
    Riemannian Hessian is the tangential block of the ambient Hessian.
    """
    x = x0 / np.linalg.norm(x0)
    _, g, H = log_eh_derivatives(P, x, 2)
    lam = 0.0
    last_step = math.inf
    for it in range(max_iter):
        Q = _tangent_basis(x)
        gt = Q.T @ g
        res = float(np.linalg.norm(gt))
        if res < 1e-13:
            return _Run(x, res, last_step, it, True)
        Ht = Q.T @ H @ Q
        accepted = False
        for _ in range(40):
            if lam == 0.0:
                delta = -np.linalg.lstsq(Ht, gt, rcond=None)[0]
            else:
                delta = -np.linalg.solve(Ht.T @ Ht + lam * np.eye(len(gt)), Ht.T @ gt)
            norm = float(np.linalg.norm(delta))
            if norm > 0.5:
                delta *= 0.5 / norm
                norm = 0.5
            trial = x + Q @ delta
            trial /= np.linalg.norm(trial)
            if is_admissible(P, trial):
                _, g_new, H_new = log_eh_derivatives(P, trial, 2)
                res_new = float(np.linalg.norm(g_new - np.dot(g_new, trial) * trial))
                if res_new < res:
                    accepted = True
                    break
            lam = max(10.0 * lam, 1e-8 * max(1.0, float(np.linalg.norm(Ht)) ** 2))
        if not accepted:
            # stalled at the noise floor of the gradient
            return _Run(x, res, last_step, it, res < 1e-10)
        x, g, H = trial, g_new, H_new
        last_step = norm
        lam = lam / 10.0 if lam > 1e-14 else 0.0
    Q = _tangent_basis(x)
    res = float(np.linalg.norm(Q.T @ g))
    return _Run(x, res, last_step, max_iter, res < 1e-10)


def _deflated_newton(P: Polytope, x0: np.ndarray, known: np.ndarray,
                     max_iter: int = 60) -> _Run:
    """Newton on the deflated residual ``M(x) r(x)``.

    The deflated step equals the Newton step ``s`` divided by ``1 - w.s``,
    ``w`` the tangential gradient of ``log M``.  Steps are capped and halved
    only to stay admissible; a merit test would undo the repulsion.
    """
    x = x0 / np.linalg.norm(x0)
    res = math.inf
    for it in range(max_iter):
        _, g, H = log_eh_derivatives(P, x, 2)
        Q = _tangent_basis(x)
        gt = Q.T @ g
        res = float(np.linalg.norm(gt))
        if res < 1e-10:
            return _Run(x, res, math.inf, it, True)
        try:
            delta = -np.linalg.solve(Q.T @ H @ Q, gt)
        except np.linalg.LinAlgError:
            break
        denom = 1.0 - float((Q.T @ _deflation(x, known)[1]) @ delta)
        if abs(denom) > 1e-12:
            delta = delta / denom
        norm = float(np.linalg.norm(delta))
        if norm > 0.5:
            delta *= 0.5 / norm
        t = 1.0
        while t > 1e-6:
            trial = x + t * (Q @ delta)
            trial /= np.linalg.norm(trial)
            if is_admissible(P, trial):
                break
            t *= 0.5
        else:
            break
        x = trial
    return _Run(x, res, math.inf, max_iter, False)


@dataclass(frozen=True)
class CriticalPoint:
    representative: tuple[float, ...]
    value: float
    gradient_norm: float
    hessian_signature: str
    hessian_eigenvalues: tuple[float, ...]
    basin_count: int

    @property
    def K(self) -> tuple[float, ...]:
        return self.representative[:-1]

    @property
    def a(self) -> float:
        return self.representative[-1]


@dataclass(frozen=True)
class CriticalPointReport:
    points: tuple[CriticalPoint, ...]
    starts_used: int
    duplicates_merged: int
    non_converged: int
    seed: int | None = None
    polytope: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def classify(eigenvalues, rtol: float = DEGENERATE_RTOL) -> str:
    ev = np.asarray(eigenvalues, dtype=float)
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    if scale == 0.0 or np.any(np.abs(ev) <= rtol * scale):
        return "degenerate"
    if np.all(ev > 0):
        return "min"
    if np.all(ev < 0):
        return "max"
    return "saddle"


def _slice_hessian(P: Polytope, x: np.ndarray) -> tuple[float, np.ndarray, float]:
    value, g, H = log_eh_derivatives(P, x, 2)
    eh = math.exp(value)
    Q = _tangent_basis(x)
    # at a critical point Hess EH = EH * Hess log EH on the tangent space
    Ht = eh * (Q.T @ (H + np.outer(g, g)) @ Q)
    return eh, np.linalg.eigvalsh(0.5 * (Ht + Ht.T)), eh * float(np.linalg.norm(g))


def _sample_start(P: Polytope, rng: np.random.Generator, max_tries: int = 100000) -> np.ndarray:
    for _ in range(max_tries):
        x = rng.standard_normal(P.dim + 1)
        x /= np.linalg.norm(x)
        if is_admissible(P, x):
            return x
        if is_admissible(P, -x):
            return -x
    raise RuntimeError("no admissible start found; the admissible cone must be nonempty")


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("CVL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _same_class(a: _Run, b: _Run) -> bool:
    radius = max(DEDUP_ANGLE, 10.0 * min(a.last_step, 1e-3), 10.0 * min(b.last_step, 1e-3))
    return angular_distance(a.x, b.x) <= radius


def _ring_starts(P: Polytope, x: np.ndarray) -> list[np.ndarray]:
    """Admissible points on small geodesic rings around ``x``."""
    Q = _tangent_basis(x)
    out = []
    for rho in DEFLATION_RADII:
        for k in range(8):
            t = 2.0 * math.pi * k / 8
            y = x + rho * (Q @ np.array([math.cos(t), math.sin(t)]))
            y /= np.linalg.norm(y)
            if is_admissible(P, y):
                out.append(y)
    return out


def find_critical_points(P: Polytope, n_starts: int = 200, seed: int = 42,
                         workers: int | None = None) -> CriticalPointReport:
    """Deflated multistart sphere Newton for the critical points of ``EH`` on
    a 2-dimensional polytope.

    Each start draws from its own child of ``SeedSequence(seed)``, so the
    report does not depend on the worker count.  Converged runs are merged
    when their classes are within ``DEDUP_ANGLE``, or within ten times the
    last Newton step (runs that stalled near a degenerate point).  A second
    pass reruns the first ``DEFLATION_STARTS`` starts with the roots found so
    far deflated, together with starts on rings around every known root,
    which recovers critical points with small basins.
    """
    if P.dim != 2:
        raise GeometryError("critical point search is implemented for 2-dimensional polytopes")
    children = np.random.SeedSequence(seed).spawn(n_starts)
    starts = [_sample_start(P, np.random.default_rng(ch)) for ch in children]
    n_workers = _worker_count(workers)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            runs = list(pool.map(lambda s: _sphere_newton(P, s), starts))
    else:
        runs = [_sphere_newton(P, s) for s in starts]

    good = [r for r in runs if r.converged and _interior(P, r.x)]
    good.sort(key=lambda r: r.residual)
    clusters: list[list[_Run]] = []
    for r in good:
        for cl in clusters:
            if _same_class(cl[0], r):
                cl.append(r)
                break
        else:
            clusters.append([r])
    merged = len(good) - len(clusters)

    deflated = 0
    queue = [cl[0].x for cl in clusters] + starts[:DEFLATION_STARTS]
    while queue and clusters:
        x0 = queue.pop(0)
        if any(np.allclose(x0, cl[0].x) for cl in clusters):
            candidates = _ring_starts(P, x0)
        else:
            candidates = [x0]
        for y0 in candidates:
            known = np.array([cl[0].x for cl in clusters])
            hit = _deflated_newton(P, y0, known)
            if not hit.converged:
                continue
            polished = _sphere_newton(P, hit.x)
            if not (polished.converged and _interior(P, polished.x)):
                continue
            if not any(_same_class(cl[0], polished) for cl in clusters):
                clusters.append([polished])
                queue.append(polished.x)
                deflated += 1

    points = []
    for cl in clusters:
        x = normalize_representative(P, cl[0].x)
        eh, ev, gnorm = _slice_hessian(P, x)
        if gnorm >= GRADIENT_TOL:
            continue
        points.append(
            CriticalPoint(tuple(float(v) for v in x), eh, gnorm, classify(ev),
                          tuple(float(v) for v in ev), len(cl))
        )
    points.sort(key=lambda p: tuple(round(v, 9) for v in p.representative))
    return CriticalPointReport(
        tuple(points),
        starts_used=n_starts,
        duplicates_merged=merged,
        non_converged=len(runs) - len(good),
        seed=seed,
        polytope=P.name,
        extra={"found_by_deflation": deflated},
    )


def product_polytope(p) -> Polytope:
    """Rectangle ``[0, p] x [0, 1]`` (product of projective lines)."""
    p = Fraction(p) if not isinstance(p, str) else Fraction(p)
    if p <= 0:
        raise GeometryError("p must be positive")
    return build_polytope(2, [(0, 0), (p, 0), (p, 1), (0, 1)], name="product_p=%s" % float(p))


def blowup_polytope(p) -> Polytope:
    """Trapezoid ``conv{(0,0), (p,0), (p,1-p), (0,1)}`` (one-point blow-up)."""
    p = Fraction(p)
    if not 0 < p < 1:
        raise GeometryError("p must lie in (0, 1)")
    return build_polytope(2, [(0, 0), (p, 0), (p, 1 - p), (0, 1)], name="blowup_p=%s" % float(p))


QUARTIC = (Fraction(4), Fraction(-16), Fraction(16), Fraction(-4), Fraction(1))


def quartic(p: float) -> float:
    """``p^4 - 4p^3 + 16p^2 - 16p + 4``."""
    return (((p - 4.0) * p + 16.0) * p - 16.0) * p + 4.0


def _poly_eval(coeffs, x):
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _poly_rem(num, den):
    num = list(num)
    while len(num) >= len(den) and any(num):
        if num[-1] == 0:
            num.pop()
            continue
        factor = num[-1] / den[-1]
        shift = len(num) - len(den)
        for i, c in enumerate(den):
            num[shift + i] -= factor * c
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return num


def _sturm_chain(coeffs):
    deriv = [i * c for i, c in enumerate(coeffs)][1:]
    chain = [list(coeffs), deriv]
    while True:
        rem = _poly_rem(chain[-2], chain[-1])
        if not rem:
            break
        chain.append([-c for c in rem])
    return chain


def _sign_changes(chain, x) -> int:
    signs = [v for v in (_poly_eval(p, x) for p in chain) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def quartic_roots() -> tuple[float, float]:
    """The two real roots ``0 < alpha < beta < 1`` of the quartic.

    Roots are isolated exactly with a Sturm chain over rationals and polished
    by Newton's method.
    """
    chain = _sturm_chain(QUARTIC)

    def count(lo, hi):
        return _sign_changes(chain, lo) - _sign_changes(chain, hi)

    if count(Fraction(0), Fraction(1)) != 2:
        raise RuntimeError("expected two real roots in (0, 1)")
    intervals = [(Fraction(0), Fraction(1))]
    isolated = []
    while intervals:
        lo, hi = intervals.pop()
        n = count(lo, hi)
        if n == 0:
            continue
        if n == 1 and hi - lo < Fraction(1, 1024):
            isolated.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        intervals += [(lo, mid), (mid, hi)]
    isolated.sort()
    roots = []
    for lo, hi in isolated:
        # sign change brackets a simple root; bisect exactly, then Newton in floats
        for _ in range(20):
            mid = (lo + hi) / 2
            if (_poly_eval(QUARTIC, lo) > 0) == (_poly_eval(QUARTIC, mid) > 0):
                lo = mid
            else:
                hi = mid
        x = float((lo + hi) / 2)
        for _ in range(8):
            dfx = ((4.0 * x - 12.0) * x + 32.0) * x - 16.0
            step = quartic(x) / dfx
            x -= step
            if abs(step) < 1e-17:
                break
        roots.append(x)
    alpha, beta = roots
    if not 0 < alpha < beta < 1:
        raise RuntimeError("root ordering check failed")
    return alpha, beta


def closed_form_critical(family: str, p: float) -> list[np.ndarray]:
    """Known critical classes of the product and blow-up families.

    Returned as unit representatives on which the affine function is positive.
    """
    p = float(p)
    if family == "product":
        if p < 1:
            raise GeometryError("product family needs p >= 1")
        raw = [np.array([0.0, 0.0, 1.0])]
        if p > 2:
            root = p**1.5 / math.sqrt(p - 2.0)
            raw.append(np.array([1.0, 0.0, 0.5 * (root - p)]))
            raw.append(np.array([-1.0, 0.0, 0.5 * (root + p)]))
        P = product_polytope(p)
    elif family == "blowup":
        if not 0 < p < 1:
            raise GeometryError("blow-up family needs 0 < p < 1")
        s = math.sqrt(1.0 - p)
        raw = [np.array([1.0, 0.0, p * (1.0 - s) / (2.0 * s + p - 2.0)])]
        if 8.0 / 9.0 < p < 1.0:
            q = math.sqrt(9.0 * p * p - 8.0 * p)
            for sg in (1.0, -1.0):
                raw.append(np.array([-1.0, 0.0, p * (3.0 * p + sg * q) / (2.0 * (p + sg * q))]))
        alpha, _ = quartic_roots()
        if p < alpha:
            rF = math.sqrt(quartic(p))
            for sg in (1.0, -1.0):
                raw.append(np.array([p * p - 4.0 * p + 2.0 + sg * rF, sg * 2.0 * rF,
                                     p * p + 2.0 * p - 2.0 - sg * rF]))
        P = blowup_polytope(p)
    else:
        raise GeometryError("unknown family %r (expected 'product' or 'blowup')" % family)
    return [normalize_representative(P, x) for x in raw]


def eh_landscape(P: Polytope, grid: int = 200):
    """Rows ``(theta, phi, EH)`` over admissible directions of a grid on the
    sphere ``(K1, K2, a) = (sin t cos f, sin t sin f, cos t)``.  Each
    projective class appears once, at whichever grid sign is admissible;
    inadmissible grid points are skipped."""
    if P.dim != 2:
        raise GeometryError("landscape is defined for 2-dimensional polytopes")
    rows = []
    for i in range(grid):
        theta = math.pi * (i + 0.5) / grid
        for j in range(grid):
            phi = 2.0 * math.pi * j / grid
            x = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                          math.cos(theta)])
            if is_admissible(P, x):
                rows.append((theta, phi, math.exp(log_eh_derivatives(P, x, 0))))
    return rows
