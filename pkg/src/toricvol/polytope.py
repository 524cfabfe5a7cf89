"""Lattice polytopes and Gorenstein moment cones.

All combinatorial decisions (hull, incidence, Delzant and reflexivity tests)
use exact ``Fraction`` arithmetic.  Float arrays for the integration kernels
are derived once and cached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import GeometryError

__all__ = [
    "Facet",
    "Polytope",
    "Simplex",
    "MomentCone",
    "DelzantReport",
    "to_fraction",
    "build_polytope",
    "validate_delzant",
    "validate_reflexive",
    "triangulate",
    "boundary_pieces",
    "build_moment_cone",
    "polytope_from_dict",
    "cone_from_dict",
]


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, float or ``"p/q"`` string."""
    if isinstance(value, bool):
        raise GeometryError("boolean is not a number: %r" % (value,))
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise GeometryError("non-finite coordinate %r" % value)
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GeometryError("cannot parse rational %r" % value) from exc
    raise GeometryError("unsupported number type %r" % (value,))


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    # fraction-exact Gaussian elimination
    a = [list(map(Fraction, r)) for r in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for i in range(col + 1, n):
            f = a[i][col] / a[col][col]
            if f:
                for j in range(col, n):
                    a[i][j] -= f * a[col][j]
    return det


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    a = [list(map(Fraction, r)) for r in rows]
    if not a:
        return 0
    n_cols = len(a[0])
    rank = 0
    for col in range(n_cols):
        piv = next((i for i in range(rank, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][col] != 0:
                f = a[i][col] / a[rank][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def _affine_rank(points) -> int:
    points = list(points)
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return _rank([[x - y for x, y in zip(p, p0)] for p in points[1:]])


def _primitive(vec: Sequence[Fraction]) -> tuple[int, ...]:
    lcm = 1
    for x in vec:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return tuple(x // g for x in ints)


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: Fraction

    def value(self, point) -> Fraction:
        return sum((u * y for u, y in zip(self.normal, point)), Fraction(0)) + self.offset


@dataclass(frozen=True)
class Simplex:
    """A simplex with a measure: Lebesgue volume for interior pieces, the
    lattice boundary measure for facet pieces."""

    dim: int
    vertices: tuple[tuple[Fraction, ...], ...]
    weight: Fraction

    @property
    def float_vertices(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices])


@dataclass(frozen=True)
class Polytope:
    dim: int
    vertices: tuple[tuple[Fraction, ...], ...]
    facets: tuple[Facet, ...]
    incidence: tuple[tuple[int, ...], ...]
    name: str | None = None

    @cached_property
    def float_vertices(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices])

    @cached_property
    def interior_simplices(self) -> tuple[Simplex, ...]:
        return tuple(triangulate(self))

    @cached_property
    def boundary_simplices(self) -> tuple[Simplex, ...]:
        return tuple(boundary_pieces(self))

    @cached_property
    def interior_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _pack(self.interior_simplices)

    @cached_property
    def boundary_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _pack(self.boundary_simplices)

    @cached_property
    def volume(self) -> Fraction:
        return sum((s.weight for s in self.interior_simplices), Fraction(0))

    @cached_property
    def boundary_measure(self) -> Fraction:
        return sum((s.weight for s in self.boundary_simplices), Fraction(0))

    def contains_origin_strictly(self) -> bool:
        return all(f.offset > 0 for f in self.facets)

    def to_dict(self) -> dict:
        out = {
            "dim": self.dim,
            "vertices": [[str(x) for x in v] for v in self.vertices],
            "facets": [
                {"normal": list(f.normal), "offset": str(f.offset)} for f in self.facets
            ],
            "incidence": [list(i) for i in self.incidence],
        }
        if self.name is not None:
            out["name"] = self.name
        return out

    def transformed(self, matrix, translation=None, name=None) -> "Polytope":
        """Image under ``y -> A y + t`` for an integer matrix ``A`` with
        nonzero determinant."""
        A = [[to_fraction(x) for x in row] for row in matrix]
        t = [to_fraction(x) for x in (translation or [0] * self.dim)]
        verts = [
            tuple(sum((A[i][j] * v[j] for j in range(self.dim)), Fraction(0)) + t[i]
                  for i in range(self.dim))
            for v in self.vertices
        ]
        if self.dim == 2:
            return build_polytope(2, verts, name=name)
        # inward normals transform by the inverse transpose
        Ainv = _inverse(A)
        facets = []
        for f in self.facets:
            u = [sum((f.normal[i] * Ainv[i][j] for i in range(self.dim)), Fraction(0))
                 for j in range(self.dim)]
            prim = _primitive(u)
            scale = next(Fraction(p) / x for p, x in zip(prim, u) if x != 0)
            offset = scale * (f.offset - sum((ui * ti for ui, ti in zip(u, t)), Fraction(0)))
            facets.append({"normal": list(prim), "offset": offset})
        return build_polytope(self.dim, verts, facets, name=name)


def _inverse(A):
    n = len(A)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _pack(simplices) -> tuple[np.ndarray, np.ndarray]:
    verts = np.array([s.float_vertices for s in simplices], dtype=float)
    weights = np.array([float(s.weight) for s in simplices])
    return np.ascontiguousarray(verts), weights


def _hull_2d(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        raise GeometryError("polygon needs at least three distinct vertices")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise GeometryError("vertices are collinear; polygon is not full-dimensional")
    return hull


def _facets_from_hull(hull):
    facets = []
    n = len(hull)
    for i in range(n):
        p, q = hull[i], hull[(i + 1) % n]
        # counter-clockwise boundary: inward normal is the left normal
        normal = _primitive((-(q[1] - p[1]), q[0] - p[0]))
        offset = -(normal[0] * p[0] + normal[1] * p[1])
        facets.append(Facet(normal, Fraction(offset)))
    return facets


def _parse_facet(i, spec, dim) -> Facet:
    if isinstance(spec, Facet):
        normal, offset = spec.normal, spec.offset
    else:
        try:
            normal, offset = spec["normal"], spec["offset"]
        except (KeyError, TypeError) as exc:
            raise GeometryError("facets[%d]: expected keys 'normal' and 'offset'" % i) from exc
    if len(normal) != dim:
        raise GeometryError("facets[%d].normal: expected %d entries" % (i, dim))
    fr = [to_fraction(x) for x in normal]
    if any(x.denominator != 1 for x in fr):
        raise GeometryError("facets[%d].normal: entries must be integers" % i)
    ints = tuple(int(x) for x in fr)
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    if g == 0:
        raise GeometryError("facets[%d].normal: zero vector" % i)
    if g != 1:
        raise GeometryError("facets[%d].normal: %r is not primitive (gcd %d)" % (i, list(ints), g))
    return Facet(ints, to_fraction(offset))


def build_polytope(dim, vertices, facets=None, incidence=None, name=None) -> Polytope:
    """Build a validated polytope.

    In dimension 1 and 2 the facets may be omitted and are computed from the
    convex hull; in higher dimension both vertices and facets are required.
    Vertices are kept in hull order (counter-clockwise) when the hull is
    computed, otherwise in the given order.
    """
    if not isinstance(dim, int) or dim < 1:
        raise GeometryError("dim must be a positive integer, got %r" % (dim,))
    verts = []
    for i, v in enumerate(vertices):
        if len(v) != dim:
            raise GeometryError("vertices[%d]: expected %d coordinates" % (i, dim))
        verts.append(tuple(to_fraction(x) for x in v))
    if facets is None:
        if dim == 1:
            lo, hi = min(verts), max(verts)
            if lo == hi:
                raise GeometryError("segment is degenerate")
            verts = [lo, hi]
            facet_list = [Facet((1,), -lo[0]), Facet((-1,), hi[0])]
        elif dim == 2:
            verts = _hull_2d(verts)
            facet_list = _facets_from_hull(verts)
        else:
            raise GeometryError("dim >= 3 requires explicit facets and incidence")
    else:
        facet_list = [_parse_facet(i, f, dim) for i, f in enumerate(facets)]

    if len(set(verts)) != len(verts):
        raise GeometryError("duplicate vertices")
    if _affine_rank(verts) != dim:
        raise GeometryError("vertices do not affinely span R^%d (lower-dimensional input)" % dim)
    for vi, v in enumerate(verts):
        for fi, f in enumerate(facet_list):
            if f.value(v) < 0:
                raise GeometryError("vertices[%d] violates facets[%d]" % (vi, fi))
    computed = tuple(
        tuple(vi for vi, v in enumerate(verts) if f.value(v) == 0) for f in facet_list
    )
    if incidence is not None:
        given = tuple(tuple(sorted(int(x) for x in row)) for row in incidence)
        if given != computed:
            raise GeometryError("incidence does not match facet saturation: %r" % (computed,))
    for fi, inc in enumerate(computed):
        if _affine_rank([verts[i] for i in inc]) != dim - 1:
            raise GeometryError("facets[%d] does not support an (m-1)-dimensional face" % fi)
    for vi in range(len(verts)):
        normals = [facet_list[fi].normal for fi, inc in enumerate(computed) if vi in inc]
        if _rank(normals) < dim:
            raise GeometryError(
                "vertices[%d] is not a vertex of the facet description (unbounded or inconsistent input)"
                % vi
            )
    return Polytope(dim, tuple(verts), tuple(facet_list), computed, name)


@dataclass(frozen=True)
class DelzantReport:
    delzant: bool
    offending_vertices: tuple[int, ...]
    determinants: tuple[int | None, ...] = field(default=())


def validate_delzant(P: Polytope) -> DelzantReport:
    """Per-vertex unimodularity of the saturating facet normals.

    A vertex meeting more than ``dim`` facets is reported as a failure with
    determinant ``None``.
    """
    bad, dets = [], []
    for vi in range(len(P.vertices)):
        normals = [f.normal for f, inc in zip(P.facets, P.incidence) if vi in inc]
        if len(normals) != P.dim:
            bad.append(vi)
            dets.append(None)
            continue
        d = int(_det(normals))
        dets.append(d)
        if abs(d) != 1:
            bad.append(vi)
    return DelzantReport(not bad, tuple(bad), tuple(dets))


def validate_reflexive(P: Polytope) -> bool:
    if any(x.denominator != 1 for v in P.vertices for x in v):
        return False
    return all(f.offset == 1 for f in P.facets)


def _lebesgue(points) -> Fraction:
    p0 = points[0]
    rows = [[x - y for x, y in zip(p, p0)] for p in points[1:]]
    return abs(_det(rows)) / math.factorial(len(rows))


def _centroid(points):
    n = len(points)
    return tuple(sum(c, Fraction(0)) / n for c in zip(*points))


def _triangulate_face(P: Polytope, vids: frozenset, d: int, exclude: frozenset):
    """Triangulate the face spanned by ``vids`` (affine dimension ``d``) as a
    list of point tuples.  ``exclude`` holds facets already containing it."""
    pts = [P.vertices[i] for i in sorted(vids)]
    if len(pts) == d + 1:
        return [tuple(pts)]
    if d == 1:
        # segment with interior collinear vertices cannot occur for a face
        return [tuple(pts[:2])]
    apex = _centroid(pts)
    out = []
    seen = set()
    for fi, inc in enumerate(P.incidence):
        if fi in exclude:
            continue
        sub = vids & frozenset(inc)
        if sub in seen or len(sub) < d:
            continue
        if _affine_rank([P.vertices[i] for i in sub]) != d - 1:
            continue
        seen.add(sub)
        for simplex in _triangulate_face(P, sub, d - 1, exclude | {fi}):
            out.append((apex,) + simplex)
    return out


def triangulate(P: Polytope) -> list[Simplex]:
    """Centroid fan over a recursive triangulation of the facets; zero-volume
    pieces are dropped and the weights sum to the volume."""
    pieces = _triangulate_face(P, frozenset(range(len(P.vertices))), P.dim, frozenset())
    out = []
    for pts in pieces:
        w = _lebesgue(pts)
        if w > 0:
            out.append(Simplex(P.dim, pts, w))
    return out


def boundary_pieces(P: Polytope) -> list[Simplex]:
    """Triangulated boundary carrying the lattice measure: Euclidean volume
    over the Euclidean length of the primitive facet normal."""
    m = P.dim
    out = []
    for fi, (f, inc) in enumerate(zip(P.facets, P.incidence)):
        norm2 = sum(u * u for u in f.normal)
        if m == 1:
            pieces = [(P.vertices[inc[0]],)]
        else:
            pieces = _triangulate_face(P, frozenset(inc), m - 1, frozenset({fi}))
        for pts in pieces:
            p0 = pts[0]
            rows = [list(map(Fraction, f.normal))] + [
                [x - y for x, y in zip(p, p0)] for p in pts[1:]
            ]
            w = abs(_det(rows)) / (math.factorial(m - 1) * norm2)
            if w > 0:
                out.append(Simplex(m - 1, tuple(pts), w))
    return out


@dataclass(frozen=True)
class MomentCone:
    """Polyhedral cone data for a Gorenstein toric cone.

    ``fan_rays`` generate the cone in which Reeb fields live; ``dual_rays``
    generate the moment cone ``{y : <y, v> >= 0}``, which is tiled by the
    simplicial cones in ``decomposition``.
    """

    dim: int
    fan_rays: tuple[tuple[int, ...], ...]
    dual_rays: tuple[tuple[int, ...], ...]
    decomposition: tuple[tuple[int, ...], ...]
    determinants: tuple[int, ...]
    name: str | None = None

    @cached_property
    def dual_array(self) -> np.ndarray:
        return np.array(self.dual_rays, dtype=float)

    @cached_property
    def fan_array(self) -> np.ndarray:
        return np.array(self.fan_rays, dtype=float)

    def with_decomposition(self, decomposition) -> "MomentCone":
        return build_moment_cone(self.fan_rays, self.dual_rays, decomposition, self.name)

    def fan_decomposition(self, start: int) -> tuple[tuple[int, ...], ...]:
        """Fan triangulation of a 3-dimensional moment cone from dual ray
        ``start``."""
        if self.dim != 3:
            raise GeometryError("fan decomposition is automatic only in dimension 3")
        n = len(self.dual_rays)
        order = [(start + i) % n for i in range(n)]
        return tuple((order[0], order[i], order[i + 1]) for i in range(1, n - 1))

    def to_dict(self) -> dict:
        out = {
            "dim": self.dim,
            "fan_rays": [list(v) for v in self.fan_rays],
            "dual_rays": [list(u) for u in self.dual_rays],
            "decomposition": [list(s) for s in self.decomposition],
        }
        if self.name is not None:
            out["name"] = self.name
        return out


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def build_moment_cone(fan_rays, dual_rays=None, decomposition=None, name=None) -> MomentCone:
    """Validate fan rays ``(1, w_a)`` and compute the moment cone.

    In dimension 3 the rays must list a strictly convex lattice polygon in
    cyclic order; dual rays and the decomposition are then computed.  In
    other dimensions both must be supplied.
    """
    rays = []
    for i, v in enumerate(fan_rays):
        fr = [to_fraction(x) for x in v]
        if any(x.denominator != 1 for x in fr):
            raise GeometryError("fan_rays[%d]: entries must be integers" % i)
        ints = tuple(int(x) for x in fr)
        if ints[0] != 1:
            raise GeometryError(
                "fan_rays[%d]: first coordinate must be 1 (Gorenstein normalization), got %d"
                % (i, ints[0])
            )
        rays.append(ints)
    if not rays:
        raise GeometryError("no fan rays")
    n = len(rays[0])
    if any(len(v) != n for v in rays):
        raise GeometryError("fan rays have inconsistent dimension")
    if len(set(rays)) != len(rays):
        raise GeometryError("duplicate fan rays")
    if _rank(rays) != n:
        raise GeometryError("fan rays do not span a full-dimensional cone")

    if dual_rays is None:
        if n != 3:
            raise GeometryError("dual rays must be supplied for cones of dimension %d" % n)
        k = len(rays)
        w = [v[1:] for v in rays]
        turns = []
        for i in range(k):
            p, q, r = w[i - 1], w[i], w[(i + 1) % k]
            turns.append((q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]))
        if any(t == 0 for t in turns) or not (all(t > 0 for t in turns) or all(t < 0 for t in turns)):
            raise GeometryError("toric diagram is not a strictly convex polygon in cyclic order")
        # a convex polygon winds once: total turning must match one orientation
        winding = 0.0
        for i in range(k):
            a = (w[(i + 1) % k][0] - w[i][0], w[(i + 1) % k][1] - w[i][1])
            b = (w[(i + 2) % k][0] - w[(i + 1) % k][0], w[(i + 2) % k][1] - w[(i + 1) % k][1])
            winding += math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
        if abs(abs(winding) - 2 * math.pi) > 1e-6:
            raise GeometryError("toric diagram is self-intersecting (rays out of cyclic order)")
        duals = []
        for i in range(k):
            u = _primitive([Fraction(x) for x in _cross(rays[i], rays[(i + 1) % k])])
            if any(sum(a * b for a, b in zip(u, v)) < 0 for v in rays):
                u = tuple(-x for x in u)
            duals.append(u)
        dual_list = duals
    else:
        dual_list = []
        for i, u in enumerate(dual_rays):
            fr = [to_fraction(x) for x in u]
            if len(fr) != n or any(x.denominator != 1 for x in fr):
                raise GeometryError("dual_rays[%d]: expected %d integers" % (i, n))
            dual_list.append(tuple(int(x) for x in fr))
    for i, u in enumerate(dual_list):
        for j, v in enumerate(rays):
            if sum(a * b for a, b in zip(u, v)) < 0:
                raise GeometryError("dual_rays[%d] pairs negatively with fan_rays[%d]" % (i, j))
        if sum(1 for v in rays if sum(a * b for a, b in zip(u, v)) == 0) < n - 1:
            raise GeometryError("dual_rays[%d] is not a facet normal of the fan cone" % i)

    if decomposition is None:
        if n != 3:
            raise GeometryError("decomposition must be supplied for cones of dimension %d" % n)
        k = len(dual_list)
        decomposition = tuple((0, i, i + 1) for i in range(1, k - 1))
    decomp, dets = [], []
    for si, s in enumerate(decomposition):
        idx = tuple(int(i) for i in s)
        if len(idx) != n or any(not 0 <= i < len(dual_list) for i in idx):
            raise GeometryError("decomposition[%d]: expected %d dual-ray indices" % (si, n))
        d = int(_det([dual_list[i] for i in idx]))
        if d == 0:
            raise GeometryError("decomposition[%d] is degenerate" % si)
        decomp.append(idx)
        dets.append(abs(d))
    return MomentCone(n, tuple(rays), tuple(dual_list), tuple(decomp), tuple(dets), name)


def polytope_from_dict(data: dict) -> Polytope:
    """Parse the polytope JSON schema (rationals as numbers or ``"p/q"``)."""
    if not isinstance(data, dict):
        raise GeometryError("polytope document must be a JSON object")
    if "dim" not in data or "vertices" not in data:
        raise GeometryError("polytope document needs 'dim' and 'vertices'")
    return build_polytope(
        data["dim"],
        data["vertices"],
        data.get("facets"),
        data.get("incidence"),
        data.get("name"),
    )


def cone_from_dict(data: dict) -> MomentCone:
    if not isinstance(data, dict):
        raise GeometryError("cone document must be a JSON object")
    if "fan_rays" not in data:
        raise GeometryError("cone document needs 'fan_rays'")
    cone = build_moment_cone(
        data["fan_rays"], data.get("dual_rays"), data.get("decomposition"), data.get("name")
    )
    if "dim" in data and data["dim"] != cone.dim:
        raise GeometryError("dim: declared %r but fan rays have dimension %d" % (data["dim"], cone.dim))
    return cone
