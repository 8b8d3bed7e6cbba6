"""Lattice polytopes, simplicial fans and support functions.

Conventions: support functions are minima, ``phi_P(m) = min_{n in P} <m, n>``,
so a polytope is cut out by ``<u, n> >= phi(u)`` over the rays ``u`` of a fan
refining its normal fan, and nef means ``phi`` is a minimum of linear
functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .errors import GeometryError
from .lattice import det, dot, in_span, integer_scale, is_primitive, nullspace, quotient_map, row_reduce, solve


def _frac(v):
    return tuple(Fraction(x) for x in v)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _minor_gcd(rows):
    k = len(rows)
    n = len(rows[0])
    g = 0
    for cols in combinations(range(n), k):
        g = math.gcd(g, abs(det([[r[c] for c in cols] for r in rows])))
    return g


# ---------------------------------------------------------------- hulls


class Hull:
    """Affine hull, local coordinates and facets of a finite point set."""

    def __init__(self, points):
        pts = sorted(set(_frac(p) for p in points))
        if not pts:
            raise GeometryError("empty point set")
        self.points = pts
        self.origin = pts[0]
        diffs = [_sub(p, self.origin) for p in pts[1:]]
        basis, pivots = row_reduce(diffs) if diffs else ([], [])
        self.basis = [tuple(r) for r in basis]
        self.pivots = pivots
        self.dim = len(basis)

    def local(self, p):
        d = _sub(_frac(p), self.origin)
        return tuple(d[c] for c in self.pivots)

    def contains_affinely(self, p):
        d = _sub(_frac(p), self.origin)
        return in_span(self.basis, d) if self.basis else all(x == 0 for x in d)

    @cached_property
    def facets(self):
        """List of (local normal, offset, point set) with ``normal . x >= offset`` on the hull."""
        k = self.dim
        if k == 0:
            return []
        loc = {p: self.local(p) for p in self.points}
        seen = {}
        pts = self.points
        for subset in combinations(pts, k):
            base = loc[subset[0]]
            rows = [_sub(loc[p], base) for p in subset[1:]]
            ns = nullspace(rows, k) if rows else [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]
            if len(ns) != 1:
                continue
            normal = ns[0]
            off = dot(normal, base)
            vals = [dot(normal, loc[p]) - off for p in pts]
            if all(v >= 0 for v in vals):
                pass
            elif all(v <= 0 for v in vals):
                normal = tuple(-x for x in normal)
                off = -off
            else:
                continue
            on = frozenset(p for p, v in zip(pts, vals) if v == 0)
            if on not in seen:
                seen[on] = (normal, off, on)
        return list(seen.values())

    @cached_property
    def vertices(self):
        if self.dim == 0:
            return [self.points[0]]
        out = []
        for p in self.points:
            normals = [f[0] for f in self.facets if p in f[2]]
            if normals and len(row_reduce(normals)[1]) == self.dim:
                out.append(p)
        return out


# ---------------------------------------------------------------- polytopes


class LatticePolytope:
    """Convex hull of finitely many (lattice or rational) points.

    Only the extreme points are kept, in sorted order.
    """

    def __init__(self, points, lattice_tag="N"):
        hull = Hull(points)
        self.rank = len(hull.origin)
        self.lattice_tag = lattice_tag
        self._hull = Hull(hull.vertices) if len(hull.vertices) != len(hull.points) else hull
        self.vertices = tuple(self._hull.points)

    def __repr__(self):
        return f"LatticePolytope({[tuple(str(x) for x in v) for v in self.vertices]})"

    def __eq__(self, other):
        return isinstance(other, LatticePolytope) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    @property
    def dim(self):
        return self._hull.dim

    @property
    def hull(self):
        return self._hull

    def is_lattice(self):
        return all(x.denominator == 1 for v in self.vertices for x in v)

    def inequalities(self):
        """Ambient half-spaces ``(m, c)`` with ``<m, n> >= c``; requires full dimension."""
        if self.dim != self.rank:
            raise GeometryError("normal fan requires full dimension")
        out = []
        for normal, off, _ in self._hull.facets:
            # local coordinates are the pivot coordinates shifted by the origin
            m = [Fraction(0)] * self.rank
            for c, x in zip(self._hull.pivots, normal):
                m[c] = x
            m = integer_scale(m)
            out.append((m, min(dot(m, v) for v in self.vertices)))
        return out

    def face_minimizing(self, m):
        vals = [dot(m, v) for v in self.vertices]
        lo = min(vals)
        return LatticePolytope([v for v, x in zip(self.vertices, vals) if x == lo], self.lattice_tag)

    def support(self, m):
        return min(dot(m, v) for v in self.vertices)

    def translate(self, n):
        return LatticePolytope([tuple(a + b for a, b in zip(v, n)) for v in self.vertices], self.lattice_tag)

    def minkowski_sum(self, other):
        return LatticePolytope([tuple(a + b for a, b in zip(u, v)) for u in self.vertices for v in other.vertices],
                               self.lattice_tag)

    def facets(self):
        """Facets as polytopes (any dimension, inside the affine hull)."""
        return [LatticePolytope(sorted(f[2]), self.lattice_tag) for f in self._hull.facets]

    def simplices(self):
        """Vertex tuples of a pulling triangulation."""
        if self.dim == 0:
            return [tuple(self.vertices)]
        v0 = self.vertices[0]
        out = []
        for f in self.facets():
            if v0 in f.vertices:
                continue
            for s in f.simplices():
                out.append((v0,) + s)
        return out

    def contains(self, p):
        p = _frac(p)
        if not self._hull.contains_affinely(p):
            return False
        if self.dim == 0:
            return p == self.vertices[0]
        loc = self._hull.local(p)
        return all(dot(n, loc) >= off for n, off, _ in self._hull.facets)

    def interior_contains(self, p):
        p = _frac(p)
        if not self._hull.contains_affinely(p):
            return False
        if self.dim == 0:
            return p == self.vertices[0]
        loc = self._hull.local(p)
        return all(dot(n, loc) > off for n, off, _ in self._hull.facets)

    def lattice_points(self):
        lo = [math.floor(min(v[i] for v in self.vertices)) for i in range(self.rank)]
        hi = [math.ceil(max(v[i] for v in self.vertices)) for i in range(self.rank)]
        pts = [()]
        for a, b in zip(lo, hi):
            pts = [p + (x,) for p in pts for x in range(a, b + 1)]
        return [p for p in pts if self.contains(p)]


def lattice_volume(P: LatticePolytope) -> Fraction:
    """Euclidean volume in the saturated lattice of the affine span.

    A primitive segment has volume 1, a unimodular triangle 1/2, and a point 1.
    """
    k = P.dim
    if k == 0:
        return Fraction(1)
    den = math.lcm(*(x.denominator for v in P.vertices for x in v))
    total = 0
    for s in P.simplices():
        rows = [[int((x - y) * den) for x, y in zip(v, s[0])] for v in s[1:]]
        total += _minor_gcd(rows)
    return Fraction(total, math.factorial(k) * den ** k)


# ---------------------------------------------------------------- fans


@dataclass(frozen=True)
class Cone:
    rays: tuple
    dim: int

    def __post_init__(self):
        for r in self.rays:
            if not is_primitive(r):
                raise GeometryError("cone rays must be primitive", ray=list(r))


class Fan:
    """Fan given by primitive rays and maximal cones (sets of ray indices).

    Simplicial fans get their full face lattice; non-simplicial ones keep
    only the maximal cones.
    """

    def __init__(self, rays, maximal, lattice_tag="M"):
        self.rays = tuple(tuple(int(x) for x in r) for r in rays)
        if not self.rays:
            raise GeometryError("fan without rays")
        self.rank = len(self.rays[0])
        self.lattice_tag = lattice_tag
        for r in self.rays:
            if not is_primitive(r):
                raise GeometryError("fan rays must be primitive", ray=list(r))
        self.maximal = tuple(sorted((frozenset(c) for c in maximal), key=lambda c: tuple(sorted(c))))
        self.ray_index = {r: i for i, r in enumerate(self.rays)}
        self.simplicial = all(rank_of([self.rays[i] for i in c]) == len(c) for c in self.maximal)
        self._by_dim = None

    def __repr__(self):
        return f"Fan(rank={self.rank}, rays={len(self.rays)}, maximal={len(self.maximal)})"

    # cones -------------------------------------------------------------
    def _build(self):
        if not self.simplicial:
            raise GeometryError("face lattice needs a simplicial fan")
        by_dim = {k: set() for k in range(self.rank + 1)}
        for c in self.maximal:
            s = sorted(c)
            for k in range(len(s) + 1):
                for sub in combinations(s, k):
                    by_dim[k].add(frozenset(sub))
        self._by_dim = {k: sorted(v, key=lambda c: tuple(sorted(c))) for k, v in by_dim.items()}
        self._cone_set = set().union(*by_dim.values())
        up = {c: [] for c in self._cone_set}
        for k in range(self.rank):
            for c in self._by_dim[k + 1]:
                for i in c:
                    up[c - {i}].append(c)
        self._up = {c: sorted(v, key=lambda x: tuple(sorted(x))) for c, v in up.items()}

    def cones(self, dim):
        if self._by_dim is None:
            self._build()
        return self._by_dim.get(dim, [])

    def all_cones(self):
        return [c for k in range(self.rank + 1) for c in self.cones(k)]

    def has_cone(self, cone):
        if self._by_dim is None:
            self._build()
        return frozenset(cone) in self._cone_set

    def cofaces(self, cone):
        """Cones of dimension one more that contain ``cone``."""
        if self._by_dim is None:
            self._build()
        return self._up.get(frozenset(cone), [])

    def supercones(self, cone, dim):
        cone = frozenset(cone)
        return [c for c in self.cones(dim) if cone <= c]

    def ray_vectors(self, cone):
        return [self.rays[i] for i in sorted(cone)]

    def cone(self, idx):
        idx = frozenset(idx)
        return Cone(tuple(self.rays[i] for i in sorted(idx)), len(idx))

    def cone_of_vectors(self, vectors):
        return frozenset(self.ray_index[tuple(v)] for v in vectors)

    # flags -------------------------------------------------------------
    @cached_property
    def pure(self):
        return all(len(c) == self.rank for c in self.maximal)

    @cached_property
    def unimodular(self):
        return self.simplicial and self.pure and all(abs(det(self.ray_vectors(c))) == 1 for c in self.maximal)

    @cached_property
    def complete(self):
        if not (self.simplicial and self.pure):
            return self._complete_by_sampling()
        walls = {}
        for c in self.maximal:
            for i in c:
                walls.setdefault(c - {i}, []).append((c, i))
        for wall, inc in walls.items():
            if len(inc) != 2:
                return False
            (c1, i1), (c2, i2) = inc
            wv = self.ray_vectors(wall)
            # opposite sides of the wall hyperplane
            normal = nullspace([list(v) for v in wv], self.rank)[0] if wv else None
            if normal is None:
                s1, s2 = self.rays[i1][0], self.rays[i2][0]
            else:
                s1, s2 = dot(normal, self.rays[i1]), dot(normal, self.rays[i2])
            if s1 * s2 >= 0:
                return False
        return self._complete_by_sampling()

    def _complete_by_sampling(self):
        probe = tuple(Fraction(7 ** (i + 1) + 3 * i, 13 + 2 * i) * (-1) ** i for i in range(self.rank))
        hits = 0
        for c in self.maximal:
            vecs = self.ray_vectors(c)
            if len(vecs) != self.rank:
                continue
            x = solve(vecs, probe)
            if x is not None and all(t >= 0 for t in x):
                hits += 1
        return hits == 1

    def maximal_containing(self, point):
        """A maximal cone containing ``point`` (simplicial fans)."""
        for c in self.maximal:
            x = solve(self.ray_vectors(c), point)
            if x is not None and all(t >= 0 for t in x):
                return c
        return None


def rank_of(vectors):
    return len(row_reduce([list(v) for v in vectors])[1]) if vectors else 0


# ---------------------------------------------------------------- support functions


@dataclass(frozen=True)
class SupportFunction:
    """Piecewise-linear function on a simplicial fan, stored by its ray values."""

    fan: Fan
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if len(self.values) != len(self.fan.rays):
            raise GeometryError("one support value per ray expected")

    def linear_on(self, cone):
        """The point n with <u, n> = phi(u) on the rays of a maximal cone."""
        idx = sorted(cone)
        n = solve_dual([self.fan.rays[i] for i in idx], [self.values[i] for i in idx])
        if n is None:
            raise GeometryError("maximal cone is not full-dimensional")
        return n

    def __call__(self, m):
        c = self.fan.maximal_containing(m)
        return dot(self.linear_on(c), m)

    def __add__(self, other):
        return SupportFunction(self.fan, tuple(a + b for a, b in zip(self.values, other.values)))


def solve_dual(rows, rhs):
    """Solve <rows[i], n> = rhs[i] for n."""
    n = len(rows)
    cols = [tuple(rows[i][j] for i in range(n)) for j in range(len(rows[0]))]
    return None if len(cols) != n else _solve_rows(rows, rhs)


def _solve_rows(rows, rhs):
    aug = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    red, piv = row_reduce(aug)
    n = len(rows[0])
    if piv != list(range(n)):
        return None
    return tuple(red[i][n] for i in range(n))


def convexity(phi: SupportFunction):
    """(nef, ample) by checking every wall of a complete simplicial fan."""
    fan = phi.fan
    nef = ample = True
    for c in fan.maximal:
        n = phi.linear_on(c)
        for other in fan.maximal:
            if len(c & other) != fan.rank - 1:
                continue
            (j,) = other - c
            gap = dot(fan.rays[j], n) - phi.values[j]
            if gap < 0:
                nef = ample = False
            elif gap == 0:
                ample = False
    return nef, ample


def is_nef(phi):
    return convexity(phi)[0]


def is_ample(phi):
    return convexity(phi)[1]


def polytope_from_support(phi: SupportFunction) -> LatticePolytope:
    """{n : <u, n> >= phi(u) for every ray u}, for nef ``phi``."""
    if not is_nef(phi):
        raise GeometryError("support function is not convex")
    pts = {phi.linear_on(c) for c in phi.fan.maximal}
    return LatticePolytope(sorted(pts), "N")


def support_of(P: LatticePolytope, fan: Fan) -> SupportFunction:
    return SupportFunction(fan, tuple(P.support(r) for r in fan.rays))


def normal_fan(P: LatticePolytope) -> Fan:
    """Inner normal fan of a full-dimensional polytope."""
    if P.dim != P.rank:
        raise GeometryError("normal fan requires full dimension")
    ineq = P.inequalities()
    rays = [m for m, _ in ineq]
    maximal = []
    for v in P.vertices:
        maximal.append([i for i, (m, c) in enumerate(ineq) if dot(m, v) == c])
    return Fan(rays, maximal, "M")


def refines(fan: Fan, P: LatticePolytope) -> bool:
    """Whether every maximal cone of ``fan`` lies in one normal cone of ``P``."""
    for c in fan.maximal:
        m = [sum(fan.rays[i][k] for i in c) for k in range(fan.rank)]
        if len(P.face_minimizing(m).vertices) != 1:
            return False
        # the vertex must minimise each ray separately as well
        v = P.face_minimizing(m).vertices[0]
        if any(dot(fan.rays[i], v) != P.support(fan.rays[i]) for i in c):
            return False
    return True


def face_for_cone(P: LatticePolytope, cone, fan: Fan, check=True) -> LatticePolytope:
    """Face of P on which every point of the cone attains the minimum."""
    if check and not refines(fan, P):
        raise GeometryError("fan does not refine normal fan")
    cone = frozenset(cone)
    m = [sum(fan.rays[i][k] for i in cone) for k in range(fan.rank)]
    return P.face_minimizing(m)


# ---------------------------------------------------------------- quotients


@dataclass
class QuotientFan:
    fan: Fan
    image: dict = field(default_factory=dict)  # cone of the source fan -> cone of the quotient
    project: object = None


def quotient_fan(fan: Fan, edge_ray, star_cells=None) -> QuotientFan:
    """Fan in Z^n / Z*edge_ray formed by the images of the cones containing the ray."""
    edge_ray = tuple(edge_ray)
    if edge_ray not in fan.ray_index:
        raise GeometryError("quotient ray is not a ray of the fan", ray=list(edge_ray))
    e = fan.ray_index[edge_ray]
    qmap = quotient_map(edge_ray)
    if star_cells is None:
        star_cells = [c for c in fan.maximal if e in c]
    star_cells = [frozenset(c) for c in star_cells]
    for c in star_cells:
        if e not in c:
            raise GeometryError("listed cone does not contain the quotient ray", cone=sorted(c))
    ray_img = {}
    rays = []
    for c in star_cells:
        for i in sorted(c):
            if i == e or i in ray_img:
                continue
            v = integer_scale(qmap(fan.rays[i]))
            if v not in rays:
                rays.append(v)
            ray_img[i] = rays.index(v)
    order = sorted(range(len(rays)), key=lambda i: rays[i])
    remap = {old: new for new, old in enumerate(order)}
    rays = [rays[i] for i in order]
    ray_img = {k: remap[v] for k, v in ray_img.items()}
    maximal = [frozenset(ray_img[i] for i in c if i != e) for c in star_cells]
    qf = Fan(rays, maximal, fan.lattice_tag)
    image = {}
    for c in star_cells:
        s = sorted(c - {e})
        for k in range(len(s) + 1):
            for sub in combinations(s, k):
                image[frozenset(sub) | {e}] = frozenset(ray_img[i] for i in sub)
    return QuotientFan(qf, image, qmap)
