"""Problem instances, regular unimodular triangulations and tropical cycles.

An instance is a lattice point configuration ``A`` filling its convex hull,
heights ``lam`` and leading coefficients ``c``.  The lower hull of the lifted
points gives the triangulation; each interior point ``w`` has a star fan
``Sigma_w`` whose rays are the primitive edge directions ``m - w``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .errors import GeometryError, NoInteriorPoint, NonConvexLambda, NonUnimodular, NotATriangulation, SchemaError
from .lattice import MultiVector, contract_volume, det, solve, wedge_vectors
from .minkowski import MinkowskiWeight, balance_check
from .polytope import Fan, LatticePolytope, lattice_volume


@dataclass(frozen=True)
class PolarCoefficient:
    """Complex number |c| * exp(i pi t) with rational modulus and rational t."""

    modulus: Fraction
    arg_times_pi: Fraction

    def __complex__(self):
        return cmath.rect(float(self.modulus), math.pi * float(self.arg_times_pi))

    def is_zero(self):
        return self.modulus == 0


def _coefficient(c):
    if isinstance(c, PolarCoefficient):
        return c
    a, b = c
    return (Fraction(a), Fraction(b))


def _is_zero_coefficient(c):
    return c.is_zero() if isinstance(c, PolarCoefficient) else c == (0, 0)


@dataclass(frozen=True)
class Triangulation:
    """Maximal simplices as sorted tuples of point indices."""

    simplices: tuple

    @cached_property
    def faces(self):
        out = set()
        for s in self.simplices:
            for k in range(1, len(s) + 1):
                out.update(combinations(s, k))
        return frozenset(out)

    def contains_cell(self, indices):
        return tuple(sorted(set(indices))) in self.faces

    def to_json(self):
        return [list(s) for s in self.simplices]


@dataclass
class TropicalInput:
    """Lattice points, heights and leading coefficients.

    ``coeffs`` holds complex numbers as (re, im) pairs of Fractions;
    entries may also be PolarCoefficient; ``branch`` optionally fixes
    arg(-c_m / c_w) / pi per (w, m) index pair.
    """

    points: tuple
    lam: tuple
    coeffs: tuple = ()
    triangulation: tuple | None = None
    branch: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.points = tuple(tuple(int(x) for x in p) for p in self.points)
        self.lam = tuple(Fraction(x) for x in self.lam)
        if not self.coeffs:
            self.coeffs = tuple((Fraction(1), Fraction(0)) for _ in self.points)
        self.coeffs = tuple(_coefficient(c) for c in self.coeffs)
        if len(self.lam) != len(self.points) or len(self.coeffs) != len(self.points):
            raise SchemaError("one height and one coefficient per point expected")
        if len(set(self.points)) != len(self.points):
            raise SchemaError("repeated lattice point")
        if any(_is_zero_coefficient(c) for c in self.coeffs):
            raise SchemaError("leading coefficients must be nonzero")
        self._fans = {}
        self._tri = None

    @property
    def rank(self):
        return len(self.points[0])

    @property
    def d(self):
        return self.rank - 1

    def index_of(self, p):
        try:
            return self.points.index(tuple(p))
        except ValueError:
            raise GeometryError("point not in the configuration", point=list(p)) from None

    @cached_property
    def newton_polytope(self):
        return LatticePolytope(self.points, "M")

    def complex_coeff(self, i):
        c = self.coeffs[i]
        if isinstance(c, PolarCoefficient):
            return complex(c)
        return complex(float(c[0]), float(c[1]))

    # derived data, computed once -----------------------------------------
    @property
    def tri(self) -> Triangulation:
        if self._tri is None:
            self._tri = validate(self)
        return self._tri

    def fan_at(self, w) -> Fan:
        return fan_at(self, w)


# ---------------------------------------------------------------- validation


def _affine_heights(pts, heights):
    """Affine function h(x) = <g, x> + c through the given lifted points."""
    n = len(pts[0])
    cols = [[Fraction(p[i]) for p in pts] for i in range(n)] + [[Fraction(1)] * len(pts)]
    sol = solve(cols, heights)
    if sol is None:
        return None
    return sol[:n], sol[n]


def _lower_facets(inp: TropicalInput):
    pts = inp.points
    r = inp.rank
    cells = []
    ties = []
    for sub in combinations(range(len(pts)), r + 1):
        fn = _affine_heights([pts[i] for i in sub], [inp.lam[i] for i in sub])
        if fn is None:
            continue
        g, c = fn
        on = []
        below = False
        for j, p in enumerate(pts):
            val = inp.lam[j] - (sum(a * b for a, b in zip(g, p)) + c)
            if val < 0:
                below = True
                break
            if val == 0:
                on.append(j)
        if below:
            continue
        if len(on) > r + 1:
            ties.append(tuple(on))
        else:
            cells.append(tuple(sub))
    return sorted(set(cells)), sorted(set(ties))


def _normalized_volume(pts):
    base = pts[0]
    return abs(det([[a - b for a, b in zip(p, base)] for p in pts[1:]]))


def _check_lattice_points(inp: TropicalInput):
    delta = inp.newton_polytope
    if delta.dim != inp.rank:
        raise GeometryError("Newton polytope must be full-dimensional")
    if len(delta.lattice_points()) != len(inp.points):
        raise SchemaError("points must be all lattice points of their convex hull")


def validate(inp: TropicalInput) -> Triangulation:
    """Regular subdivision of the heights, checked to be a unimodular triangulation.

    With an explicit triangulation the cells are checked for unimodularity,
    for covering the Newton polytope, and for strict convexity of the
    heights across every interior wall.
    """
    _check_lattice_points(inp)
    pts = inp.points
    if inp.triangulation is None:
        cells, ties = _lower_facets(inp)
        if ties:
            raise NotATriangulation("heights induce a non-simplicial cell", cell=list(ties[0]))
    else:
        cells = sorted(tuple(sorted(s)) for s in inp.triangulation)
        for s in cells:
            if len(s) != inp.rank + 1:
                raise NotATriangulation("triangulation cell has the wrong size", cell=list(s))
    for s in cells:
        vol = _normalized_volume([pts[i] for i in s])
        if vol == 0:
            raise NotATriangulation("degenerate cell", cell=list(s))
        if vol != 1:
            raise NonUnimodular("cell is not unimodular", cell=list(s), volume=vol)
    total = lattice_volume(inp.newton_polytope) * math.factorial(inp.rank)
    if total != len(cells):
        raise NotATriangulation("cells do not cover the Newton polytope", cells=len(cells), volume=str(total))
    if inp.triangulation is not None:
        _check_convex(inp, cells)
    return Triangulation(tuple(cells))


def _check_convex(inp: TropicalInput, cells):
    pts = inp.points
    walls = {}
    for s in cells:
        for i in s:
            walls.setdefault(tuple(j for j in s if j != i), []).append((s, i))
    for wall, inc in walls.items():
        if len(inc) == 1:
            continue
        if len(inc) != 2:
            raise NotATriangulation("wall shared by more than two cells", wall=list(wall))
        (s1, i1), (s2, i2) = inc
        g, c = _affine_heights([pts[j] for j in s1], [inp.lam[j] for j in s1])
        pred = sum(a * b for a, b in zip(g, pts[i2])) + c
        if not inp.lam[i2] > pred:
            raise NonConvexLambda("heights are not strictly convex across a wall", wall=list(wall))


def interior_points(inp: TropicalInput):
    delta = inp.newton_polytope
    out = [p for p in inp.points if delta.interior_contains(p)]
    if not out:
        raise NoInteriorPoint("no interior lattice point")
    return out


def has_edge(inp: TropicalInput, w1, w2) -> bool:
    return inp.tri.contains_cell([inp.index_of(w1), inp.index_of(w2)])


def cell_contains_all(inp: TropicalInput, indices) -> bool:
    return inp.tri.contains_cell(indices)


# ---------------------------------------------------------------- star fans


def star_points(inp: TropicalInput, w):
    """Indices of A_w: points joined to w by an edge of the triangulation, in input order."""
    wi = inp.index_of(w)
    out = set()
    for s in inp.tri.simplices:
        if wi in s:
            out.update(j for j in s if j != wi)
    return sorted(out)


def fan_at(inp: TropicalInput, w) -> Fan:
    """Star fan at an interior point; ray i points from w to the i-th element of A_w."""
    w = tuple(w)
    if w in inp._fans:
        return inp._fans[w]
    if w not in interior_points(inp):
        raise GeometryError("point is not an interior lattice point", point=list(w))
    wi = inp.index_of(w)
    aw = star_points(inp, w)
    pos = {j: k for k, j in enumerate(aw)}
    rays = [tuple(a - b for a, b in zip(inp.points[j], w)) for j in aw]
    maximal = [frozenset(pos[j] for j in s if j != wi) for s in inp.tri.simplices if wi in s]
    fan = Fan(rays, maximal, "M")
    fan.point_indices = tuple(aw)
    fan.base_point = w
    if not fan.complete:
        raise GeometryError("star fan is not complete")
    if not fan.unimodular:
        raise NonUnimodular("star fan is not unimodular")
    inp._fans[w] = fan
    return fan


def dual_cell(inp: TropicalInput, w) -> LatticePolytope:
    """Region where the monomial of w attains the tropical minimum."""
    return LatticePolytope(sorted(set(_dual_vertices(inp, w).values())), "N")


def _dual_vertices(inp, w):
    fan = fan_at(inp, w)
    wi = inp.index_of(w)
    out = {}
    for c in fan.maximal:
        rows = [fan.rays[i] for i in sorted(c)]
        rhs = [inp.lam[wi] - inp.lam[fan.point_indices[i]] for i in sorted(c)]
        # <ray, n> = rhs for each ray of the maximal cone
        out[c] = tuple(_solve_rows(rows, rhs))
    return out


def _solve_rows(rows, rhs):
    sol = solve([[rows[i][k] for i in range(len(rows))] for k in range(len(rows[0]))], rhs)
    if sol is None:
        raise GeometryError("singular cone system")
    return sol


def dual_face_points(inp: TropicalInput, w):
    """b_sigma for every cone: average of the vertices of its dual face of the dual cell."""
    fan = fan_at(inp, w)
    verts = _dual_vertices(inp, w)
    out = {}
    for cone in fan.all_cones():
        vs = [verts[c] for c in fan.maximal if cone <= c]
        uniq = sorted(set(vs))
        out[cone] = tuple(sum(v[k] for v in uniq) / len(uniq) for k in range(fan.rank))
    return out


# ---------------------------------------------------------------- flags


@dataclass(frozen=True)
class ConeFlag:
    """Chain of cones sigma_1 < ... < sigma_{q+1}; ``gens`` lists the ray added at each step."""

    cones: tuple
    gens: tuple

    @property
    def q(self):
        return len(self.cones) - 1

    @property
    def top(self):
        return self.cones[-1]

    def key(self):
        return tuple(tuple(sorted(c)) for c in self.cones)

    def swapped(self, i):
        """The flag differing from this one only in the cone at position i (0-based, i < q)."""
        gens = list(self.gens)
        gens[i], gens[i + 1] = gens[i + 1], gens[i]
        return flag_from_gens(gens)


def flag_from_gens(gens):
    gens = tuple(gens)
    cones = tuple(frozenset(gens[: k + 1]) for k in range(len(gens)))
    return ConeFlag(cones, gens)


def fan_flags(fan: Fan, q: int):
    """All flags of length q+1, ordered lexicographically by their generator sequence."""
    if not 0 <= q <= fan.rank - 1:
        raise GeometryError("flag length out of range", q=q)
    out = []

    def grow(gens):
        if len(gens) == q + 1:
            out.append(flag_from_gens(gens))
            return
        cur = frozenset(gens)
        for nxt in fan.cofaces(cur):
            (j,) = nxt - cur
            grow(gens + [j])

    for r in range(len(fan.rays)):
        grow([r])
    out.sort(key=lambda f: f.gens)
    return out


def flags(inp: TropicalInput, w, q: int):
    return fan_flags(fan_at(inp, w), q)


def flag_coefficient(fan: Fan, flag: ConeFlag) -> MultiVector:
    """f(S): contraction of e_1 ^ ... ^ e_{q+1} against the volume form."""
    return contract_volume(wedge_vectors([fan.rays[i] for i in flag.gens], rank=fan.rank))


# ---------------------------------------------------------------- tropical cycles


@dataclass
class TropicalCycle:
    w: tuple
    q: int
    fan: Fan
    entries: dict  # flag -> MultiVector (in N)
    points: dict = field(default_factory=dict)  # cone -> b_sigma

    def support(self):
        return sorted(self.entries, key=lambda f: f.gens)

    def to_json(self):
        rows = []
        for f in self.support():
            rows.append({
                "flag": [sorted(c) for c in f.cones],
                "generators": list(f.gens),
                "vertices": [[str(x) for x in self.points[c]] for c in f.cones] if self.points else [],
                "coefficient": self.entries[f].to_json(),
            })
        return {"w": list(self.w), "q": self.q, "entries": rows}


def cycle_from_weight(inp: TropicalInput | None, w, a: MinkowskiWeight, check=True) -> TropicalCycle:
    """Formal sum of flag simplices with coefficients a(top cone) f(S)."""
    fan = a.fan
    q = fan.rank - 1 - a.codim
    if check:
        res = balance_check(a)
        if not res.ok:
            from .errors import Unbalanced

            raise Unbalanced("weight is not balanced", cone=sorted(res.cone))
    entries = {}
    for f in fan_flags(fan, q):
        val = a(f.top)
        if val:
            entries[f] = flag_coefficient(fan, f).scale(val)
    pts = dual_face_points(inp, w) if inp is not None else {}
    return TropicalCycle(tuple(w) if w is not None else (), q, fan, entries, pts)


def simplicial_boundary(entries):
    """Boundary of a formal sum of flag simplices keyed by their cone sequence.

    Dropping the cone at position i carries the sign (-1)^i.  Faces that are
    not flags (a gap in dimensions) appear only to cancel in pairs.
    """
    out = {}
    for flag, coeff in entries.items():
        key = flag.key() if isinstance(flag, ConeFlag) else flag
        for i in range(len(key)):
            face = key[:i] + key[i + 1:]
            if not face:
                continue
            term = coeff if i % 2 == 0 else -coeff
            out[face] = out[face] + term if face in out else term
    return {k: v for k, v in out.items() if not v.is_zero()}


def cycle_boundary(cycle: TropicalCycle):
    """Residual of the boundary of a tropical cycle; empty exactly when it closes up."""
    return simplicial_boundary(cycle.entries)


def skeleton(inp: TropicalInput, w, q: int):
    """Flags whose simplices make up the q-skeleton of the boundary of the dual cell."""
    return flags(inp, w, q)
