"""Minkowski weights on complete unimodular fans and their fan-displacement ring.

A weight of codimension ``k`` assigns a value to every cone of dimension
``rank - k``.  Values are usually integers or Fractions; complex floats are
accepted so that the same ring operations serve the Gamma-class expansions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import GenericityError, GeometryError, Unbalanced
from .lattice import (
    MultiVector,
    contract_volume,
    det,
    in_span,
    nullspace,
    pair,
    row_reduce,
    solve,
    sublattice_index,
    wedge,
    wedge_vectors,
)
from .polytope import Fan, quotient_fan


def _key(cone):
    return tuple(sorted(cone))


class MinkowskiWeight:
    """Function on the cones of one dimension of a fan.

    Args:
        fan: complete simplicial fan.
        codim: codimension k; values live on cones of dimension rank - k.
        values: mapping cone (iterable of ray indices) to value; missing cones are 0.
        check: run the balancing test and raise ``Unbalanced`` on failure.
    """

    def __init__(self, fan: Fan, codim: int, values=None, check=True):
        if not 0 <= codim <= fan.rank:
            raise GeometryError("codimension out of range", codim=codim)
        self.fan = fan
        self.codim = codim
        self.cone_dim = fan.rank - codim
        cones = set(fan.cones(self.cone_dim))
        vals = {}
        for c, v in (values or {}).items():
            c = frozenset(c)
            if c not in cones:
                raise GeometryError("weight given on a cone outside the fan", cone=sorted(c))
            if v != 0:
                vals[c] = v
        self.values = vals
        if check:
            res = balance_check(self)
            if not res.ok:
                raise Unbalanced("weight is not balanced", cone=sorted(res.cone))

    def __call__(self, cone):
        return self.values.get(frozenset(cone), 0)

    def __repr__(self):
        return f"MinkowskiWeight(codim={self.codim}, {self.to_json()})"

    def items(self):
        return [(c, self.values.get(c, 0)) for c in self.fan.cones(self.cone_dim)]

    def is_zero(self):
        return not self.values

    def _like(self, values):
        return MinkowskiWeight(self.fan, self.codim, values, check=False)

    def __add__(self, other):
        self._compatible(other)
        keys = set(self.values) | set(other.values)
        return self._like({c: self(c) + other(c) for c in keys})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return self._like({c: v * factor for c, v in self.values.items()})

    def __eq__(self, other):
        if not isinstance(other, MinkowskiWeight):
            return NotImplemented
        return self.fan is other.fan and self.codim == other.codim and self.values == other.values

    def close_to(self, other, tol=1e-10):
        self._compatible(other)
        scale = max([1.0] + [abs(v) for v in self.values.values()] + [abs(v) for v in other.values.values()])
        return all(abs(self(c) - other(c)) <= tol * scale for c in set(self.values) | set(other.values))

    def _compatible(self, other):
        if self.fan is not other.fan or self.codim != other.codim:
            raise GeometryError("weights live on different fans or codimensions")

    def to_json(self):
        return {",".join(map(str, _key(c))): _jsonable(v) for c, v in sorted(self.values.items(), key=lambda t: _key(t[0]))}


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return v


def ones(fan: Fan, codim: int) -> MinkowskiWeight:
    return MinkowskiWeight(fan, codim, {c: 1 for c in fan.cones(fan.rank - codim)}, check=False)


def fundamental(fan: Fan) -> MinkowskiWeight:
    return MinkowskiWeight(fan, 0, {c: 1 for c in fan.cones(fan.rank)}, check=False)


# ---------------------------------------------------------------- balancing


@dataclass
class BalanceResult:
    ok: bool
    cone: frozenset = frozenset()
    residual: tuple = ()


def _relative_generator(fan: Fan, tau, sigma):
    # lattice vector representing the primitive generator of (sigma + R tau) / R tau
    (j,) = sigma - tau
    u = fan.rays[j]
    if fan.unimodular:
        return u
    tau_rays = fan.ray_vectors(tau)
    k = _minor_gcd(tau_rays + [u]) // max(1, _minor_gcd(tau_rays) if tau_rays else 1)
    return tuple(Fraction(x, k) for x in u)


def _minor_gcd(rows):
    import math
    from itertools import combinations

    if not rows:
        return 1
    g = 0
    for cols in combinations(range(len(rows[0])), len(rows)):
        g = math.gcd(g, abs(det([[r[c] for c in cols] for r in rows])))
    return g


def balance_check(a: MinkowskiWeight) -> BalanceResult:
    """Check sum_{sigma > tau} a(sigma) m_{sigma,tau} in R*tau for every tau one dimension down."""
    fan = a.fan
    if a.cone_dim == 0:
        return BalanceResult(True)
    for tau in fan.cones(a.cone_dim - 1):
        total = [0] * fan.rank
        for sigma in fan.cofaces(tau):
            val = a(sigma)
            if val == 0:
                continue
            m = _relative_generator(fan, tau, sigma)
            total = [t + val * x for t, x in zip(total, m)]
        if all(t == 0 for t in total):
            continue
        if not _in_real_span(fan.ray_vectors(tau), total):
            return BalanceResult(False, tau, tuple(total))
    return BalanceResult(True)


def _in_real_span(columns, target, tol=1e-9):
    if any(isinstance(t, complex) or isinstance(t, float) for t in target):
        parts = [[complex(t).real for t in target], [complex(t).imag for t in target]]
        for p in parts:
            if not columns:
                if any(abs(x) > tol for x in p):
                    return False
                continue
            # float least-squares residual
            A = np.array(columns, dtype=float).T
            x, *_ = np.linalg.lstsq(A, np.array(p), rcond=None)
            scale = max(1.0, max(abs(v) for v in p))
            if np.max(np.abs(A @ x - np.array(p))) > tol * scale:
                return False
        return True
    return in_span([list(c) for c in columns], target)


# ---------------------------------------------------------------- generic vectors


@dataclass(frozen=True)
class GenericVector:
    m0: tuple
    certified: bool = False
    seed: int | None = None
    attempts: int = 0

    def to_json(self):
        return {"m0": [str(x) for x in self.m0], "certified": self.certified, "seed": self.seed,
                "attempts": self.attempts}


def _pair_solution(fan, rho, sigma, sigma_p, m0):
    """Coefficients of m0 in [rays(sigma - rho) | -rays(sigma' - rho) | rays(rho)], or None if singular."""
    a = [fan.rays[i] for i in sorted(sigma - rho)]
    b = [tuple(-x for x in fan.rays[i]) for i in sorted(sigma_p - rho)]
    c = [fan.rays[i] for i in sorted(rho)]
    cols = a + b + c
    x = solve(cols, m0)
    return x, len(a) + len(b), cols


def _triples(fan: Fan, dim_a: int, dim_b: int):
    """(rho, sigma, sigma') with sigma, sigma' containing rho and complementary dimensions."""
    dim_rho = dim_a + dim_b - fan.rank
    if dim_rho < 0:
        return
    for rho in fan.cones(dim_rho):
        sa = fan.supercones(rho, dim_a)
        sb = sa if dim_b == dim_a else fan.supercones(rho, dim_b)
        for s, t in product(sa, sb):
            yield rho, s, t


def certify(fan: Fan, m0, dims=None) -> bool:
    """Exact transversality test of m0 against every complementary cone pair.

    A pair passes when its square system is nonsingular with no zero
    coordinate in the two cone blocks, or singular with m0 outside the
    column span (then the translate never meets the cone).
    """
    m0 = tuple(Fraction(x) for x in m0)
    if all(x == 0 for x in m0):
        return False
    r = fan.rank
    if dims is None:
        dims = [(i, j) for i in range(r + 1) for j in range(i, r + 1) if i + j >= r]
    for da, db in dims:
        for rho, s, t in _triples(fan, da, db):
            x, nfree, cols = _pair_solution(fan, rho, s, t, m0)
            if x is None:
                if in_span([list(c) for c in cols], m0):
                    return False
                continue
            if any(v == 0 for v in x[:nfree]):
                return False
    return True


def find_generic(fan: Fan, seed: int = 0, budget: int = 200, candidates=()) -> GenericVector:
    """Seeded search for a certified generic vector.

    Explicit ``candidates`` are tried first.  Random candidates are small
    integer vectors; the test is scale invariant so the displacement size
    plays no role.
    """
    attempts = 0
    for cand in candidates:
        attempts += 1
        if certify(fan, cand):
            return GenericVector(tuple(Fraction(x) for x in cand), True, seed, attempts)
    rng = random.Random(seed)
    for _ in range(budget):
        attempts += 1
        span = 3 + attempts // 10
        cand = tuple(rng.randint(-span, span) for _ in range(fan.rank))
        if certify(fan, cand):
            return GenericVector(tuple(Fraction(x) for x in cand), True, seed, attempts)
    raise GenericityError("no generic vector found within budget", budget=budget, seed=seed)


def as_generic(fan: Fan, m0) -> GenericVector:
    if isinstance(m0, GenericVector):
        if not m0.certified and not certify(fan, m0.m0):
            raise GenericityError("displacement vector is not generic", m0=[str(x) for x in m0.m0])
        return m0
    if not certify(fan, m0):
        raise GenericityError("displacement vector is not generic", m0=[str(x) for x in m0])
    return GenericVector(tuple(Fraction(x) for x in m0), True)


def default_generic(fan: Fan, seed: int = 0) -> GenericVector:
    cached = getattr(fan, "_default_generic", None)
    if cached is not None and cached.seed == seed:
        return cached
    g = find_generic(fan, seed)
    fan._default_generic = g
    return g


# ---------------------------------------------------------------- cup product


def _cup_table(fan: Fan, m0: tuple, dim_a: int, dim_b: int):
    cache = fan.__dict__.setdefault("_cup_tables", {})
    key = (m0, dim_a, dim_b)
    if key in cache:
        return cache[key]
    table = []
    for rho, s, t in _triples(fan, dim_a, dim_b):
        x, nfree, _ = _pair_solution(fan, rho, s, t, m0)
        if x is None or any(v <= 0 for v in x[:nfree]):
            continue
        idx = sublattice_index(fan.ray_vectors(s), fan.ray_vectors(t))
        table.append((rho, s, t, idx))
    cache[key] = table
    return table


def cup(a: MinkowskiWeight, b: MinkowskiWeight, m0=None) -> MinkowskiWeight:
    """Fan displacement product of two weights on the same unimodular fan."""
    if a.fan is not b.fan:
        raise GeometryError("cup factors live on different fans")
    fan = a.fan
    if a.codim + b.codim > fan.rank:
        raise GeometryError("codimension of the product exceeds rank")
    if not fan.unimodular:
        raise GeometryError("cup product implemented for unimodular fans")
    g = default_generic(fan) if m0 is None else as_generic(fan, m0)
    out = {}
    for rho, s, t, idx in _cup_table(fan, g.m0, a.cone_dim, b.cone_dim):
        va = a(s)
        if va == 0:
            continue
        vb = b(t)
        if vb == 0:
            continue
        out[rho] = out.get(rho, 0) + va * vb * idx
    return MinkowskiWeight(fan, a.codim + b.codim, out, check=False)


def psi(a: MinkowskiWeight):
    """Sum of the values over the rays of a codim-(rank-1) weight."""
    if a.codim != a.fan.rank - 1:
        raise GeometryError("psi expects a weight on rays", codim=a.codim)
    return sum(a.values.values())


def degree(a: MinkowskiWeight):
    """Value at the zero cone of a top-codimension weight."""
    if a.codim != a.fan.rank:
        raise GeometryError("degree expects a top-codimension weight", codim=a.codim)
    return a(frozenset())


# ---------------------------------------------------------------- graded classes


class GradedClass:
    """Sum of weights of codimensions 0..rank on one fan."""

    def __init__(self, fan: Fan, parts=None):
        self.fan = fan
        self.parts = {}
        for k, w in (parts or {}).items():
            if w.fan is not fan or w.codim != k:
                raise GeometryError("graded component on wrong fan or degree")
            if not w.is_zero():
                self.parts[k] = w

    @classmethod
    def scalar(cls, fan, value):
        return cls(fan, {0: fundamental(fan).scale(value)}) if value != 0 else cls(fan)

    @classmethod
    def of(cls, w: MinkowskiWeight):
        return cls(w.fan, {w.codim: w})

    def component(self, k):
        return self.parts.get(k) or MinkowskiWeight(self.fan, k, {}, check=False)

    def __add__(self, other):
        out = dict(self.parts)
        for k, w in other.parts.items():
            out[k] = out[k] + w if k in out else w
        return GradedClass(self.fan, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return GradedClass(self.fan, {k: w.scale(factor) for k, w in self.parts.items()})

    def cup(self, other, m0=None):
        out = {}
        for i, a in self.parts.items():
            for j, b in other.parts.items():
                if i + j > self.fan.rank:
                    continue
                c = cup(a, b, m0)
                out[i + j] = out[i + j] + c if i + j in out else c
        return GradedClass(self.fan, out)

    def truncate_above(self, k):
        return GradedClass(self.fan, {i: w for i, w in self.parts.items() if i <= k})

    def degree(self):
        return degree(self.component(self.fan.rank))

    def is_zero(self):
        return all(w.is_zero() for w in self.parts.values())

    def __eq__(self, other):
        if not isinstance(other, GradedClass):
            return NotImplemented
        keys = set(self.parts) | set(other.parts)
        return self.fan is other.fan and all(self.component(k) == other.component(k) for k in keys)

    def close_to(self, other, tol=1e-10):
        keys = set(self.parts) | set(other.parts)
        return all(self.component(k).close_to(other.component(k), tol) for k in keys)

    def to_json(self):
        return {str(k): w.to_json() for k, w in sorted(self.parts.items())}


def power_series(x: GradedClass, coeffs, m0=None) -> GradedClass:
    """sum_k coeffs[k] x^k truncated at the fan rank (x nilpotent, no constant term assumed)."""
    fan = x.fan
    out = GradedClass.scalar(fan, coeffs[0]) if coeffs else GradedClass(fan)
    term = GradedClass.scalar(fan, 1)
    for k in range(1, min(len(coeffs), fan.rank + 1)):
        term = term.cup(x, m0)
        if term.is_zero():
            break
        if coeffs[k] != 0:
            out = out + term.scale(coeffs[k])
    return out


def exp_class(x: GradedClass, m0=None) -> GradedClass:
    import math

    coeffs = [Fraction(1, math.factorial(k)) for k in range(x.fan.rank + 1)]
    return power_series(x, coeffs, m0)


# ---------------------------------------------------------------- quotient weights


@dataclass
class EdgeQuotient:
    """Quotient fan along the edge from w2 towards w1 with its transported weights."""

    fan: Fan
    image: dict = field(default_factory=dict)
    partner: dict = field(default_factory=dict)  # cone of fan_w2 -> cone of fan_w1 over the same simplex
    project: object = None

    def displacement(self, m0):
        """Image of an ambient displacement vector in the quotient lattice."""
        if m0 is None:
            return None
        vec = m0.m0 if isinstance(m0, GenericVector) else m0
        return self.project(vec)


def edge_quotient(fan_w1: Fan, fan_w2: Fan, w1, w2) -> EdgeQuotient:
    """Quotient of fan_w2 along rho = R(w1 - w2) and the matching of cones of fan_w1.

    A cone of fan_w2 containing rho comes from a simplex tau containing w1
    and w2; its partner is cone(tau - w1) in fan_w1.
    """
    rho = tuple(a - b for a, b in zip(w1, w2))
    if rho not in fan_w2.ray_index:
        raise GeometryError("w1 - w2 is not a ray of the fan at w2")
    q = quotient_fan(fan_w2, rho)
    e = fan_w2.ray_index[rho]
    back = tuple(-x for x in rho)
    partner = {}
    for cone in q.image:
        rays1 = [back]
        for i in cone:
            if i == e:
                continue
            rays1.append(tuple(w2[k] + fan_w2.rays[i][k] - w1[k] for k in range(len(rho))))
        partner[cone] = fan_w1.cone_of_vectors(rays1)
    return EdgeQuotient(q.fan, q.image, partner, q.project)


def quotient_weight(eq: EdgeQuotient, a: MinkowskiWeight, side: int) -> MinkowskiWeight:
    """Transport a weight on fan_w1 (side 1) or fan_w2 (side 2) to the quotient fan."""
    k = a.codim
    target_dim = eq.fan.rank - k
    vals = {}
    for cone, img in eq.image.items():
        if len(img) != target_dim:
            continue
        src = eq.partner[cone] if side == 1 else cone
        v = a(src)
        if v:
            vals[img] = v
    return MinkowskiWeight(eq.fan, k, vals, check=False)


# ---------------------------------------------------------------- geometric enumeration helpers


def flag_front(rays) -> MultiVector:
    """Wedge of an ordered list of flag generators."""
    return wedge_vectors(rays, rank=len(rays[0]) if rays else None)


def feasible_line(cols_a, cols_b, m0):
    """Whether some x >= 0, y >= 0 (strictly inside, generically) solve A x - B y = m0.

    The system may be underdetermined by one (a shared ray); the solution
    set is then a line and positivity is decided on that line directly.
    """
    cols = [list(c) for c in cols_a] + [[-x for x in c] for c in cols_b]
    n = len(cols)
    rows = [[Fraction(cols[j][i]) for j in range(n)] + [Fraction(m0[i])] for i in range(len(m0))]
    red, piv = row_reduce(rows)
    if n in piv:
        return False
    kernel = nullspace([r[:n] for r in red], n) if red else nullspace([], n)
    base = [Fraction(0)] * n
    for r, p in enumerate(piv):
        base[p] = red[r][n]
    if not kernel:
        return all(v > 0 for v in base)
    if len(kernel) > 1:
        return False
    k = kernel[0]
    lo, hi = None, None
    for b, d in zip(base, k):
        if d == 0:
            if b <= 0:
                return False
        elif d > 0:
            bound = -b / d
            lo = bound if lo is None else max(lo, bound)
        else:
            bound = -b / d
            hi = bound if hi is None else min(hi, bound)
    return lo is None or hi is None or lo < hi


def multiplicity(front_a: MultiVector, front_b: MultiVector, orient_rays, val_a, val_b):
    """Tropical multiplicity <Omega, a f(S) ^ b f(S')> of one intersection point.

    ``orient_rays`` are e_1, ..., e_{d+1}; Omega = (-1)^d / |I| e_2 ^ ... ^ e_{d+1}.
    """
    r = len(orient_rays)
    d = r - 1
    I = det([list(v) for v in orient_rays])
    if I == 0:
        raise GeometryError("degenerate orientation frame")
    omega = wedge_vectors(orient_rays[1:], rank=r).scale(Fraction((-1) ** d, abs(I)))
    coeff = wedge(contract_volume(front_a).scale(val_a), contract_volume(front_b).scale(val_b))
    return pair(omega, coeff)


# ---------------------------------------------------------------- intersection numbers


def _edge_case(inp, w1, w2):
    from .tropical import has_edge

    w1, w2 = tuple(w1), tuple(w2)
    if w1 == w2:
        return "same"
    return "edge" if has_edge(inp, w1, w2) else "disjoint"


def tropical_intersection(inp, w1, a1: MinkowskiWeight, w2, a2: MinkowskiWeight, m0=None) -> int:
    """Intersection number of the tropical cycles of a1 at w1 and a2 at w2.

    Same point: (-1)^d psi(a1 cup a2).  Points joined by an edge: (-1)^(d+1)
    times the degree of the product of the transported weights on the
    quotient fan.  Otherwise the cycles are disjoint.
    """
    d = inp.d
    if a1.codim + a2.codim != d:
        raise GeometryError("codimensions must add up to d", codims=[a1.codim, a2.codim])
    case = _edge_case(inp, w1, w2)
    if case == "same":
        return (-1) ** d * psi(cup(a1, a2, m0))
    if case == "disjoint":
        return 0
    eq = edge_quotient(a1.fan, a2.fan, tuple(w1), tuple(w2))
    b1 = quotient_weight(eq, a1, 1)
    b2 = quotient_weight(eq, a2, 2)
    return (-1) ** (d + 1) * degree(cup(b1, b2, eq.displacement(m0)))


@dataclass
class IntersectionPoint:
    sigma: frozenset
    sigma_prime: frozenset
    ray: int
    multiplicity: object

    def to_json(self):
        return {"sigma": sorted(self.sigma), "sigma_prime": sorted(self.sigma_prime), "ray": self.ray,
                "multiplicity": _jsonable(self.multiplicity)}


@dataclass
class Enumeration:
    points: list
    total: object
    m0: tuple

    def to_json(self):
        return {"points": [p.to_json() for p in self.points], "total": _jsonable(self.total),
                "m0": [str(x) for x in self.m0]}


def intersection_enumerate(inp, w1, a1: MinkowskiWeight, w2, a2: MinkowskiWeight, m0=None) -> Enumeration:
    """Count intersection points of the displaced cycles one by one.

    Pairs (sigma, sigma') of cones sharing a ray and meeting after
    displacing sigma' by m0 are listed with the multiplicity obtained by
    pairing the wedge of the two flag coefficients against the integral
    volume form of the facet dual to the shared ray.
    """
    d = inp.d
    if a1.codim + a2.codim != d:
        raise GeometryError("codimensions must add up to d")
    case = _edge_case(inp, w1, w2)
    fan = a2.fan
    g = default_generic(fan) if m0 is None else as_generic(fan, m0)
    if case == "disjoint":
        return Enumeration([], 0, g.m0)
    q = d - a1.codim
    dim_s, dim_t = q + 1, d + 1 - q
    if case == "same":
        rays = range(len(fan.rays))
        partner = None
    else:
        rho_vec = tuple(a - b for a, b in zip(w1, w2))
        rays = [fan.ray_index[rho_vec]]
        partner = edge_quotient(a1.fan, fan, tuple(w1), tuple(w2)).partner
    pts = []
    for rho in rays:
        for s in fan.cones(dim_s):
            if rho not in s:
                continue
            for t in fan.cones(dim_t):
                if rho not in t or s & t != {rho}:
                    continue
                if not feasible_line(fan.ray_vectors(s), fan.ray_vectors(t), g.m0):
                    continue
                gens_s = [rho] + sorted(s - {rho})
                gens_t = [rho] + sorted(t - {rho})
                frame = [fan.rays[i] for i in gens_s] + [fan.rays[i] for i in gens_t[1:]]
                front_t = flag_front([fan.rays[i] for i in gens_t])
                if partner is None:
                    front_s = flag_front([fan.rays[i] for i in gens_s])
                    val_s = a1(s)
                else:
                    # the same simplices seen from w1: rays -e_1 and e_i - e_1
                    e1 = fan.rays[rho]
                    vecs = [tuple(-x for x in e1)] + [tuple(x - y for x, y in zip(fan.rays[i], e1)) for i in gens_s[1:]]
                    front_s = flag_front(vecs)
                    val_s = a1(partner[s])
                mult = multiplicity(front_s, front_t, frame, val_s, a2(t))
                pts.append(IntersectionPoint(s, t, rho, mult))
    total = sum((p.multiplicity for p in pts), 0)
    return Enumeration(pts, total, g.m0)
