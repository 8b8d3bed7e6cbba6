"""Toric divisors, line-bundle K-classes and Chern characters on smooth complete toric varieties.

Chow classes are Minkowski weights on the fan; products are fan-displacement
cups.  A divisor ``sum a_rho D_rho`` has support function ``phi(u_rho) = -a_rho``
(minimum convention), so it is nef exactly when that function is convex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import AlgebraError, GeometryError
from .lattice import dot, solve
from .minkowski import GradedClass, MinkowskiWeight, cup, exp_class, fundamental
from .polytope import Fan, SupportFunction, convexity, polytope_from_support


@dataclass(frozen=True)
class ToricDivisor:
    """Integer combination of the ray divisors of a fan."""

    fan: Fan
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if len(self.coeffs) != len(self.fan.rays):
            raise GeometryError("one divisor coefficient per ray expected")

    @classmethod
    def ray(cls, fan, i, mult=1):
        return cls(fan, tuple(mult if j == i else 0 for j in range(len(fan.rays))))

    @classmethod
    def zero(cls, fan):
        return cls(fan, (0,) * len(fan.rays))

    @classmethod
    def principal(cls, fan, n):
        """div(chi^n) = sum <u_rho, n> D_rho."""
        return cls(fan, tuple(dot(r, n) for r in fan.rays))

    def __add__(self, other):
        return ToricDivisor(self.fan, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return ToricDivisor(self.fan, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return ToricDivisor(self.fan, tuple(k * a for a in self.coeffs))

    def support_function(self):
        return SupportFunction(self.fan, tuple(-a for a in self.coeffs))

    def positivity(self):
        """(nef, ample)."""
        return convexity(self.support_function())

    def is_nef(self):
        return self.positivity()[0]

    def is_ample(self):
        return self.positivity()[1]

    def polytope(self):
        return polytope_from_support(self.support_function())

    def to_json(self):
        return list(self.coeffs)


# ---------------------------------------------------------------- divisor classes


def divisor_weight(D: ToricDivisor) -> MinkowskiWeight:
    """Codim-1 weight tau -> deg(D . V(tau)) over the walls tau of a smooth complete fan."""
    fan = D.fan
    if not (fan.unimodular and fan.complete):
        raise GeometryError("divisor weights need a complete unimodular fan")
    cache = fan.__dict__.setdefault("_divisor_weights", {})
    if D.coeffs in cache:
        return cache[D.coeffs]
    vals = {}
    for tau in fan.cones(fan.rank - 1):
        sigma, other = [c for c in fan.maximal if tau <= c]
        idx = sorted(sigma)
        rows = [fan.rays[i] for i in idx]
        # n with <u_rho, n> = a_rho on sigma; D - div(chi^n) vanishes there
        n = solve([[r[k] for r in rows] for k in range(fan.rank)], [D.coeffs[i] for i in idx])
        (j,) = other - tau
        v = D.coeffs[j] - dot(fan.rays[j], n)
        if v != 0:
            vals[tau] = int(v) if Fraction(v).denominator == 1 else v
    w = MinkowskiWeight(fan, 1, vals, check=False)
    cache[D.coeffs] = w
    return w


def divisor_class(D: ToricDivisor) -> GradedClass:
    return GradedClass.of(divisor_weight(D))


def stratum_weight(fan: Fan, cone) -> MinkowskiWeight:
    """[V(sigma)] as the cup of its ray divisor classes."""
    cone = sorted(cone)
    out = fundamental(fan)
    for i in cone:
        out = cup(out, divisor_weight(ToricDivisor.ray(fan, i)))
    return out


# ---------------------------------------------------------------- K-classes


class KClass:
    """Formal integer combination of line bundles O(D) on one fan."""

    def __init__(self, fan: Fan, terms=None):
        self.fan = fan
        merged = {}
        for c, D in terms or []:
            key = D.coeffs if isinstance(D, ToricDivisor) else tuple(D)
            merged[key] = merged.get(key, 0) + int(c)
        self.terms = {k: v for k, v in sorted(merged.items()) if v != 0}

    @classmethod
    def line_bundle(cls, D: ToricDivisor, coeff=1):
        return cls(D.fan, [(coeff, D)])

    @classmethod
    def structure_sheaf(cls, fan):
        return cls.line_bundle(ToricDivisor.zero(fan))

    def bundles(self):
        return [(c, ToricDivisor(self.fan, k)) for k, c in self.terms.items()]

    def __add__(self, other):
        return KClass(self.fan, self.bundles() + other.bundles())

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return KClass(self.fan, [(k * c, D) for c, D in self.bundles()])

    def __eq__(self, other):
        return isinstance(other, KClass) and self.fan is other.fan and self.terms == other.terms

    def __repr__(self):
        return "KClass(" + " + ".join(f"{c}*O{list(k)}" for k, c in self.terms.items()) + ")"

    def is_zero(self):
        return not self.terms

    def to_json(self):
        return [{"coeff": c, "divisor": list(k)} for k, c in self.terms.items()]


def kmul(x: KClass, y: KClass) -> KClass:
    out = []
    for c1, D1 in x.bundles():
        for c2, D2 in y.bundles():
            out.append((c1 * c2, D1 + D2))
    return KClass(x.fan, out)


def kpow(x: KClass, n: int) -> KClass:
    out = KClass.structure_sheaf(x.fan)
    for _ in range(n):
        out = kmul(out, x)
    return out


def chern(x: KClass) -> GradedClass:
    """sum_j l_j exp(D_j), truncated at the rank of the fan."""
    fan = x.fan
    cache = fan.__dict__.setdefault("_exp_cache", {})
    out = GradedClass(fan)
    for c, D in x.bundles():
        if D.coeffs not in cache:
            cache[D.coeffs] = exp_class(divisor_class(D))
        out = out + cache[D.coeffs].scale(c)
    return out


# ---------------------------------------------------------------- ample classes


def find_ample(fan: Fan, max_norm: int = 4) -> ToricDivisor:
    """Smallest sup-norm ample divisor vanishing on the first maximal cone.

    Candidates are enumerated by increasing sup-norm in a fixed order, so the
    result is deterministic.
    """
    cached = fan.__dict__.get("_ample")
    if cached is not None:
        return cached
    base = sorted(fan.maximal[0])
    free = [i for i in range(len(fan.rays)) if i not in base]
    for norm in range(1, max_norm + 1):
        for vals in product(range(-norm, norm + 1), repeat=len(free)):
            if max(abs(v) for v in vals) != norm:
                continue
            coeffs = [0] * len(fan.rays)
            for i, v in zip(free, vals):
                coeffs[i] = v
            D = ToricDivisor(fan, coeffs)
            if D.is_ample():
                fan._ample = D
                return D
    raise AlgebraError("no ample divisor found within the search budget", max_norm=max_norm)


def anti_nef_decompose(x: KClass, ample: ToricDivisor | None = None) -> KClass:
    """Rewrite every line bundle as a combination of anti-nef bundles.

    With M = O(-A) for an ample A, [L] = [L M^n] (sum_{i<k} (1 - [M])^i)^n
    where n is the least integer making L M^n anti-nef and k = rank + 1
    (so that (1 - [M])^k vanishes).
    """
    fan = x.fan
    A = ample if ample is not None else find_ample(fan)
    M = -A
    one = KClass.structure_sheaf(fan)
    u = one - KClass.line_bundle(M)
    k = fan.rank + 1
    series = KClass(fan)
    for i in range(k):
        series = series + kpow(u, i)
    out = KClass(fan)
    for c, L in x.bundles():
        n = 0
        while not (-(L + M.scale(n))).is_nef():
            n += 1
            if n > 10_000:
                raise AlgebraError("anti-nef twist not found")
        N = L + M.scale(n)
        out = out + kmul(KClass.line_bundle(N, c), kpow(series, n))
    return out


def is_anti_nef(x: KClass) -> bool:
    return all((-D).is_nef() for _, D in x.bundles())


def structure_sheaf_class(divisors, fan: Fan | None = None) -> KClass:
    """Koszul class sum_I (-1)^|I| [O(-D_I)] of a complete intersection."""
    divisors = list(divisors)
    if fan is None:
        if not divisors:
            raise AlgebraError("fan needed for the empty intersection")
        fan = divisors[0].fan
    terms = []
    for r in range(len(divisors) + 1):
        for sub in combinations(divisors, r):
            D = ToricDivisor.zero(fan)
            for e in sub:
                D = D + e
            terms.append(((-1) ** r, -D))
    return KClass(fan, terms)


# ---------------------------------------------------------------- leading weight


def leading_index_and_weight(x: KClass):
    """(k, a_E): first nonzero Chern degree (capped at d) and (-1)^(d+1-k) ch_k as an integral weight."""
    fan = x.fan
    d = fan.rank - 1
    ch = chern(x)
    k = d
    for kk in range(fan.rank + 1):
        if not ch.component(kk).is_zero():
            k = min(kk, d)
            break
    comp = ch.component(k).scale((-1) ** (d + 1 - k))
    vals = {}
    for c, v in comp.values.items():
        v = Fraction(v)
        if v.denominator != 1:
            raise AlgebraError("leading Chern component is not integral", cone=sorted(c), value=str(v))
        vals[c] = int(v)
    return k, MinkowskiWeight(fan, k, vals, check=False)


def _integer_solve(columns, target):
    """Integer solution of sum_j x_j columns[j] = target via Smith normal form, or None."""
    A = Matrix([[columns[j][i] for j in range(len(columns))] for i in range(len(target))])
    b = Matrix(target)
    S, U, V = smith_normal_decomp(A)
    # S = U A V
    c = U * b
    y = [0] * A.cols
    for i in range(A.rows):
        s = S[i, i] if i < A.cols else 0
        if s == 0:
            if c[i] != 0:
                return None
            continue
        if c[i] % s != 0:
            return None
        y[i] = c[i] // s
    x = V * Matrix(y)
    return [int(v) for v in x]


def weight_to_kclass(a: MinkowskiWeight, ample: ToricDivisor | None = None) -> KClass:
    """A K-class whose leading weight is ``a`` (of codimension k = d - q).

    The weight is written as an integer combination of strata classes; each
    ray divisor is split as (D_rho + l A) - l A with both parts ample, and the
    resulting products of amples become Koszul classes of complete
    intersections.
    """
    if a.is_zero():
        raise AlgebraError("weight must be nonzero")
    fan = a.fan
    k = a.codim
    d = fan.rank - 1
    if k > d:
        raise AlgebraError("codimension must be at most d")
    q = d - k
    cones = fan.cones(k)
    targets = fan.cones(fan.rank - k)
    columns = []
    for c in cones:
        w = stratum_weight(fan, c)
        columns.append([int(w(t)) for t in targets])
    target = [int(a(t)) for t in targets]
    coeffs = _integer_solve(columns, target)
    if coeffs is None:
        raise AlgebraError("strata system has no integer solution")
    A = ample if ample is not None else find_ample(fan)
    # smallest l with D_rho + l A ample, per ray
    shifts = {}
    for c, cval in zip(cones, coeffs):
        if cval == 0:
            continue
        for i in c:
            if i in shifts:
                continue
            lvl = 1
            while not (ToricDivisor.ray(fan, i) + A.scale(lvl)).is_ample():
                lvl += 1
            shifts[i] = lvl
    E = KClass(fan)
    for c, cval in zip(cones, coeffs):
        if cval == 0:
            continue
        rays = sorted(c)
        for r in range(len(rays) + 1):
            for chosen in combinations(rays, r):
                # product over chosen rays of (D + lA) times the lA factors of the others
                factors = [ToricDivisor.ray(fan, i) + A.scale(shifts[i]) for i in chosen]
                factors += [A.scale(shifts[i]) for i in rays if i not in chosen]
                sign = (-1) ** (len(rays) - r)
                E = E + structure_sheaf_class(factors, fan).scale(sign * cval)
    E = E.scale((-1) ** (q + 1))
    got_k, got_a = leading_index_and_weight(E)
    if got_k != k or got_a != a:
        raise AlgebraError("constructed class does not reproduce the weight")
    return E


def alternating_power_sum(divisors, r: int) -> GradedClass:
    """sum_{I} (-1)^|I| (sum_{i in I} D_i)^r as a graded class."""
    fan = divisors[0].fan
    out = GradedClass(fan)
    for n in range(len(divisors) + 1):
        for sub in combinations(divisors, n):
            D = ToricDivisor.zero(fan)
            for e in sub:
                D = D + e
            term = GradedClass.scalar(fan, 1)
            cls = divisor_class(D)
            for _ in range(r):
                term = term.cup(cls)
            out = out + term.scale((-1) ** n)
    return out


def product_class(divisors) -> GradedClass:
    fan = divisors[0].fan
    out = GradedClass.scalar(fan, 1)
    for D in divisors:
        out = out.cup(divisor_class(D))
    return out
