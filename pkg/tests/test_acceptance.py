"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line at the end of the run."""

from __future__ import annotations

import random
import time
from fractions import Fraction

from conftest import record_acceptance
from oracles import p3_period as oracle
from support import E1, FIXTURES, ORIGIN, plane_weight, random_ample, random_balanced, random_nef
from tropcycles.chow import (
    KClass,
    ToricDivisor,
    alternating_power_sum,
    chern,
    leading_index_and_weight,
    product_class,
    weight_to_kclass,
)
from tropcycles.gamma import gamma_class, period_asymptotic
from tropcycles.io import load
from tropcycles.lift import (
    CellChain,
    assert_cycle,
    chain_boundary,
    cycle_from_polytope,
    lift_intersection,
    lift_profile,
)
from tropcycles.minkowski import (
    balance_check,
    cup,
    degree,
    edge_quotient,
    find_generic,
    fundamental,
    intersection_enumerate,
    ones,
    psi,
    quotient_weight,
    tropical_intersection,
)
from tropcycles.polytope import Fan
from tropcycles.tropical import fan_at, fan_flags

M0 = (3, 2, 1)


class Checks:
    """Collects named sub-checks so that the report names every failing piece."""

    def __init__(self, number):
        self.number = number
        self.failed = []
        self.count = 0

    def check(self, name, ok):
        self.count += 1
        if not ok:
            self.failed.append(name)

    def finish(self, summary):
        ok = not self.failed
        detail = summary if ok else f"{summary}; failed: {', '.join(self.failed)}"
        record_acceptance(self.number, ok, detail)
        assert ok, detail


def fresh(name):
    return load(FIXTURES / f"{name}.json")


def fixture_fans():
    k3, s2, curve = fresh("k3"), fresh("s2"), fresh("p2curve")
    return [("k3@0", k3, ORIGIN), ("s2@0", s2, ORIGIN), ("s2@e1", s2, E1), ("p2curve@0", curve, (0, 0))]


def test_criterion_1_quartic_intersection():
    c = Checks(1)
    start = time.perf_counter()
    inp = fresh("k3")
    fan = fan_at(inp, ORIGIN)
    a0 = ones(fan, 1)
    prod = cup(a0, a0, M0)
    c.check("a0 cup a0 is all ones", prod == ones(fan, 2))
    c.check("psi = 4", psi(prod) == 4)
    value = tropical_intersection(inp, ORIGIN, a0, ORIGIN, a0, M0)
    c.check("intersection = 4", value == 4)
    elapsed = time.perf_counter() - start
    c.check("runtime < 1 s", elapsed < 1.0)
    c.finish(f"cup all-ones, psi = {psi(prod)}, intersection = {value}, {elapsed:.3f} s (exact, < 1 s)")


def test_criterion_2_edge_intersection():
    c = Checks(2)
    start = time.perf_counter()
    inp = fresh("s2")
    f1, f0 = fan_at(inp, E1), fan_at(inp, ORIGIN)
    a1, a2 = plane_weight(f1, (0, 2)), plane_weight(f0, (0, 1))
    value = tropical_intersection(inp, E1, a1, ORIGIN, a2, M0)
    c.check("intersection = -1", value == -1)
    eq = edge_quotient(f1, f0, E1, ORIGIN)
    qf = eq.fan
    p1p1 = Fan([(1, 0), (0, 1), (-1, 0), (0, -1)], [{0, 1}, {1, 2}, {2, 3}, {3, 0}])
    c.check("quotient fan is P1 x P1", sorted(qf.rays) == sorted(p1p1.rays) and len(qf.maximal) == 4
            and qf.complete and qf.unimodular)
    b1, b2 = quotient_weight(eq, a1, 1), quotient_weight(eq, a2, 2)
    deg = degree(cup(b1, b2))
    c.check("quotient product = 1", deg == 1)
    enum = intersection_enumerate(inp, E1, a1, ORIGIN, a2, M0)
    mults = sorted(int(p.multiplicity) for p in enum.points)
    c.check("two points with multiplicities {0, -1}", mults == [-1, 0])
    elapsed = time.perf_counter() - start
    c.check("runtime < 1 s", elapsed < 1.0)
    c.finish(f"intersection = {value}, quotient P1xP1, product = {deg}, multiplicities = {mults}, {elapsed:.3f} s")


def test_criterion_3_quartic_lift_profile():
    c = Checks(3)
    inp = fresh("k3")
    fan = fan_at(inp, ORIGIN)
    E = KClass.structure_sheaf(fan) - KClass.line_bundle(ToricDivisor(fan, (-1, 0, 0, 0)))
    ch = chern(E)
    H = ones(fan, 1)
    c.check("ch_0 = 0", ch.component(0).is_zero())
    c.check("ch_1 = H", ch.component(1) == H)
    c.check("ch_2 = -H^2/2", ch.component(2) == ones(fan, 2).scale(Fraction(-1, 2)))
    top = ch.component(3)(frozenset())
    c.check(f"ch_3 = 0 (computed {top})", ch.component(3).is_zero())
    k, a = leading_index_and_weight(E)
    c.check("(k, a_E) = (1, a0)", (k, a) == (1, H))
    prof = lift_profile(inp, ORIGIN, E)
    c.check("profile 0 at q = 2", all(v == 0 for v in prof.volumes[2].values()))
    c.check("fiber class 1 = a0 at q = 1", len(prof.classes) == 12
            and all(v == 1 == a(f.top) for f, v in prof.classes.items()))
    c.finish("target ch = (0, H, -H^2/2, 0), (k, a_E) = (1, a0), profile 0 at q=2 and 1 at q=1 (exact)")


def test_criterion_4_divisor_intersection_identity():
    c = Checks(4)
    rng = random.Random(404)
    cases = 0
    for name, inp in (("P3", fresh("k3")), ("P1^3", fresh("s2"))):
        fan = fan_at(inp, ORIGIN)
        for s in (1, 2, 3):
            for _ in range(8):
                divs = [random_ample(fan, rng) for _ in range(s)]
                for r in range(s):
                    c.check(f"{name} s={s} r={r} vanishes", alternating_power_sum(divs, r).is_zero())
                expected = product_class(divs).scale((-1) ** s * _factorial(s))
                c.check(f"{name} s={s} r=s product", alternating_power_sum(divs, s) == expected)
                cases += 1
    c.finish(f"{cases} random ample lists, all r <= s (exact)")


def test_criterion_5_boundary_vanishing():
    c = Checks(5)
    rng = random.Random(505)
    polys = 0
    for name, inp, w in fixture_fans():
        fan = fan_at(inp, w)
        for _ in range(20):
            P = random_nef(fan, rng).polytope()
            report = assert_cycle(cycle_from_polytope(inp, w, P, fan))
            c.check(f"{name} c(P) cycle", report.ok)
            polys += 1
    cube = fan_at(fresh("s2"), ORIGIN)
    chains = 0
    for _ in range(40):
        chain = _random_chain(cube, rng)
        c.check("boundary squared", chain_boundary(chain_boundary(chain)).is_zero())
        chains += 1
    c.finish(f"{polys} random nef polytopes over {len(fixture_fans())} fans, {chains} random chains (exact)")


def test_criterion_6_cup_well_defined():
    c = Checks(6)
    rng = random.Random(606)
    pairs = 0
    for name, inp, w in fixture_fans():
        fan = fan_at(inp, w)
        g1 = find_generic(fan, seed=1)
        g2 = next(g for g in (find_generic(fan, seed=s) for s in range(2, 50)) if g.m0 != g1.m0)
        c.check(f"{name} distinct generic vectors", g1.m0 != g2.m0 and g1.certified and g2.certified)
        r = fan.rank
        for _ in range(50):
            p = rng.randint(0, r)
            q = rng.randint(0, r - p)
            a, b = random_balanced(fan, p, rng), random_balanced(fan, q, rng)
            x = cup(a, b, g1.m0)
            c.check(f"{name} m0 independence", x == cup(a, b, g2.m0))
            c.check(f"{name} balanced output", balance_check(x).ok)
            c.check(f"{name} commutative", x == cup(b, a, g1.m0))
            if p + q < r:
                e = random_balanced(fan, rng.randint(0, r - p - q), rng)
                c.check(f"{name} associative", cup(x, e, g1.m0) == cup(a, cup(b, e, g1.m0), g1.m0))
            pairs += 1
    for n in (1, 2, 3, 4):
        fan = _projective_fan(n)
        H = ones(fan, 1)
        x = fundamental(fan)
        for _ in range(n):
            x = cup(x, H)
        c.check(f"P^{n} H^{n} degree 1", degree(x) == 1)
    c.finish(f"{pairs} random pairs, two generic vectors per fan, H^n = 1 on P^1..P^4 (exact)")


def test_criterion_7_intersection_oracle():
    c = Checks(7)
    k3, s2, curve = fresh("k3"), fresh("s2"), fresh("p2curve")
    fk = fan_at(k3, ORIGIN)
    c.check("k3 fixture", intersection_enumerate(k3, ORIGIN, ones(fk, 1), ORIGIN, ones(fk, 1)).total
            == tropical_intersection(k3, ORIGIN, ones(fk, 1), ORIGIN, ones(fk, 1)))
    a1, a2 = plane_weight(fan_at(s2, E1), (0, 2)), plane_weight(fan_at(s2, ORIGIN), (0, 1))
    c.check("s2 fixture", intersection_enumerate(s2, E1, a1, ORIGIN, a2).total
            == tropical_intersection(s2, E1, a1, ORIGIN, a2))
    rng = random.Random(707)
    setups = [(k3, ORIGIN, ORIGIN), (s2, ORIGIN, ORIGIN), (s2, E1, E1), (s2, E1, ORIGIN), (s2, ORIGIN, E1),
              (curve, (0, 0), (0, 0))]
    for i in range(50):
        inp, w1, w2 = setups[i % len(setups)]
        d = inp.d
        p = rng.randint(0, d)
        a = random_balanced(fan_at(inp, w1), p, rng)
        b = random_balanced(fan_at(inp, w2), d - p, rng)
        c.check(f"random pair {i}", intersection_enumerate(inp, w1, a, w2, b).total
                == tropical_intersection(inp, w1, a, w2, b))
    c.finish("2 fixtures and 50 random balanced pairs agree (exact)")


def test_criterion_8_period_formula():
    c = Checks(8)
    start = time.perf_counter()
    inp = fresh("k3")
    fan = fan_at(inp, ORIGIN)
    O = KClass.structure_sheaf(fan)
    cases = {"[O]": (O, oracle.CH_O),
             "[O]-[O(-1)]": (O - KClass.line_bundle(ToricDivisor(fan, (-1, 0, 0, 0))), oracle.CH_O_MINUS_O_MINUS_1)}
    worst = 0.0
    for label, (E, ch) in cases.items():
        got = period_asymptotic(inp, 1, ORIGIN, ORIGIN, E).coeffs
        want = oracle.period(oracle.twisted(ch))
        for r, (x, y) in enumerate(zip(got, want)):
            err = abs(x - y) / max(abs(y), 1e-300) if y != 0 else abs(x)
            worst = max(worst, err)
            c.check(f"{label} L^{r}", (abs(x - y) <= 1e-10 * abs(y)) if y != 0 else abs(x) <= 1e-10)
    g1 = max((abs(v) for _, v in gamma_class(inp, ORIGIN).component(1).items()), default=0.0)
    c.check("Gamma codim-1 < 1e-12", g1 < 1e-12)
    s2 = fresh("s2")
    zero = period_asymptotic(s2, 2, (-1, 0, 0), E1, KClass.structure_sheaf(fan_at(s2, E1)))
    c.check("off-star branch is zero", zero.degree() == -1 and zero.epsilon_marker)
    elapsed = time.perf_counter() - start
    c.check("runtime < 5 s", elapsed < 5.0)
    c.finish(f"max relative deviation {worst:.1e} (tol 1e-10), |Gamma_1| = {g1:.1e} (tol 1e-12), "
             f"zero branch ok, {elapsed:.3f} s")


def test_criterion_9_weight_round_trip():
    c = Checks(9)
    rng = random.Random(909)
    total = 0
    for name, inp, w in fixture_fans():
        fan = fan_at(inp, w)
        d = fan.rank - 1
        for codim in range(d + 1):
            for _ in range(20):
                a = random_balanced(fan, codim, rng)
                c.check(f"{name} codim {codim}", leading_index_and_weight(weight_to_kclass(a)) == (codim, a))
                total += 1
    c.finish(f"{total} random nonzero weights round-trip (exact)")


def test_criterion_10_lift_sign():
    c = Checks(10)
    k3, s2 = fresh("k3"), fresh("s2")
    fk = fan_at(k3, ORIGIN)
    v1 = lift_intersection(k3, ORIGIN, ones(fk, 1), ORIGIN, ones(fk, 1), q=1)
    c.check("quartic +4", v1 == 4)
    a1, a2 = plane_weight(fan_at(s2, E1), (0, 2)), plane_weight(fan_at(s2, ORIGIN), (0, 1))
    v2 = lift_intersection(s2, E1, a1, ORIGIN, a2, q=1)
    c.check("s2 -1", v2 == -1)
    c.finish(f"lift intersections {v1:+d} and {v2:+d} (exact)")


# ---------------------------------------------------------------- helpers


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _projective_fan(n):
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    return Fan(rays, [set(range(n + 1)) - {k} for k in range(n + 1)])


def _random_chain(fan, rng):
    P = random_ample(fan, rng).polytope()
    chain = CellChain()
    for _ in range(rng.randint(1, 6)):
        q = rng.randint(0, fan.rank - 1)
        flag = rng.choice(fan_flags(fan, q))
        cones = flag.cones if rng.random() < 0.7 or q == 0 else flag.cones[1:]
        face = P.face_minimizing([rng.randint(-3, 3) for _ in range(fan.rank)])
        chain.add(cones, frozenset(face.vertices), rng.randint(-3, 3))
    return chain
