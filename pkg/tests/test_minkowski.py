from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import E1, ORIGIN, cube_fan, k3, p3_fan, random_balanced, s2, s2_weights
from tropcycles.chow import ToricDivisor, divisor_weight
from tropcycles.errors import GenericityError
from tropcycles.minkowski import (
    MinkowskiWeight,
    balance_check,
    certify,
    cup,
    default_generic,
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
from tropcycles.tropical import fan_at

M0 = (3, 2, 1)


def projective_fan(n):
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    maximal = [set(range(n + 1)) - {k} for k in range(n + 1)]
    return Fan(rays, maximal)


def test_hyperplane_weight_is_balanced():
    fan = p3_fan()
    assert balance_check(ones(fan, 1)).ok
    a1, a2 = s2_weights()
    assert balance_check(a1).ok and balance_check(a2).ok


def test_broken_weight_reports_the_cone():
    fan = p3_fan()
    a = ones(fan, 1)
    cone = sorted(a.values, key=sorted)[0]
    res = balance_check(MinkowskiWeight(fan, 1, {**a.values, cone: 2}, check=False))
    assert not res.ok and res.cone < cone


def test_generic_vector_certification():
    fan = p3_fan()
    assert certify(fan, M0)
    assert certify(fan, tuple(x * 7 for x in M0))
    assert not certify(fan, E1)
    assert not certify(cube_fan(), E1)
    g = find_generic(fan, seed=5)
    assert g.certified and certify(fan, g.m0)
    with pytest.raises(GenericityError):
        cup(ones(fan, 1), ones(fan, 1), E1)


def test_cup_on_the_quartic_fan():
    fan = p3_fan()
    a0 = ones(fan, 1)
    c = cup(a0, a0, M0)
    assert c == ones(fan, 2)
    assert psi(c) == 4
    assert cup(a0, MinkowskiWeight(fan, 1, {}), M0).is_zero()


def test_psi_of_zero_and_additivity():
    fan = p3_fan()
    assert psi(MinkowskiWeight(fan, 2, {})) == 0
    rng = random.Random(2)
    a, b = random_balanced(fan, 2, rng), random_balanced(fan, 2, rng)
    assert psi(a + b) == psi(a) + psi(b)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_top_power_of_hyperplane_has_degree_one(n):
    fan = projective_fan(n)
    H = divisor_weight(ToricDivisor.ray(fan, 0))
    x = fundamental(fan)
    for _ in range(n):
        x = cup(x, H)
    assert degree(x) == 1
    assert degree(MinkowskiWeight(fan, n, {})) == 0


def test_quotient_weights_on_p1_squared():
    inp = s2()
    a1, a2 = s2_weights()
    eq = edge_quotient(fan_at(inp, E1), fan_at(inp, ORIGIN), E1, ORIGIN)
    b1, b2 = quotient_weight(eq, a1, 1), quotient_weight(eq, a2, 2)
    assert balance_check(b1).ok and balance_check(b2).ok
    assert degree(cup(b1, b2)) == 1


def test_intersection_numbers_of_examples():
    fan = p3_fan()
    assert tropical_intersection(k3(), ORIGIN, ones(fan, 1), ORIGIN, ones(fan, 1), M0) == 4
    a1, a2 = s2_weights()
    assert tropical_intersection(s2(), E1, a1, ORIGIN, a2, M0) == -1
    assert tropical_intersection(s2(), E1, a1, ORIGIN, a2) == -1


def test_enumeration_of_examples():
    fan = p3_fan()
    enum = intersection_enumerate(k3(), ORIGIN, ones(fan, 1), ORIGIN, ones(fan, 1), M0)
    assert len(enum.points) == 4 and all(p.multiplicity == 1 for p in enum.points)
    a1, a2 = s2_weights()
    enum = intersection_enumerate(s2(), E1, a1, ORIGIN, a2, M0)
    assert sorted(p.multiplicity for p in enum.points) == [-1, 0]
    assert enum.total == -1


def test_default_generic_is_seed_deterministic():
    fan = cube_fan()
    a = default_generic(fan, seed=4).m0
    b = find_generic(fan, seed=4).m0
    assert a == b


FANS = {"p3": p3_fan, "cube": cube_fan, "s2_e1": lambda: fan_at(s2(), E1)}


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(FANS)), st.integers(0, 10**6))
def test_cup_is_well_defined_commutative_and_balanced(name, seed):
    fan = FANS[name]()
    rng = random.Random(seed)
    p = rng.randint(0, 3)
    q = rng.randint(0, 3 - p)
    a, b = random_balanced(fan, p, rng), random_balanced(fan, q, rng)
    g1, g2 = find_generic(fan, seed=seed), find_generic(fan, seed=seed + 1)
    c = cup(a, b, g1.m0)
    assert balance_check(c).ok
    assert c == cup(a, b, g2.m0)
    assert c == cup(b, a, g1.m0)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(sorted(FANS)), st.integers(0, 10**6))
def test_cup_is_associative(name, seed):
    fan = FANS[name]()
    rng = random.Random(seed)
    a, b, c = (random_balanced(fan, 1, rng) for _ in range(3))
    assert cup(cup(a, b), c) == cup(a, cup(b, c))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_intersection_paths_agree_on_random_pairs(seed):
    rng = random.Random(seed)
    inp = s2()
    w1, w2 = rng.choice([(E1, E1), (ORIGIN, ORIGIN), (E1, ORIGIN), (ORIGIN, E1)])
    a = random_balanced(fan_at(inp, w1), 1, rng)
    b = random_balanced(fan_at(inp, w2), 1, rng)
    assert intersection_enumerate(inp, w1, a, w2, b).total == tropical_intersection(inp, w1, a, w2, b)
