"""Shared fixture loading and random generators for the test suite."""

from __future__ import annotations

import random
from functools import lru_cache
from pathlib import Path

from tropcycles.chow import ToricDivisor, stratum_weight
from tropcycles.io import load
from tropcycles.minkowski import MinkowskiWeight
from tropcycles.tropical import fan_at

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

E1 = (1, 0, 0)
ORIGIN = (0, 0, 0)


@lru_cache(maxsize=None)
def instance(name):
    return load(FIXTURES / f"{name}.json")


def k3():
    return instance("k3")


def s2():
    return instance("s2")


def p2curve():
    return instance("p2curve")


def p3_fan():
    return fan_at(k3(), ORIGIN)


def cube_fan():
    """Star fan of the origin in FIX_S2: rays +-e_i, the fan of P^1 x P^1 x P^1."""
    return fan_at(s2(), ORIGIN)


def plane_weight(fan, axes):
    """Ones on the 2-cones lying in the coordinate plane spanned by ``axes``."""
    values = {
        c: 1
        for c in fan.cones(2)
        if all(fan.rays[i][k] == 0 for i in c for k in range(fan.rank) if k not in axes)
    }
    return MinkowskiWeight(fan, 1, values)


def s2_weights():
    """(a1 on the fan at e1, a2 on the fan at 0)."""
    inp = s2()
    return plane_weight(fan_at(inp, E1), (0, 2)), plane_weight(fan_at(inp, ORIGIN), (0, 1))


@lru_cache(maxsize=None)
def _strata(fan, codim):
    return tuple(stratum_weight(fan, c) for c in sorted(fan.cones(codim), key=sorted))


def random_balanced(fan, codim, rng: random.Random, spread=3, allow_zero=False):
    """Random integer combination of torus-invariant strata classes of the given codimension."""
    strata = _strata(fan, codim)
    while True:
        out = MinkowskiWeight(fan, codim, {}, check=False)
        for s in strata:
            n = rng.randint(-spread, spread)
            if n:
                out = out + s.scale(n)
        if allow_zero or not out.is_zero():
            return out


def random_ample(fan, rng: random.Random, size=3, tries=500):
    for _ in range(tries):
        D = ToricDivisor(fan, [rng.randint(-size, size) for _ in fan.rays])
        if D.is_ample():
            return D
    raise RuntimeError("no ample divisor sampled")


def random_nef(fan, rng: random.Random, size=2, tries=500):
    for _ in range(tries):
        D = ToricDivisor(fan, [rng.randint(-size, size) for _ in fan.rays])
        if D.is_nef():
            return D
    raise RuntimeError("no nef divisor sampled")
