"""Tropical cycles on unimodular triangulations, their lifts and period asymptotics."""

from __future__ import annotations

from .chow import KClass, ToricDivisor, anti_nef_decompose, chern, leading_index_and_weight, weight_to_kclass
from .errors import TropError
from .gamma import LogPolynomial, cy_period, decompose_v, period_asymptotic
from .io import load, serialize
from .lift import assert_cycle, chain_boundary, cycle_from_kclass, cycle_from_polytope, lift_intersection, lift_profile
from .minkowski import MinkowskiWeight, balance_check, cup, intersection_enumerate, tropical_intersection
from .tropical import TropicalInput, cycle_from_weight, fan_at, interior_points

__version__ = "0.1.0"

__all__ = [
    "KClass", "ToricDivisor", "anti_nef_decompose", "chern", "leading_index_and_weight", "weight_to_kclass",
    "TropError", "LogPolynomial", "cy_period", "decompose_v", "period_asymptotic", "load", "serialize",
    "assert_cycle", "chain_boundary", "cycle_from_kclass", "cycle_from_polytope", "lift_intersection",
    "lift_profile", "MinkowskiWeight", "balance_check", "cup", "intersection_enumerate", "tropical_intersection",
    "TropicalInput", "cycle_from_weight", "fan_at", "interior_points",
]
