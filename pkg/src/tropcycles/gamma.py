"""Leading asymptotics of period integrals as polynomials in L = log t.

All combinatorial inputs stay exact; the Gamma-class constants and the
phase factors are the only floating-point ingredients.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .chow import KClass, ToricDivisor, chern, divisor_weight
from .errors import GeometryError, PeriodError
from .lattice import solve
from .minkowski import GradedClass, MinkowskiWeight, exp_class, power_series
from .tropical import TropicalInput, fan_at, interior_points

EULER_GAMMA = 0.57721566490153286061
ZETA = {
    2: 1.6449340668482264365,
    3: 1.2020569031595942854,
    4: 1.0823232337111381915,
    5: 1.0369277551433699263,
    6: 1.0173430619844491397,
    7: 1.0083492773819228268,
    8: 1.0040773561979443394,
    9: 1.0020083928260822144,
    10: 1.0009945751278180853,
}


def zeta(k: int) -> float:
    if k in ZETA:
        return ZETA[k]
    # the tail beyond 60 terms is below 1e-19 once k > 10
    return sum(n ** -k for n in range(1, 60))


@dataclass
class LogPolynomial:
    """sum_r coeffs[r] L^r with L = log t; ``epsilon_marker`` tags the O(t^eps) remainder."""

    coeffs: list
    epsilon_marker: bool = True

    def evaluate(self, t: float) -> complex:
        if t <= 0:
            raise PeriodError("t must be positive")
        L = math.log(t)
        return sum(c * L ** r for r, c in enumerate(self.coeffs))

    def degree(self):
        nz = [r for r, c in enumerate(self.coeffs) if abs(c) > 0]
        return nz[-1] if nz else -1

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [0j] * (n - len(self.coeffs))
        b = other.coeffs + [0j] * (n - len(other.coeffs))
        return LogPolynomial([x + y for x, y in zip(a, b)], self.epsilon_marker or other.epsilon_marker)

    def to_json(self):
        return {"coefficients": [[c.real + 0.0, c.imag + 0.0] for c in self.coeffs], "remainder": "O(t^eps)" if self.epsilon_marker else None}


@dataclass
class BranchChoice:
    """arg(-c_m / c_w) per point index of A_w."""

    args: dict = field(default_factory=dict)


# ---------------------------------------------------------------- v and tau_v


@dataclass
class Decomposition:
    tau: tuple  # point indices of tau_v
    weights: dict  # point index -> p_m
    p_w: int


def decompose_v(inp: TropicalInput, l: int, v, w=None) -> Decomposition:
    """Unique positive integers p_m with v = sum p_m m over the minimal cell containing v / l."""
    if l < 1:
        raise PeriodError("l must be a positive integer")
    v = tuple(int(x) for x in v)
    target = tuple(Fraction(x, l) for x in v)
    if not inp.newton_polytope.interior_contains(target):
        raise PeriodError("v is not an interior lattice point of l times the Newton polytope", v=list(v), l=l)
    pts = inp.points
    for s in inp.tri.simplices:
        cols = [list(pts[i]) + [1] for i in s]
        bary = solve(cols, list(v) + [l])
        if bary is None or any(b < 0 for b in bary):
            continue
        weights = {}
        for i, b in zip(s, bary):
            if b != 0:
                if b.denominator != 1:
                    raise PeriodError("non-integral barycentric weight (cell not unimodular)")
                weights[i] = int(b)
        p_w = 0
        if w is not None:
            p_w = weights.get(inp.index_of(w), 0)
        return Decomposition(tuple(sorted(weights)), weights, p_w)
    raise PeriodError("v/l lies in no cell")


def tau_membership(inp: TropicalInput, w, tau) -> bool:
    """Whether conv({w} and tau) is a cell of the triangulation."""
    return inp.tri.contains_cell([inp.index_of(w)] + list(tau))


# ---------------------------------------------------------------- classes on Y_w


def _weighted_divisor(fan, coeffs) -> GradedClass:
    """sum_i coeffs[i] D_i for arbitrary (rational or complex) coefficients."""
    out = MinkowskiWeight(fan, 1, {}, check=False)
    for i, c in enumerate(coeffs):
        if c != 0:
            out = out + divisor_weight(ToricDivisor.ray(fan, i)).scale(c)
    return GradedClass.of(out)


def _divisor_plus(fan, D: GradedClass, s) -> GradedClass:
    return D + GradedClass.scalar(fan, s) if s != 0 else D


def anticanonical(fan) -> GradedClass:
    return _weighted_divisor(fan, [1] * len(fan.rays))


def _log_gamma_series(x: GradedClass) -> GradedClass:
    r = x.fan.rank
    coeffs = [0.0, -EULER_GAMMA] + [(-1) ** k * zeta(k) / k for k in range(2, r + 1)]
    return power_series(x, coeffs)


def gamma_class(inp: TropicalInput, w) -> GradedClass:
    """prod_m Gamma(1 + D_m) / Gamma(1 + sigma^w) expanded in the graded ring."""
    fan = fan_at(inp, w)
    return gamma_class_of_fan(fan)


def gamma_class_of_fan(fan) -> GradedClass:
    cache = fan.__dict__.get("_gamma")
    if cache is not None:
        return cache
    total = GradedClass(fan)
    for i in range(len(fan.rays)):
        total = total + _log_gamma_series(_weighted_divisor(fan, [int(j == i) for j in range(len(fan.rays))]))
    total = total - _log_gamma_series(anticanonical(fan))
    out = exp_class(total)
    fan._gamma = out
    return out


def kahler_class(inp: TropicalInput, w) -> GradedClass:
    """omega = sum_m (lambda_m - lambda_w) D_m."""
    fan = fan_at(inp, w)
    lw = inp.lam[inp.index_of(w)]
    return _weighted_divisor(fan, [inp.lam[j] - lw for j in fan.point_indices])


def e_vw(inp: TropicalInput, w, dec: Decomposition) -> GradedClass:
    fan = fan_at(inp, w)
    out = GradedClass.scalar(fan, 1)
    pos = {j: k for k, j in enumerate(fan.point_indices)}
    for m, p in sorted(dec.weights.items()):
        if m not in pos:
            continue
        Dm = _weighted_divisor(fan, [int(k == pos[m]) for k in range(len(fan.rays))])
        for i in range(p):
            out = out.cup(_divisor_plus(fan, Dm, i))
    sig = anticanonical(fan)
    for i in range(dec.p_w):
        out = out.cup(_divisor_plus(fan, sig, -i))
    return out


def branch_logs(inp: TropicalInput, w, branch: BranchChoice | None = None):
    """log(-c_m / c_w) for every m in A_w with the chosen argument branch."""
    fan = fan_at(inp, w)
    cw = inp.complex_coeff(inp.index_of(w))
    out = []
    if branch is None:
        wi = inp.index_of(w)
        branch = BranchChoice({m: math.pi * float(t) for (i, m), t in inp.branch.items() if i == wi})
    args = branch.args
    for j in fan.point_indices:
        z = -inp.complex_coeff(j) / cw
        arg = cmath.phase(z)
        if j in args:
            chosen = float(args[j])
            if abs(cmath.exp(1j * chosen) - z / abs(z)) > 1e-12:
                raise PeriodError("branch does not match the coefficient phase", point=j)
            arg = chosen
        out.append(complex(math.log(abs(z)), arg))
    return out


def twisted_chern(x: KClass) -> GradedClass:
    """(2 pi i)^k on the codim-k part of ch."""
    ch = chern(x)
    parts = {k: w.scale((2j * math.pi) ** k) for k, w in ch.parts.items()}
    return GradedClass(x.fan, parts)


def period_asymptotic(inp: TropicalInput, l: int, v, w, E: KClass, branch: BranchChoice | None = None) -> LogPolynomial:
    """Coefficients of L^r in the leading asymptotics of the period of E."""
    w = tuple(w)
    if w not in interior_points(inp):
        raise GeometryError("w is not an interior point", w=list(w))
    fan = fan_at(inp, w)
    if E.fan is not fan:
        raise PeriodError("K-class lives on a different fan")
    d = inp.d
    dec = decompose_v(inp, l, v, w)
    if not tau_membership(inp, w, dec.tau):
        return LogPolynomial([0j] * (d + 2), True)
    logs = branch_logs(inp, w, branch)
    phase = exp_class(_weighted_divisor(fan, [-z for z in logs]))
    body = gamma_class_of_fan(fan).cup(e_vw(inp, w, dec)).cup(twisted_chern(E)).cup(phase)
    prefactor = (-1) ** (d + dec.p_w) / math.factorial(l - 1)
    omega = kahler_class(inp, w)
    coeffs = []
    term = body
    for r in range(d + 2):
        if r:
            term = term.cup(omega)
        coeffs.append(complex(prefactor * (-1) ** r / math.factorial(r) * term.degree()))
    return LogPolynomial(coeffs, True)


def is_reflexive(inp: TropicalInput) -> bool:
    delta = inp.newton_polytope
    zero = (0,) * inp.rank
    if not delta.interior_contains(zero):
        return False
    return all(c == -1 for _, c in delta.inequalities())


def cy_period(inp: TropicalInput, divisors=(), branch: BranchChoice | None = None) -> LogPolynomial:
    """Period of the complete intersection of nef divisors in the Calabi-Yau setting.

    Requires a reflexive Newton polytope and coefficients with
    -c_m / c_w = 1 at w = 0.
    """
    if not is_reflexive(inp):
        raise PeriodError("Newton polytope is not reflexive")
    w = (0,) * inp.rank
    fan = fan_at(inp, w)
    cw = inp.complex_coeff(inp.index_of(w))
    for j in fan.point_indices:
        if abs(-inp.complex_coeff(j) / cw - 1) > 1e-12:
            raise PeriodError("coefficients do not match the Calabi-Yau normalization", point=j)
    from .chow import structure_sheaf_class

    E = structure_sheaf_class(list(divisors), fan)
    return period_asymptotic(inp, 1, w, w, E, branch)
