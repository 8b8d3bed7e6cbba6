"""Cell complexes lifting tropical cycles: products of flag simplices and polytope faces.

A cell is ``(base, fiber)``: ``base`` is a tuple of cones (the vertices
b_sigma of a simplex in the boundary of the dual cell, in increasing
dimension) and ``fiber`` is the vertex set of a face of a lattice polytope
in N.  The integer attached to a cell is its coefficient relative to a
canonical orientation: the base is oriented by its vertex order and the
fiber by the wedge of a tangent basis whose first nonzero coordinate is
positive.

Boundaries use ``d(A x B) = dA x B + (-1)^{dim A} A x dB`` and orient a facet
G of a face F so that (outward direction) ^ (orientation of G) agrees with
the orientation of F.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .chow import KClass, anti_nef_decompose, chern, is_anti_nef, leading_index_and_weight
from .errors import FormatError, GeometryError
from .lattice import MultiVector, row_reduce, wedge, wedge_vectors
from .minkowski import MinkowskiWeight, tropical_intersection
from .polytope import LatticePolytope, face_for_cone, lattice_volume, refines
from .tropical import TropicalCycle, dual_face_points, fan_at, fan_flags, flag_coefficient


# ---------------------------------------------------------------- fiber orientation


@lru_cache(maxsize=None)
def _tangent(vertices: frozenset):
    """(dimension, canonical tangent multivector) of conv(vertices)."""
    pts = sorted(vertices)
    rank = len(pts[0])
    if len(pts) == 1:
        return 0, MultiVector.scalar(rank, 1, "N")
    diffs = [[Fraction(a) - Fraction(b) for a, b in zip(p, pts[0])] for p in pts[1:]]
    basis, _ = row_reduce(diffs)
    omega = wedge_vectors(basis, rank=rank, lattice_tag="N")
    if omega.first_nonzero() < 0:
        omega = -omega
    return len(basis), omega


def orientation_sign(vertices: frozenset, multivector: MultiVector) -> int:
    """Sign of a multivector parallel to the tangent space of the face, relative to the canonical one."""
    dim, omega = _tangent(frozenset(vertices))
    if multivector.degree != dim:
        raise GeometryError("orientation has the wrong degree", expected=dim, got=multivector.degree)
    key, ref = omega.coeffs[0]
    val = multivector[key]
    if val == 0 or any(multivector[k] * ref != c * val for k, c in omega.coeffs) \
            or len(multivector.coeffs) != len(omega.coeffs):
        raise GeometryError("multivector is not tangent to the face")
    return 1 if (val > 0) == (ref > 0) else -1


def _as_n_vector(v):
    return MultiVector(len(v), 1, {(i,): Fraction(x) for i, x in enumerate(v)}, "N")


@lru_cache(maxsize=None)
def oriented_facets(vertices: frozenset):
    """Facets of a face with the sign of their induced orientation."""
    vertices = frozenset(vertices)
    dim, omega = _tangent(vertices)
    if dim == 0:
        return ()
    P = LatticePolytope(sorted(vertices))
    out = []
    for G in P.facets():
        g = frozenset(G.vertices)
        outside = next(v for v in P.vertices if v not in g)
        nu = tuple(a - b for a, b in zip(G.vertices[0], outside))
        _, omega_g = _tangent(g)
        s = orientation_sign(vertices, wedge(_as_n_vector(nu), omega_g))
        out.append((g, s))
    return tuple(sorted(out, key=lambda t: sorted(t[0])))


# ---------------------------------------------------------------- chains


@dataclass
class CellChain:
    """Formal integer combination of product cells."""

    cells: dict = field(default_factory=dict)  # (base, fiber) -> int
    points: dict = field(default_factory=dict)  # cone -> b_sigma, for export
    rank: int = 0

    def add(self, base, fiber, coeff):
        if coeff == 0:
            return
        key = (tuple(frozenset(c) for c in base), frozenset(fiber))
        v = self.cells.get(key, 0) + coeff
        if v:
            self.cells[key] = v
        else:
            self.cells.pop(key, None)

    def __add__(self, other):
        out = CellChain(dict(self.cells), {**self.points, **other.points}, self.rank or other.rank)
        for (b, f), c in other.cells.items():
            out.add(b, f, c)
        return out

    def scale(self, k):
        out = CellChain({}, dict(self.points), self.rank)
        for (b, f), c in self.cells.items():
            out.add(b, f, k * c)
        return out

    def is_zero(self):
        return not self.cells

    def __len__(self):
        return len(self.cells)

    def sorted_cells(self):
        def order(item):
            (b, f), _ = item
            return (len(b), [sorted(c) for c in b], sorted(f))

        return sorted(self.cells.items(), key=order)

    def to_json(self):
        rows = []
        for (b, f), c in self.sorted_cells():
            dim, omega = _tangent(f)
            rows.append({
                "base": [sorted(cone) for cone in b],
                "base_points": [[str(x) for x in self.points[cone]] for cone in b] if self.points else [],
                "fiber": [[str(x) for x in v] for v in sorted(f)],
                "fiber_dim": dim,
                "fiber_orientation": omega.to_json(),
                "coefficient": c,
            })
        return {"cells": rows}


def chain_boundary(chain: CellChain) -> CellChain:
    out = CellChain({}, dict(chain.points), chain.rank)
    for (base, fiber), c in chain.cells.items():
        if len(base) > 1:
            for i in range(len(base)):
                out.add(base[:i] + base[i + 1:], fiber, c if i % 2 == 0 else -c)
        sign = -1 if (len(base) - 1) % 2 else 1
        for g, s in oriented_facets(fiber):
            out.add(base, g, sign * s * c)
    return out


# ---------------------------------------------------------------- c(P)


def _face(P, cone, fan, cache):
    if cone not in cache:
        cache[cone] = frozenset(face_for_cone(P, cone, fan, check=False).vertices)
    return cache[cone]


def cycle_from_polytope(inp, w, P: LatticePolytope, fan=None) -> CellChain:
    """sum_q sum_{S: dim P_S = d - q} (-1)^q Delta_S x P_S with P_S oriented by f(S)."""
    if fan is None:
        fan = fan_at(inp, w)
    if not refines(fan, P):
        raise GeometryError("fan does not refine normal fan")
    d = fan.rank - 1
    chain = CellChain({}, dual_face_points(inp, w) if inp is not None else {}, fan.rank)
    cache = {}
    for q in range(d + 1):
        for S in fan_flags(fan, q):
            F = _face(P, S.top, fan, cache)
            dim, _ = _tangent(F)
            if dim != d - q:
                continue
            s = orientation_sign(F, flag_coefficient(fan, S))
            chain.add(S.cones, F, (-1) ** q * s)
    return chain


def cycle_from_kclass(inp, w, E: KClass) -> CellChain:
    """c(E) = sum_j l_j c(P_j) for an anti-nef expression of E (decomposed first if needed)."""
    if not is_anti_nef(E):
        E = anti_nef_decompose(E)
    out = CellChain({}, {}, E.fan.rank)
    for l, L in E.bundles():
        out = out + cycle_from_polytope(inp, w, (-L).polytope(), E.fan).scale(l)
    return out


@dataclass
class CycleReport:
    ok: bool
    residual: CellChain
    mechanisms: dict

    def to_json(self):
        return {"ok": self.ok, "mechanisms": self.mechanisms, "residual": self.residual.to_json()["cells"]}


def assert_cycle(chain: CellChain) -> CycleReport:
    """Check that the boundary vanishes, separately for each cancellation mechanism.

    Boundary terms fall into three groups: faces of base simplices skipping
    a dimension (cancelling in flag pairs), faces along matching fiber facets
    (one cell's fiber facet against the next flag's cell), and the remaining
    top-cone removals (cancelling between cones across a wall).
    """
    flag_cells = {}
    for (base, fiber), c in chain.cells.items():
        flag_cells.setdefault(base, []).append((fiber, c))
    groups = {"flag_pairs": CellChain(), "fiber_facets": CellChain(), "wall_pairs": CellChain()}
    for (base, fiber), c in chain.cells.items():
        q = len(base) - 1
        for i in range(len(base) - 1 if len(base) > 1 else 0):
            groups["flag_pairs"].add(base[:i] + base[i + 1:], fiber, c if i % 2 == 0 else -c)
        if len(base) > 1:
            lower = base[:-1]
            dim = _tangent(fiber)[0]
            lower_dims = {_tangent(f)[0] for f, _ in flag_cells.get(lower, [])}
            target = "fiber_facets" if dim + 1 in lower_dims else "wall_pairs"
            groups[target].add(lower, fiber, c if q % 2 == 0 else -c)
        sign = -1 if q % 2 else 1
        for g, s in oriented_facets(fiber):
            groups["fiber_facets"].add(base, g, sign * s * c)
    total = chain_boundary(chain)
    mech = {k: len(v) == 0 for k, v in groups.items()}
    return CycleReport(total.is_zero() and all(mech.values()), total, mech)


# ---------------------------------------------------------------- fiber profiles


@dataclass
class FiberProfile:
    """Per flag: signed fiber volume sum_j l_j vol(P_{j,S}) and the fiber class coefficient."""

    k: int
    weight: MinkowskiWeight
    volumes: dict  # q -> {flag: Fraction}
    classes: dict  # flag at q = d - k -> integer coefficient of f(S)
    matches_weight: bool
    class_sign: int
    support: list

    def to_json(self):
        return {
            "k": self.k,
            "a_E": self.weight.to_json(),
            "volumes": {str(q): [{"flag": list(f.gens), "volume": str(v)} for f, v in sorted(m.items(), key=lambda t: t[0].gens)]
                        for q, m in sorted(self.volumes.items())},
            "fiber_classes": [{"flag": list(f.gens), "coefficient": c} for f, c in sorted(self.classes.items(), key=lambda t: t[0].gens)],
            "matches_a_E": self.matches_weight,
            "class_over_a_E": self.class_sign,
            "support_flags": len(self.support),
        }


def lift_profile(inp, w, E: KClass, check=True) -> FiberProfile:
    """Fiber volumes of c(E) over each flag, checked against the Chern character.

    For every flag S at level q the signed volume equals
    (-1)^(d-q) deg(ch_{d-q}(E) . V(sigma[S])); it vanishes for q >= d+1-k.
    The fiber class coefficient at q = d-k is (-1)^q times the signed volume,
    which equals (-1)^(k+1) a_E(sigma[S]).
    """
    from .errors import AlgebraError

    fan = E.fan
    d = fan.rank - 1
    k, a_E = leading_index_and_weight(E)
    D = E if is_anti_nef(E) else anti_nef_decompose(E)
    polys = [(l, (-L).polytope()) for l, L in D.bundles()]
    ch = chern(E)
    caches = [{} for _ in polys]
    volumes = {}
    for q in range(d + 1):
        vq = {}
        for S in fan_flags(fan, q):
            total = Fraction(0)
            for (l, P), cache in zip(polys, caches):
                F = _face(P, S.top, fan, cache)
                if _tangent(F)[0] == d - q:
                    total += l * lattice_volume(LatticePolytope(sorted(F)))
            vq[S] = total
            if check:
                expected = (-1) ** (d - q) * Fraction(ch.component(d - q)(S.top))
                if total != expected:
                    raise AlgebraError("fiber volume disagrees with the Chern character", flag=list(S.gens), q=q)
                if q >= d + 1 - k and total != 0:
                    raise AlgebraError("fiber volume should vanish", flag=list(S.gens), q=q)
        volumes[q] = vq
    q0 = d - k
    classes = {S: int((-1) ** q0 * v) for S, v in volumes[q0].items()}
    sign = (-1) ** (k + 1)
    if check:
        for S, c in classes.items():
            if c != sign * a_E(S.top):
                raise AlgebraError("fiber class disagrees with the leading weight", flag=list(S.gens))
    matches = all(c == a_E(S.top) for S, c in classes.items())
    support = [S for S, c in classes.items() if c != 0]
    return FiberProfile(k, a_E, volumes, classes, matches, sign, support)


# ---------------------------------------------------------------- intersections of lifts


def lift_sign_exponent(d: int, q: int) -> int:
    return d * (d + 1) // 2 + d - q


def lift_intersection(inp, w1, a1: MinkowskiWeight, w2, a2: MinkowskiWeight, q: int | None = None, m0=None) -> int:
    """Intersection number of lifts: (-1)^(d(d+1)/2 + d - q) times the tropical one."""
    d = inp.d
    if q is None:
        q = d - a1.codim
    return (-1) ** lift_sign_exponent(d, q) * tropical_intersection(inp, w1, a1, w2, a2, m0)


# ---------------------------------------------------------------- export


def export_complex(chain, fmt: str = "json") -> bytes:
    """Serialize a tropical cycle or cell chain as JSON, or as OBJ when the rank is at most 3."""
    if fmt == "json":
        return (json.dumps(chain.to_json(), indent=2, sort_keys=True) + "\n").encode()
    if fmt != "obj":
        raise FormatError("unknown export format", format=fmt)
    if isinstance(chain, TropicalCycle):
        rank = chain.fan.rank
        items = [(f.cones, "coefficient " + json.dumps(chain.entries[f].to_json())) for f in chain.support()]
        points = chain.points
    else:
        rank = chain.rank
        items = [(b, f"fiber {[[str(x) for x in v] for v in sorted(f)]} coefficient {c}") for (b, f), c in chain.sorted_cells()]
        points = chain.points
    if rank - 1 > 2:
        raise FormatError("OBJ export supports d <= 2 only", d=rank - 1)
    lines = ["# tropcycles cell export"]
    index = {}
    for base, _ in items:
        for cone in base:
            if cone not in index:
                index[cone] = len(index) + 1
                p = [float(x) for x in points[cone]] + [0.0] * (3 - rank)
                lines.append("v " + " ".join(f"{x:.12g}" for x in p))
    for base, meta in items:
        lines.append(f"# {meta}")
        ids = " ".join(str(index[c]) for c in base)
        lines.append(("p " if len(base) == 1 else "l " if len(base) == 2 else "f ") + ids)
    return ("\n".join(lines) + "\n").encode()
