"""Exact linear algebra on a pair of dual lattices M and N of equal rank.

Vectors are plain tuples of ``int`` or ``Fraction``.  The small dataclasses
below tag them with the lattice they live in; the numerical helpers accept
either form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form, invariant_factors

from .errors import GeometryError

INFINITE_INDEX = math.inf


def _coords(v):
    return tuple(v.coords) if hasattr(v, "coords") else tuple(v)


@dataclass(frozen=True)
class LatticeVector:
    coords: tuple
    lattice_tag: str = "M"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if self.lattice_tag not in ("M", "N"):
            raise GeometryError("lattice tag must be M or N")

    @property
    def rank(self):
        return len(self.coords)


@dataclass(frozen=True)
class RationalVector:
    coords: tuple
    lattice_tag: str = "M"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    @property
    def rank(self):
        return len(self.coords)


@dataclass(frozen=True)
class VolumeForm:
    """Generator of the top exterior power of N, as a sign over the standard basis."""

    rank: int
    orientation: int = 1

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise GeometryError("volume form orientation must be +1 or -1")

    def evaluate(self, vectors):
        """Pairing of the wedge of ``rank`` vectors of M with the volume form."""
        return self.orientation * det([_coords(v) for v in vectors])


@dataclass(frozen=True)
class MultiVector:
    """Element of the k-th exterior power, keyed by sorted index subsets."""

    rank: int
    degree: int
    coeffs: tuple = ()
    lattice_tag: str = "M"
    _lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not 0 <= self.degree <= self.rank:
            raise GeometryError("degree exceeds rank", degree=self.degree, rank=self.rank)
        items = self.coeffs.items() if isinstance(self.coeffs, dict) else self.coeffs
        clean = tuple(sorted((tuple(k), c) for k, c in items if c != 0))
        for k, _ in clean:
            if len(k) != self.degree or list(k) != sorted(set(k)):
                raise GeometryError("multivector key is not a sorted subset of the right size")
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "_lookup", dict(clean))

    @classmethod
    def from_vector(cls, v, lattice_tag=None):
        c = _coords(v)
        tag = lattice_tag or getattr(v, "lattice_tag", "M")
        return cls(len(c), 1, {(i,): x for i, x in enumerate(c)}, tag)

    @classmethod
    def scalar(cls, rank, value, lattice_tag="M"):
        return cls(rank, 0, {(): value}, lattice_tag)

    def __getitem__(self, subset):
        return self._lookup.get(tuple(subset), 0)

    def items(self):
        return self.coeffs

    def is_zero(self):
        return not self.coeffs

    def value(self):
        """The number a degree-0 multivector stands for."""
        if self.degree != 0:
            raise GeometryError("only degree-0 multivectors have a scalar value")
        return self[()]

    def _same_space(self, other):
        if (self.rank, self.degree, self.lattice_tag) != (other.rank, other.degree, other.lattice_tag):
            raise GeometryError("multivectors live in different spaces")

    def __add__(self, other):
        self._same_space(other)
        out = dict(self._lookup)
        for k, c in other.coeffs:
            out[k] = out.get(k, 0) + c
        return MultiVector(self.rank, self.degree, out, self.lattice_tag)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return MultiVector(self.rank, self.degree, {k: c * factor for k, c in self.coeffs}, self.lattice_tag)

    def first_nonzero(self):
        return self.coeffs[0][1] if self.coeffs else 0

    def to_json(self):
        return [[list(k), str(c)] for k, c in self.coeffs]


def _merge_sign(a, b):
    inversions = sum(1 for i in a for j in b if i > j)
    return -1 if inversions % 2 else 1


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    if a.rank != b.rank or a.lattice_tag != b.lattice_tag:
        raise GeometryError("wedge factors live in different lattices")
    if a.degree + b.degree > a.rank:
        raise GeometryError("degree exceeds rank", degree=a.degree + b.degree, rank=a.rank)
    out = {}
    for ka, ca in a.coeffs:
        sa = set(ka)
        for kb, cb in b.coeffs:
            if sa.intersection(kb):
                continue
            key = tuple(sorted(ka + kb))
            out[key] = out.get(key, 0) + _merge_sign(ka, kb) * ca * cb
    return MultiVector(a.rank, a.degree + b.degree, out, a.lattice_tag)


def wedge_vectors(vectors, rank=None, lattice_tag="M"):
    """Wedge of a sequence of vectors; the empty wedge is the scalar 1."""
    vectors = [_coords(v) for v in vectors]
    if rank is None:
        if not vectors:
            raise GeometryError("rank needed for an empty wedge")
        rank = len(vectors[0])
    out = MultiVector.scalar(rank, 1, lattice_tag)
    for v in vectors:
        out = wedge(out, MultiVector.from_vector(v, lattice_tag))
    return out


def contract_volume(front: MultiVector, vol: VolumeForm | None = None) -> MultiVector:
    """The element X -> <front ^ X, vol(N)> of the complementary exterior power of N.

    Args:
        front: multivector of degree k on the M side.
        vol: volume form; the standard orientation when omitted.

    Returns:
        Multivector of degree rank - k tagged N.
    """
    if front.lattice_tag != "M":
        raise GeometryError("contraction expects an M-side multivector")
    r = front.rank
    orient = 1 if vol is None else vol.orientation
    full = tuple(range(r))
    out = {}
    for key, c in front.coeffs:
        rest = tuple(i for i in full if i not in key)
        out[rest] = out.get(rest, 0) + orient * _merge_sign(key, rest) * c
    return MultiVector(r, r - front.degree, out, "N")


def pair(m_side: MultiVector, n_side: MultiVector):
    """Determinant pairing between the k-th exterior powers of M and N."""
    if m_side.rank != n_side.rank or m_side.degree != n_side.degree:
        raise GeometryError("pairing needs equal rank and degree")
    if m_side.lattice_tag == n_side.lattice_tag:
        raise GeometryError("pairing needs one M-side and one N-side multivector")
    return sum(c * n_side[k] for k, c in m_side.coeffs)


# ---------------------------------------------------------------- matrices


def det(rows):
    """Exact determinant by fraction-free elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    if any(len(r) != n for r in m):
        raise GeometryError("determinant of a non-square matrix")
    if all(isinstance(x, int) for r in m for x in r):
        return _bareiss(m)
    m = [[Fraction(x) for x in r] for r in m]
    sign = 1
    result = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for i in range(col + 1, n):
            f = m[i][col] / p
            if f:
                for j in range(col, n):
                    m[i][j] -= f * m[col][j]
    return sign * result


def _bareiss(m):
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def row_reduce(rows):
    """Reduced row echelon form over Q; returns (rref rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows):
    return len(row_reduce(rows)[1]) if rows else 0


def solve(columns, target):
    """Solve sum_i x_i * columns[i] = target exactly.

    Returns the unique solution as a list of Fractions, or None when the
    system is singular or inconsistent.
    """
    n = len(target)
    if len(columns) != n:
        return None
    aug = [[Fraction(columns[j][i]) for j in range(n)] + [Fraction(target[i])] for i in range(n)]
    red, piv = row_reduce(aug)
    if piv != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def in_span(columns, target):
    if not columns:
        return all(t == 0 for t in target)
    rows = [list(c) for c in columns]
    return rank(rows) == rank(rows + [list(target)])


def nullspace(rows, ncols=None):
    """Basis of the rational kernel of the matrix with the given rows."""
    if not rows:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    n = len(rows[0])
    red, piv = row_reduce(rows)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(piv):
            v[p] = -red[r][f]
        basis.append(tuple(v))
    return basis


def integer_scale(v):
    """Smallest positive multiple of a rational vector that is integral and primitive."""
    v = [Fraction(x) for x in v]
    if all(x == 0 for x in v):
        return tuple(0 for _ in v)
    den = reduce(math.lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(math.gcd, (abs(x) for x in ints), 0)
    return tuple(x // g for x in ints)


def dot(a, b):
    return sum(x * y for x, y in zip(_coords(a), _coords(b)))


def is_primitive(v):
    c = _coords(v)
    return all(isinstance(x, int) or Fraction(x).denominator == 1 for x in c) and \
        reduce(math.gcd, (abs(int(x)) for x in c), 0) == 1


# ---------------------------------------------------------------- indices


def sublattice_index(gens_a, gens_b=()):
    """Index of the lattice spanned by both generator lists inside Z^rank.

    Computed from the invariant factors of the stacked generator matrix;
    ``INFINITE_INDEX`` when the span is not of full rank.
    """
    gens = [list(map(int, _coords(g))) for g in list(gens_a) + list(gens_b)]
    if not gens:
        return INFINITE_INDEX
    n = len(gens[0])
    factors = invariant_factors(Matrix(gens))
    nonzero = [abs(int(f)) for f in factors if f != 0]
    if len(nonzero) < n:
        return INFINITE_INDEX
    return math.prod(nonzero)


# ---------------------------------------------------------------- quotients


@dataclass(frozen=True)
class QuotientMap:
    """Projection of Z^rank onto Z^rank / Z*ray in fixed saturated coordinates.

    ``reducer`` is a unimodular matrix sending ``ray`` to the first standard
    basis vector; quotient coordinates are the remaining rows.
    """

    ray: tuple
    reducer: tuple

    def __call__(self, v):
        c = _coords(v)
        return tuple(dot(row, c) for row in self.reducer[1:])

    def lift_basis(self):
        """Integer vectors mapping onto the quotient's standard basis."""
        inv = Matrix(self.reducer).inv()
        n = len(self.ray)
        return [tuple(int(inv[i, j]) for i in range(n)) for j in range(1, n)]


def _unimodular_reducer(v):
    # column-style Euclid: accumulate row operations U with U v = (g, 0, ..., 0)
    n = len(v)
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    w = list(v)
    while True:
        nz = [i for i in range(n) if w[i] != 0]
        if len(nz) <= 1:
            break
        p = min(nz, key=lambda i: abs(w[i]))
        for i in nz:
            if i != p:
                q = w[i] // w[p]
                w[i] -= q * w[p]
                u[i] = [a - q * b for a, b in zip(u[i], u[p])]
    p = next(i for i in range(n) if w[i] != 0)
    if p != 0:
        w[0], w[p] = w[p], w[0]
        u[0], u[p] = u[p], u[0]
    if w[0] < 0:
        w[0] = -w[0]
        u[0] = [-a for a in u[0]]
    return u, w[0]


def quotient_map(ray):
    ray = tuple(int(x) for x in _coords(ray))
    if not is_primitive(ray):
        raise GeometryError("quotient ray must be primitive", ray=list(ray))
    u, g = _unimodular_reducer(ray)
    if g != 1:
        raise GeometryError("quotient ray must be primitive", ray=list(ray))
    # normalise the complement rows by Hermite reduction so the chart is canonical
    rest = Matrix(u[1:])
    h = hermite_normal_form(rest.T).T if rest.rows else rest
    rows = [tuple(u[0])] + [tuple(int(x) for x in h.row(i)) for i in range(h.rows)]
    if abs(det(rows)) != 1:
        rows = [tuple(u[0])] + [tuple(r) for r in u[1:]]
    return QuotientMap(ray, tuple(rows))


def quotient_project(v, ray):
    """Image of ``v`` in the rank-(n-1) lattice Z^n / Z*ray."""
    return quotient_map(ray)(v)
