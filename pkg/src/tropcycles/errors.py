"""Error classes shared by the library and the command line.

Every error carries a short machine-readable ``code`` and the process exit
status the CLI uses when it is raised.
"""

from __future__ import annotations


class TropError(Exception):
    code = "error"
    exit_code = 10

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_dict(self):
        out = {"code": self.code, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


class SchemaError(TropError):
    code = "schema"
    exit_code = 3

    def __init__(self, message, pointer="", **details):
        super().__init__(message, pointer=pointer, **details)
        self.pointer = pointer


class NonConvexLambda(TropError):
    code = "non_convex_lambda"
    exit_code = 4


class NotATriangulation(TropError):
    code = "not_a_triangulation"
    exit_code = 5


class NonUnimodular(TropError):
    code = "non_unimodular"
    exit_code = 6


class NoInteriorPoint(TropError):
    code = "no_interior_point"
    exit_code = 7


class Unbalanced(TropError):
    code = "unbalanced"
    exit_code = 8


class GenericityError(TropError):
    code = "not_generic"
    exit_code = 9


class GeometryError(TropError):
    """Lattice or polytope precondition failures (rank, primitivity, refinement)."""

    code = "geometry"
    exit_code = 11


class AlgebraError(TropError):
    """K-theory and Chow ring failures (no ample class, infeasible system, non-integral class)."""

    code = "algebra"
    exit_code = 12


class PeriodError(TropError):
    code = "period"
    exit_code = 13


class FormatError(TropError):
    code = "format"
    exit_code = 14


class UsageError(TropError):
    code = "usage"
    exit_code = 2
