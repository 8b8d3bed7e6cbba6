"""Instance files, weight files, K-class expressions and canonical serialization."""

from __future__ import annotations

import hashlib
import json
import re
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from .chow import KClass, ToricDivisor
from .errors import SchemaError
from .minkowski import MinkowskiWeight, balance_check, fundamental, ones
from .polytope import LatticePolytope
from .tropical import PolarCoefficient, TropicalInput, validate

SCHEMA_ID = "tropcycles/instance/1"
FIELD_ORDER = ("schema", "name", "rank", "points", "lambda", "coefficients", "triangulation", "branch")


def instance_schema() -> dict:
    text = resources.files("tropcycles").joinpath("data/instance.schema.json").read_text()
    return json.loads(text)


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def parse_rational(text, pointer="") -> Fraction:
    """Parse "p", "p/q" or a decimal string exactly."""
    if not isinstance(text, str):
        raise SchemaError("rational numbers must be strings", pointer=pointer)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"malformed rational {text!r}", pointer=pointer) from None


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def _parse_coefficient(c, pointer):
    if isinstance(c, dict):
        return PolarCoefficient(parse_rational(c["abs"], pointer + "/abs"),
                                parse_rational(c["arg_times_pi"], pointer + "/arg_times_pi"))
    return (parse_rational(c[0], pointer + "/0"), parse_rational(c[1], pointer + "/1"))


def instance_from_dict(doc: dict, check=True) -> TropicalInput:
    """Build (and by default validate) an instance from parsed JSON."""
    validator = jsonschema.Draft202012Validator(instance_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, pointer=_pointer(err.absolute_path))
    rank = doc["rank"]
    for i, p in enumerate(doc["points"]):
        if len(p) != rank:
            raise SchemaError("point has the wrong length", pointer=f"/points/{i}")
    n = len(doc["points"])
    for key in ("lambda", "coefficients"):
        if len(doc[key]) != n:
            raise SchemaError(f"expected {n} entries", pointer=f"/{key}")
    lam = [parse_rational(x, f"/lambda/{i}") for i, x in enumerate(doc["lambda"])]
    coeffs = [_parse_coefficient(c, f"/coefficients/{i}") for i, c in enumerate(doc["coefficients"])]
    tri = None
    if "triangulation" in doc:
        for i, s in enumerate(doc["triangulation"]):
            if any(j >= n for j in s):
                raise SchemaError("point index out of range", pointer=f"/triangulation/{i}")
        tri = tuple(tuple(sorted(s)) for s in doc["triangulation"])
    branch = {}
    for i, b in enumerate(doc.get("branch", [])):
        if b["w"] >= n or b["m"] >= n:
            raise SchemaError("point index out of range", pointer=f"/branch/{i}")
        branch[(b["w"], b["m"])] = parse_rational(b["arg_times_pi"], f"/branch/{i}/arg_times_pi")
    inp = TropicalInput(doc["points"], lam, coeffs, tri, branch, doc.get("name", ""))
    if check:
        validate(inp)
    return inp


def load(path) -> TropicalInput:
    """Read, schema-check and validate an instance file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise SchemaError("instance file not found", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return instance_from_dict(doc)


def instance_to_dict(inp: TropicalInput) -> dict:
    doc = {"schema": SCHEMA_ID}
    if inp.name:
        doc["name"] = inp.name
    doc["rank"] = inp.rank
    doc["points"] = [list(p) for p in inp.points]
    doc["lambda"] = [format_rational(x) for x in inp.lam]
    coeffs = []
    for c in inp.coeffs:
        if isinstance(c, PolarCoefficient):
            coeffs.append({"abs": format_rational(c.modulus), "arg_times_pi": format_rational(c.arg_times_pi)})
        else:
            coeffs.append([format_rational(c[0]), format_rational(c[1])])
    doc["coefficients"] = coeffs
    if inp.triangulation is not None:
        doc["triangulation"] = [list(s) for s in inp.triangulation]
    if inp.branch:
        doc["branch"] = [{"w": w, "m": m, "arg_times_pi": format_rational(t)} for (w, m), t in sorted(inp.branch.items())]
    return doc


def serialize(inp: TropicalInput) -> bytes:
    """Canonical bytes: fixed key order, one top-level key per line, compact values."""
    doc = instance_to_dict(inp)
    lines = [f"  {json.dumps(k)}: {json.dumps(doc[k], separators=(', ', ': '))}" for k in FIELD_ORDER if k in doc]
    return ("{\n" + ",\n".join(lines) + "\n}\n").encode()


def instance_hash(inp: TropicalInput) -> str:
    return hashlib.sha256(serialize(inp)).hexdigest()


def dumps_result(obj) -> str:
    """Deterministic JSON for result payloads."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (frozenset, set)):
        return sorted(x)
    if hasattr(x, "to_json"):
        return x.to_json()
    raise TypeError(f"not serializable: {type(x).__name__}")


# ---------------------------------------------------------------- small argument parsers


def parse_vector(text: str, pointer="") -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise SchemaError(f"expected comma-separated integers, got {text!r}", pointer=pointer) from None


def parse_rational_vector(text: str, pointer="") -> tuple:
    return tuple(parse_rational(x.strip(), pointer) for x in text.split(","))


# ---------------------------------------------------------------- Minkowski weights


def weight_from_dict(fan, doc: dict, check=True) -> MinkowskiWeight:
    """``{"codim": k, "values": {"i,j,...": n}}`` with keys the ray indices of cones."""
    if not isinstance(doc, dict) or "values" not in doc or "codim" not in doc:
        raise SchemaError("weight file needs 'codim' and 'values'")
    codim = doc["codim"]
    if not isinstance(codim, int) or not 0 <= codim <= fan.rank:
        raise SchemaError("codim out of range", pointer="/codim")
    values = {}
    for key, v in doc["values"].items():
        ptr = "/values/" + key
        try:
            cone = frozenset(int(i) for i in key.split(",")) if key else frozenset()
        except ValueError:
            raise SchemaError("cone keys are comma-separated ray indices", pointer=ptr) from None
        if len(cone) != fan.rank - codim or not fan.has_cone(cone):
            raise SchemaError("not a cone of the right dimension", pointer=ptr)
        if not isinstance(v, int):
            raise SchemaError("weight values must be integers", pointer=ptr)
        values[cone] = v
    a = MinkowskiWeight(fan, codim, values, check=False)
    if check:
        res = balance_check(a)
        if not res.ok:
            from .errors import Unbalanced

            raise Unbalanced("weight is not balanced", cone=sorted(res.cone) if res.cone is not None else None)
    return a


def load_weight(fan, spec: str, codim: int | None = None, check=True) -> MinkowskiWeight:
    """A weight file path, or a built-in name: ``ones`` (codim required), ``ones:k``, ``fundamental``."""
    if spec == "fundamental":
        return fundamental(fan)
    if spec == "ones" or spec.startswith("ones:"):
        k = int(spec[5:]) if ":" in spec else codim
        if k is None:
            raise SchemaError("codimension needed for built-in 'ones'")
        return ones(fan, k)
    path = Path(spec)
    if not path.exists():
        raise SchemaError("weight file not found", path=spec)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=spec) from None
    return weight_from_dict(fan, doc, check)


def weight_to_dict(a: MinkowskiWeight) -> dict:
    return {"codim": a.codim, "values": a.to_json()}


# ---------------------------------------------------------------- K-classes

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+)\s*\*\s*)?O(?:\(([^)]*)\))?\s*")


def parse_kclass(fan, text: str) -> KClass:
    """Parse ``O``, ``O(a_0,...,a_n)``, ``2*O(...)`` joined by + and -; ``@file`` reads JSON.

    The JSON form is ``{"terms": [{"coeff": n, "divisor": [a_0, ...]}]}``.
    Divisor coefficients refer to the rays of the fan in input order.
    """
    if text.startswith("@"):
        try:
            doc = json.loads(Path(text[1:]).read_text())
            terms = [(int(t["coeff"]), tuple(int(a) for a in t["divisor"])) for t in doc["terms"]]
        except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SchemaError(f"bad K-class file: {exc}") from None
    else:
        terms = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TERM.match(text, pos)
            if not m or m.end() == pos or (terms and not m.group(1)):
                raise SchemaError(f"cannot parse K-class near {text[pos:]!r}")
            sign = -1 if m.group(1) == "-" else 1
            coeff = sign * int(m.group(2) or 1)
            if m.group(3) is None or not m.group(3).strip():
                div = (0,) * len(fan.rays)
            else:
                div = parse_vector(m.group(3).replace(" ", ""))
            terms.append((coeff, div))
            pos = m.end()
        if not terms:
            raise SchemaError("empty K-class")
    for _, div in terms:
        if len(div) != len(fan.rays):
            raise SchemaError("divisor needs one coefficient per ray", rays=len(fan.rays))
    return KClass(fan, [(c, ToricDivisor(fan, div)) for c, div in terms])


def parse_polytope(text: str) -> LatticePolytope:
    """JSON list of integer vertices in N."""
    try:
        verts = json.loads(text)
        verts = [tuple(int(x) for x in v) for v in verts]
    except (ValueError, TypeError):
        raise SchemaError("polytope must be a JSON list of integer vectors") from None
    if not verts:
        raise SchemaError("polytope needs at least one vertex")
    return LatticePolytope(verts, "N")
