"""Command line entry point: ``tropcycles <command> INSTANCE [options]``.

Every command prints one JSON envelope holding the command name, the
instance hash, the seed, the result payload and the elapsed time.  Errors
print an envelope with an ``error`` member and exit with the error's code.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

from . import io
from .chow import (
    anti_nef_decompose,
    chern,
    leading_index_and_weight,
    weight_to_kclass,
)
from .errors import TropError, Unbalanced, UsageError
from .gamma import BranchChoice, decompose_v, period_asymptotic
from .lift import (
    assert_cycle,
    cycle_from_kclass,
    cycle_from_polytope,
    export_complex,
    lift_intersection,
    lift_profile,
)
from .minkowski import balance_check, cup, default_generic, intersection_enumerate, psi, tropical_intersection
from .tropical import cycle_from_weight, fan_at, interior_points

SEED_ENV = "TROPCYCLES_SEED"


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer") from None


def _point(inp, text, flag):
    w = io.parse_vector(text, flag)
    if len(w) != inp.rank:
        raise UsageError(f"{flag} needs {inp.rank} coordinates")
    return w


def _fan(inp, args, flag="--w"):
    w = _point(inp, getattr(args, flag.lstrip("-").replace("-", "_")), flag)
    return w, fan_at(inp, w)


def _m0(fan, args):
    if getattr(args, "m0", None):
        return io.parse_rational_vector(args.m0, "--m0")
    return default_generic(fan, _seed(args)).m0


def _weight(fan, spec, codim, check=True):
    return io.load_weight(fan, spec, codim, check)


# ---------------------------------------------------------------- commands


def cmd_validate(inp, args):
    tri = inp.tri
    return {"simplices": [list(s) for s in tri.simplices], "interior_points": [list(w) for w in interior_points(inp)],
            "d": inp.d}


def cmd_fans(inp, args):
    pts = [_point(inp, args.w, "--w")] if args.w else interior_points(inp)
    out = []
    for w in pts:
        fan = fan_at(inp, w)
        out.append({"w": list(w), "rays": [list(r) for r in fan.rays], "point_indices": list(fan.point_indices),
                    "maximal": [sorted(c) for c in fan.maximal], "complete": fan.complete,
                    "unimodular": fan.unimodular})
    return {"fans": out}


def cmd_cycle(inp, args):
    w, fan = _fan(inp, args)
    a = _weight(fan, args.a, args.codim)
    return cycle_from_weight(inp, w, a).to_json()


def cmd_balance(inp, args):
    _, fan = _fan(inp, args)
    a = _weight(fan, args.a, args.codim, check=False)
    res = balance_check(a)
    if not res.ok:
        raise Unbalanced("weight is not balanced", cone=sorted(res.cone),
                         residual=[str(x) for x in res.residual] if res.residual is not None else None)
    return {"balanced": True, "codim": a.codim}


def cmd_cup(inp, args):
    _, fan = _fan(inp, args)
    a = _weight(fan, args.a, args.codim)
    b = _weight(fan, args.b, args.codim_b)
    m0 = _m0(fan, args)
    c = cup(a, b, m0)
    out = {"m0": [str(x) for x in m0], "cup": io.weight_to_dict(c)}
    if c.codim == fan.rank - 1:
        out["psi"] = psi(c)
    return out


def _pair(inp, args):
    w1, f1 = _fan(inp, args, "--w1")
    w2, f2 = _fan(inp, args, "--w2")
    d = inp.d
    c1 = args.codim1 if args.codim1 is not None else (d // 2 if args.a1 == "ones" else None)
    a1 = _weight(f1, args.a1, c1)
    c2 = args.codim2 if args.codim2 is not None else d - a1.codim
    a2 = _weight(f2, args.a2, c2)
    return w1, a1, w2, a2, _m0(f2, args)


def cmd_intersect(inp, args):
    w1, a1, w2, a2, m0 = _pair(inp, args)
    return {"intersection": tropical_intersection(inp, w1, a1, w2, a2, m0), "m0": [str(x) for x in m0]}


def cmd_enumerate(inp, args):
    w1, a1, w2, a2, m0 = _pair(inp, args)
    return intersection_enumerate(inp, w1, a1, w2, a2, m0).to_json()


def cmd_chern(inp, args):
    _, fan = _fan(inp, args)
    E = io.parse_kclass(fan, args.E)
    k, a = leading_index_and_weight(E)
    return {"ch": chern(E).to_json(), "leading_index": k, "leading_weight": io.weight_to_dict(a)}


def cmd_decompose(inp, args):
    _, fan = _fan(inp, args)
    E = io.parse_kclass(fan, args.E)
    return {"anti_nef": anti_nef_decompose(E).to_json()}


def cmd_weight_to_k(inp, args):
    _, fan = _fan(inp, args)
    a = _weight(fan, args.a, args.codim)
    return {"kclass": weight_to_kclass(a).to_json()}


def _lift_chain(inp, args):
    w, fan = _fan(inp, args)
    chosen = [x for x in (args.polytope, args.divisor, args.E) if x]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --polytope, --divisor, --E")
    if args.polytope:
        return cycle_from_polytope(inp, w, io.parse_polytope(args.polytope), fan)
    if args.divisor:
        from .chow import ToricDivisor

        D = ToricDivisor(fan, io.parse_vector(args.divisor, "--divisor"))
        return cycle_from_polytope(inp, w, D.polytope(), fan)
    return cycle_from_kclass(inp, w, io.parse_kclass(fan, args.E))


def cmd_lift(inp, args):
    chain = _lift_chain(inp, args)
    report = assert_cycle(chain)
    return {"cells": chain.to_json()["cells"], "cycle": report.to_json()}


def cmd_lift_intersect(inp, args):
    w1, a1, w2, a2, m0 = _pair(inp, args)
    return {"lift_intersection": lift_intersection(inp, w1, a1, w2, a2, m0=m0)}


def cmd_profile(inp, args):
    w, fan = _fan(inp, args)
    return lift_profile(inp, w, io.parse_kclass(fan, args.E)).to_json()


def cmd_period(inp, args):
    w, fan = _fan(inp, args)
    v = _point(inp, args.v, "--v")
    E = io.parse_kclass(fan, args.E)
    branch = None
    if args.branch:
        branch = BranchChoice({})
        for item in args.branch.split(","):
            try:
                m, t = item.split(":")
                branch.args[int(m)] = float(io.parse_rational(t)) * math.pi
            except ValueError:
                raise UsageError("--branch expects m:arg_times_pi pairs") from None
    dec = decompose_v(inp, args.l, v, w)
    poly = period_asymptotic(inp, args.l, v, w, E, branch)
    out = {"period": poly.to_json(), "tau": list(dec.tau), "p": {str(k): p for k, p in sorted(dec.weights.items())},
           "p_w": dec.p_w}
    if args.eval_at_t is not None:
        val = poly.evaluate(args.eval_at_t)
        out["value_at_t"] = {"t": args.eval_at_t, "value": [val.real, val.imag]}
    return out


def cmd_export(inp, args):
    w, fan = _fan(inp, args)
    if args.a:
        obj = cycle_from_weight(inp, w, _weight(fan, args.a, args.codim))
    else:
        obj = _lift_chain(inp, args)
    data = export_complex(obj, args.format)
    if args.out:
        Path(args.out).write_bytes(data)
        return {"written": args.out, "format": args.format, "bytes": len(data)}
    return {"format": args.format, "content": data.decode()}


def cmd_report(inp, args):
    from .report import write_report

    return write_report(inp, Path(args.out_dir), _seed(args))


COMMANDS = {
    "validate": cmd_validate,
    "fans": cmd_fans,
    "cycle": cmd_cycle,
    "balance": cmd_balance,
    "cup": cmd_cup,
    "intersect": cmd_intersect,
    "enumerate-intersections": cmd_enumerate,
    "chern": cmd_chern,
    "decompose": cmd_decompose,
    "weight-to-k": cmd_weight_to_k,
    "lift": cmd_lift,
    "lift-intersect": cmd_lift_intersect,
    "profile": cmd_profile,
    "period": cmd_period,
    "export": cmd_export,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tropcycles", description="Tropical cycles, Minkowski weights, lifts and period asymptotics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("instance", help="instance JSON file")
        sp.add_argument("--seed", type=int, default=None, help=f"seed for generic vectors (default ${SEED_ENV} or 0)")
        sp.add_argument("--no-timing", action="store_true", help="omit elapsed time from the envelope")
        sp.add_argument("--out-json", default=None, help="also write the envelope to this file")
        return sp

    add("validate", "check the instance and list the triangulation")
    sp = add("fans", "star fans at interior points")
    sp.add_argument("--w")
    for name, text in (("cycle", "tropical cycle of a weight"), ("balance", "check the balancing condition"),
                       ("weight-to-k", "K-class realizing a weight")):
        sp = add(name, text)
        sp.add_argument("--w", required=True)
        sp.add_argument("--a", required=True, help="weight file or built-in (ones, ones:k, fundamental)")
        sp.add_argument("--codim", type=int)
    sp = add("cup", "fan displacement product")
    sp.add_argument("--w", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--codim", type=int)
    sp.add_argument("--codim-b", type=int)
    sp.add_argument("--m0")
    for name, text in (("intersect", "intersection number of two tropical cycles"),
                       ("enumerate-intersections", "list displaced intersection points"),
                       ("lift-intersect", "intersection number of the lifts")):
        sp = add(name, text)
        sp.add_argument("--w1", required=True)
        sp.add_argument("--w2", required=True)
        sp.add_argument("--a1", required=True)
        sp.add_argument("--a2", required=True)
        sp.add_argument("--codim1", type=int)
        sp.add_argument("--codim2", type=int)
        sp.add_argument("--m0")
    for name, text in (("chern", "Chern character and leading weight"), ("decompose", "anti-nef decomposition"),
                       ("profile", "fiber volumes of a lifted K-class")):
        sp = add(name, text)
        sp.add_argument("--w", required=True)
        sp.add_argument("--E", required=True, help="K-class, e.g. 'O-O(-1,0,0,0)' or @file.json")
    for name, text in (("lift", "cell chain of a polytope, divisor or K-class"), ("export", "export a cycle or chain")):
        sp = add(name, text)
        sp.add_argument("--w", required=True)
        sp.add_argument("--polytope", help="JSON list of vertices")
        sp.add_argument("--divisor", help="nef divisor coefficients per ray")
        sp.add_argument("--E")
        if name == "export":
            sp.add_argument("--a", help="export the tropical cycle of this weight instead")
            sp.add_argument("--codim", type=int)
            sp.add_argument("--format", choices=("json", "obj"), default="json")
            sp.add_argument("--out")
    sp = add("period", "leading asymptotics of a period integral")
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--w", required=True)
    sp.add_argument("--E", required=True)
    sp.add_argument("--branch", help="m:arg_times_pi pairs overriding the principal branch")
    sp.add_argument("--eval-at-t", type=float)
    sp = add("report", "write a JSON summary and figures")
    sp.add_argument("--out-dir", required=True)
    return p


def dispatch(argv) -> tuple[dict, int]:
    """Run one command and return (envelope, exit code)."""
    start = time.perf_counter()
    envelope = {"command": argv[0] if argv else None}
    try:
        args = build_parser().parse_args(argv)
        envelope["command"] = args.command
        envelope["seed"] = _seed(args)
        inp = io.load(args.instance)
        envelope["instance_hash"] = io.instance_hash(inp)
        envelope["result"] = COMMANDS[args.command](inp, args)
        code = 0
    except TropError as exc:
        envelope["error"] = exc.as_dict()
        code = exc.exit_code
        args = None
    except SystemExit as exc:  # --help
        return {}, int(exc.code or 0)
    if not (args is not None and args.no_timing):
        envelope["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    if args is not None and args.out_json:
        Path(args.out_json).write_text(io.dumps_result(envelope))
    return envelope, code


def main(argv=None) -> int:
    envelope, code = dispatch(sys.argv[1:] if argv is None else list(argv))
    if envelope:
        sys.stdout.write(io.dumps_result(envelope))
    return code


if __name__ == "__main__":
    sys.exit(main())
