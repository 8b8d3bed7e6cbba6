from __future__ import annotations

import json
import subprocess
import sys

import pytest

from support import FIXTURES, ROOT, k3
from tropcycles import cli, io
from tropcycles.errors import SchemaError, Unbalanced
from tropcycles.tropical import PolarCoefficient, fan_at

K3 = str(FIXTURES / "k3.json")
S2 = str(FIXTURES / "s2.json")


def run(*argv):
    env, code = cli.dispatch([str(a) for a in argv] + ["--no-timing"])
    return env, code


def doc(name="k3"):
    return json.loads((FIXTURES / f"{name}.json").read_text())


def test_load_fixture():
    inp = io.load(K3)
    assert inp.name == "quartic-k3" and inp.rank == 3 and len(inp.points) == 5


@pytest.mark.parametrize("name", ["k3", "s2", "p2curve", "k3_cy"])
def test_canonical_files_round_trip(name):
    path = FIXTURES / f"{name}.json"
    assert io.serialize(io.load(path)) == path.read_bytes()


def test_malformed_rational_reports_pointer():
    d = doc()
    d["lambda"][2] = "1/0"
    with pytest.raises(SchemaError) as exc:
        io.instance_from_dict(d)
    assert exc.value.pointer == "/lambda/2"


def test_schema_violation_reports_pointer():
    d = doc()
    d["points"][1] = [1, 0]
    with pytest.raises(SchemaError) as exc:
        io.instance_from_dict(d)
    assert exc.value.pointer == "/points/1"
    d = doc()
    d["coefficients"][0] = 1.5
    with pytest.raises(SchemaError) as exc:
        io.instance_from_dict(d)
    assert exc.value.pointer == "/coefficients/0"


def test_optional_fields():
    d = doc()
    assert "triangulation" not in d
    inp = io.instance_from_dict(d)
    assert len(inp.tri.simplices) == 4
    d["triangulation"] = [list(s) for s in inp.tri.simplices]
    d["coefficients"][1] = {"abs": "2", "arg_times_pi": "1/2"}
    d["branch"] = [{"w": 4, "m": 1, "arg_times_pi": "-1/2"}]
    inp2 = io.instance_from_dict(d)
    assert isinstance(inp2.coeffs[1], PolarCoefficient)
    assert abs(inp2.complex_coeff(1) - 2j) < 1e-15
    again = io.instance_from_dict(json.loads(io.serialize(inp2)))
    assert io.serialize(again) == io.serialize(inp2)


def test_decimal_strings_are_exact():
    d = doc()
    d["lambda"][0] = "1.0"
    assert io.serialize(io.instance_from_dict(d)) == io.serialize(k3())


def test_weight_files(tmp_path):
    fan = fan_at(k3(), (0, 0, 0))
    good = {"codim": 1, "values": {k: 1 for k in ["0,1", "0,2", "0,3", "1,2", "1,3", "2,3"]}}
    p = tmp_path / "a.json"
    p.write_text(json.dumps(good))
    a = io.load_weight(fan, str(p))
    assert a == io.load_weight(fan, "ones", 1) == io.load_weight(fan, "ones:1")
    good["values"]["0,1"] = 2
    p.write_text(json.dumps(good))
    with pytest.raises(Unbalanced):
        io.load_weight(fan, str(p))
    good["values"] = {"0,9": 1}
    p.write_text(json.dumps(good))
    with pytest.raises(SchemaError):
        io.load_weight(fan, str(p))


def test_kclass_parser():
    fan = fan_at(k3(), (0, 0, 0))
    E = io.parse_kclass(fan, "O - O(-1,0,0,0)")
    assert E.terms == {(0, 0, 0, 0): 1, (-1, 0, 0, 0): -1}
    assert io.parse_kclass(fan, "2*O(1,0,0,0)+O").terms == {(1, 0, 0, 0): 2, (0, 0, 0, 0): 1}
    with pytest.raises(SchemaError):
        io.parse_kclass(fan, "O(1,0)")
    with pytest.raises(SchemaError):
        io.parse_kclass(fan, "P")


def test_packaged_schema_matches_docs():
    assert json.loads((ROOT / "docs" / "schema.json").read_text()) == io.instance_schema()


def test_cli_intersect_example():
    env, code = run("intersect", K3, "--w1", "0,0,0", "--w2", "0,0,0", "--a1", "ones", "--a2", "ones")
    assert code == 0 and env["result"]["intersection"] == 4


def test_cli_period_example():
    env, code = run("period", K3, "--l", "1", "--v", "0,0,0", "--w", "0,0,0", "--E", "O", "--eval-at-t", "0.5")
    assert code == 0
    coeffs = env["result"]["period"]["coefficients"]
    assert len(coeffs) == 4 and env["result"]["period"]["remainder"] == "O(t^eps)"


def test_cli_balance_failure(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"codim": 1, "values": {"0,1": 2, "0,2": 1, "0,3": 1, "1,2": 1, "1,3": 1, "2,3": 1}}))
    env, code = run("balance", K3, "--w", "0,0,0", "--a", p)
    assert code == Unbalanced.exit_code
    assert env["error"]["code"] == "unbalanced" and env["error"]["details"]["cone"]


def test_cli_errors_have_distinct_codes(tmp_path):
    assert run("nonsense", K3)[1] == 2
    bad = tmp_path / "bad.json"
    d = doc()
    d["lambda"][0] = "1/0"
    bad.write_text(json.dumps(d))
    env, code = run("validate", bad)
    assert code == SchemaError.exit_code and env["error"]["details"]["pointer"] == "/lambda/0"
    flat = tmp_path / "flat.json"
    d = doc()
    d["lambda"] = ["0"] * 5
    flat.write_text(json.dumps(d))
    assert run("validate", flat)[1] == 5


def test_same_seed_same_payload(monkeypatch):
    args = ("enumerate-intersections", S2, "--w1", "1,0,0", "--w2", "0,0,0", "--a1", "ones", "--a2", "ones")
    a, _ = run(*args, "--seed", "3")
    b, _ = run(*args, "--seed", "3")
    assert a == b
    monkeypatch.setenv("TROPCYCLES_SEED", "3")
    c, _ = run(*args)
    assert c["seed"] == 3 and c["result"] == a["result"]


@pytest.mark.parametrize("argv", [
    ("validate",),
    ("fans",),
    ("cycle", "--w", "0,0,0", "--a", "ones:1"),
    ("cup", "--w", "0,0,0", "--a", "ones:1", "--b", "ones:1"),
    ("chern", "--w", "0,0,0", "--E", "O-O(-1,0,0,0)"),
    ("decompose", "--w", "0,0,0", "--E", "O(1,0,0,0)"),
    ("weight-to-k", "--w", "0,0,0", "--a", "ones:1"),
    ("lift", "--w", "0,0,0", "--divisor", "1,0,0,0"),
    ("lift", "--w", "0,0,0", "--polytope", "[[0,0,0]]"),
    ("profile", "--w", "0,0,0", "--E", "O-O(-1,0,0,0)"),
    ("lift-intersect", "--w1", "0,0,0", "--w2", "0,0,0", "--a1", "ones", "--a2", "ones"),
    ("export", "--w", "0,0,0", "--a", "ones:1", "--format", "obj"),
])
def test_cli_commands_succeed(argv):
    env, code = run(argv[0], K3, *argv[1:])
    assert code == 0, env
    assert env["command"] == argv[0] and "result" in env


def test_cli_lift_reports_cycle():
    env, _ = run("lift", K3, "--w", "0,0,0", "--E", "O-O(-1,0,0,0)")
    assert env["result"]["cycle"]["ok"]


def test_report_writes_files(tmp_path):
    env, code = run("report", S2, "--out-dir", tmp_path)
    assert code == 0
    for name in env["result"]["files"]:
        assert (tmp_path / name).stat().st_size > 0


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "tropcycles.cli", "validate", K3, "--no-timing"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["result"]["interior_points"] == [[0, 0, 0]]
