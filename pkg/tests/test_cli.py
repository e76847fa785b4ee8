import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from welding_moments.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def schema(name):
    text = resources.files("welding_moments").joinpath("schemas", f"{name}.v1.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(doc, name):
    jsonschema.validate(doc, schema(name), cls=jsonschema.Draft7Validator)


@pytest.mark.parametrize("name", ["moments", "moments-verify", "estimate", "sandwich", "family", "operators", "reproduce"])
def test_schemas_are_valid(name):
    jsonschema.Draft7Validator.check_schema(schema(name))


def test_moments_level_one_json(capsys):
    code, out, _ = run(capsys, "moments", "--level", "1", "--format", "json")
    assert code == 0 and json.loads(out) == {"1|1": "1/2"}
    validate(json.loads(out), "moments")


def test_moments_level_zero(capsys):
    code, out, _ = run(capsys, "moments", "--level", "0")
    assert code == 0 and json.loads(out) == {"|": "1"}
    validate(json.loads(out), "moments")


def test_moments_verify_text_and_json(capsys):
    code, out, _ = run(capsys, "moments", "--level", "2", "--verify")
    assert code == 0 and "1+1|1+1 = 17/42 PASS" in out.splitlines()
    code, out, _ = run(capsys, "moments", "--level", "3", "--verify", "--format", "json")
    validate(json.loads(out), "moments-verify")


def test_moments_csv_has_header(capsys):
    code, out, _ = run(capsys, "moments", "--level", "2", "--format", "csv")
    assert out.splitlines()[0] == "level,P,Q,value"
    assert "2,1+1,1+1,17/42" in out.splitlines()


def test_moments_level_limits(capsys):
    assert run(capsys, "moments", "--level", "7")[0] == 1
    assert run(capsys, "moments", "--level", "-1")[0] == 1


def test_bad_flags_exit_one(capsys):
    assert run(capsys, "moments")[0] == 1
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "diagonal", "sandwich", "--beta", "1", "--grid", "3:1:1")[0] == 1


def test_operators_outputs(capsys):
    assert run(capsys, "operators", "pn", "--n", "2")[1].strip() == "7*u1^2 - 4*u2"
    assert run(capsys, "operators", "kernel", "--n", "3")[1].strip() == 'basis ["u1^3 + 2*u1*u2"]'
    code, out, _ = run(capsys, "operators", "diagonal-lemma", "--n", "2")
    assert code == 0 and out.strip() == "PASS (exact)"
    for args in (("pn", "--n", "3"), ("kernel", "--n", "4"), ("matrices", "--n", "3"), ("diagonal-lemma", "--n", "1"),
                 ("stress", "--window", "3"), ("commutators", "--n", "1")):
        code, out, _ = run(capsys, "operators", *args, "--format", "json")
        assert code == 0
        validate(json.loads(out), "operators")


def test_identity_failure_exits_two(capsys):
    code, out, _ = run(capsys, "operators", "diagonal-lemma", "--n", "0", "--m", "1")
    assert code == 2 and out.startswith("FAIL")


def test_diagonal_outputs(capsys):
    code, out, _ = run(capsys, "diagonal", "laplace", "--beta", "1", "--lambda", "0")
    assert code == 0 and out.splitlines()[0] == "1.000000000000000"
    code, out, _ = run(capsys, "diagonal", "cardy", "--rho", "0.1", "--report", "exponent")
    assert abs(float(out.splitlines()[0]) - 12.337005501361698) < 1e-6
    for args in (("laplace", "--beta", "5", "--c", "0.5", "--lambda", "1"), ("cdf", "--beta", "1", "--x", "2"),
                 ("ode", "--beta", "1", "--lambda", "1", "--h", "1e-4"), ("cardy", "--rho", "0.05", "--small-rho")):
        code, out, _ = run(capsys, "diagonal", *args, "--format", "json")
        assert code == 0
        validate(json.loads(out), "estimate")


def test_sandwich_table(capsys):
    code, out, _ = run(capsys, "diagonal", "sandwich", "--beta", "12.0", "--grid", "0.5:10:0.5", "--format", "json")
    doc = json.loads(out)
    validate(doc, "sandwich")
    assert code == 0 and len(doc["rows"]) == 20


def test_domain_errors_exit_one(capsys):
    assert run(capsys, "diagonal", "laplace", "--beta", "0", "--lambda", "1")[0] == 1
    assert run(capsys, "diagonal", "cardy", "--rho", "-1")[0] == 1
    assert run(capsys, "family", "--N", "1", "--w", "1")[0] == 1
    assert run(capsys, "family", "--N", "1", "--w", "abc")[0] == 1


def test_family_outputs(capsys):
    code, out, _ = run(capsys, "family", "--N", "1", "--w", "1/2", "--order", "200", "--format", "json")
    doc = json.loads(out)
    validate(doc, "family")
    assert doc["a_closed"] == "3/4" and abs(float(doc["a_truncated"]) - 0.75) < 1e-8
    code, out, _ = run(capsys, "family", "--N", "2", "--w", "0", "--check-pn", "6", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["a_closed"] == "1"
    assert all(p["P_u"] == "0+0 i" and p["P_l"] == "0+0 i" for p in doc["P"])
    code, out, _ = run(capsys, "family", "--N", "2", "--w", "1/3", "--check-pn", "8", "--inversion", "--format", "json")
    doc = json.loads(out)
    validate(doc, "family")
    assert code == 0
    byn = {p["n"]: p for p in doc["P"]}
    assert byn[4]["P_u"] == "1/3+0 i" and byn[6]["P_u"] == "4/27+0 i" and byn[8]["P_u"] == "5/81+0 i"
    assert doc["inversion"]["pass"] and doc["inversion"]["parameter"] == "-1/3+0 i"


def test_reproduce_subset(tmp_path, capsys):
    report = tmp_path / "r.md"
    code, out, _ = run(capsys, "reproduce", "--only", "2", "4", "--report", str(report), "--format", "json")
    validate(json.loads(out), "reproduce")
    assert code == 0 and report.read_text(encoding="utf-8").startswith("# Acceptance report")


@pytest.mark.parametrize(
    "args",
    [
        ("moments", "--level", "3", "--format", "json"),
        ("diagonal", "sandwich", "--beta", "3", "--grid", "0.5:3:0.5", "--format", "csv"),
        ("family", "--N", "3", "--w", "1/4+1/5 i", "--check-pn", "6", "--format", "json"),
    ],
)
def test_byte_identical_reruns(tmp_path, capsys, args):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*args, "--output", str(a)]) == 0
    assert main([*args, "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "welding_moments", "operators", "pn", "--n", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "-2*u1"
