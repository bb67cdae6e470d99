import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from conftest import orthonormal, pair
from usdisc.cli import SCHEMAS, run, to_jsonable
from usdisc.concentration import SchmidtState
from usdisc.ensemble import StateEnsemble, random_ensemble


def invoke(*argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], stdout=buf)
    return code, json.loads(buf.getvalue())


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc, encoding="utf-8")
        return path

    return {
        "pair": write("pair.json", pair().to_json()),
        "ortho": write("ortho.json", orthonormal(2).to_json()),
        "triple": write("triple.json", random_ensemble(3, np.random.default_rng(4)).to_json()),
        "dependent": write("dep.json", StateEnsemble.normalized([[1, 0], [0, 1], [1, 1]]).to_json()),
        "schmidt": write("s.json", SchmidtState.from_weights([0.5, 0.3, 0.2]).to_json()),
        "zero": write("z.json", {"coeffs": [1, 0]}),
        "malformed": write("bad.json", '{"states": [[1, 0]'),
        "wrong_shape": write("shape.json", {"states": [[1, 0], [1]]}),
        "missing": tmp_path / "nope.json",
    }


def test_check_orthonormal(files):
    code, out = invoke("check", files["ortho"])
    assert code == 0
    assert out["independent"] is True
    assert out["smallest_gram_eigenvalue"] == 1.0
    jsonschema.validate(out, SCHEMAS["check"])


def test_check_dependent_exits_one(files):
    code, out = invoke("check", files["dependent"])
    assert code == 1
    assert out["independent"] is False
    jsonschema.validate(out, SCHEMAS["check"])


def test_optimize_pair(files):
    code, out = invoke("optimize", files["pair"])
    assert code == 0
    assert out["method"] == "two-state-closed-form"
    assert abs(out["P_D"] - 0.29289) < 1e-5
    assert abs(out["P_I"] - 0.70711) < 1e-5
    jsonschema.validate(out, SCHEMAS["optimize"])


@pytest.mark.parametrize(
    "flags, method",
    [([], "general-iterative"), (["--equal-p"], "equal-p"), (["--oracle", "--resolution", "0.01"], "grid-oracle")],
)
def test_optimize_methods(files, flags, method):
    code, out = invoke("optimize", files["triple"], *flags)
    assert code == 0
    assert out["method"] == method
    jsonschema.validate(out, SCHEMAS["optimize"])


def test_optimize_flags_are_exclusive(files):
    code, out = invoke("optimize", files["pair"], "--equal-p", "--oracle")
    assert code == 2
    jsonschema.validate(out, SCHEMAS["error"])


def test_measure(files):
    code, out = invoke("measure", files["triple"], "--shots", 5000, "--seed", 9, "--threads", 2)
    assert code == 0
    jsonschema.validate(out, SCHEMAS["measure"])
    sim = out["simulation"]
    assert sim["seed"] == 9 and sim["shots"] == 5000
    assert sim["error_count"] == 0
    assert sum(map(sum, sim["tallies"])) == 5000


def test_measure_default_seed_echoed(files):
    code, out = invoke("measure", files["pair"], "--shots", 100)
    assert code == 0
    assert out["simulation"]["seed"] == 42


def test_measure_infeasible_exits_one(files):
    code, out = invoke("measure", files["pair"], "--cond-probs", "0.5,0.5")
    assert code == 1
    assert out["error"]["kind"] == "Infeasible"
    jsonschema.validate(out, SCHEMAS["error"])


def test_measure_given_probabilities(files):
    code, out = invoke("measure", files["pair"], "--cond-probs", "0.2,0.1", "--shots", 1000)
    assert code == 0
    assert "optimization" not in out
    assert out["cond_probs"] == [0.2, 0.1]
    jsonschema.validate(out, SCHEMAS["measure"])


def test_concentrate(files):
    code, out = invoke("concentrate", files["schmidt"])
    assert code == 0
    assert abs(out["P_C"] - 0.6) <= 1e-12
    assert "simulation" not in out
    jsonschema.validate(out, SCHEMAS["concentrate"])


def test_concentrate_with_simulation(files):
    code, out = invoke("concentrate", files["schmidt"], "--shots", 10_000)
    assert code == 0
    jsonschema.validate(out, SCHEMAS["concentrate"])
    assert out["simulation"]["outcome_labels"] == ["success", "failure"]


def test_concentrate_zero_coefficient(files):
    code, out = invoke("concentrate", files["zero"])
    assert code == 1
    assert out["error"]["kind"] == "ZeroCoefficient"


def test_bounds(files):
    code, out = invoke("bounds", files["pair"], "--tradeoff-samples", 5)
    assert code == 0
    jsonschema.validate(out, SCHEMAS["bounds"])
    assert abs(out["helstrom"] - 0.14645) < 1e-5
    assert len(out["tradeoff"]) == 5
    assert out["tradeoff"][-1]["P_E"] == 0.0


def test_bounds_wrong_arity(files):
    code, out = invoke("bounds", files["triple"])
    assert code == 1
    assert out["error"]["kind"] == "WrongArity"


@pytest.mark.parametrize("command", ["check", "optimize", "measure", "bounds"])
def test_dependent_input(files, command):
    code, out = invoke(command, files["dependent"])
    assert code == 1


@pytest.mark.parametrize("name, kind", [("malformed", "MalformedJSON"), ("wrong_shape", "InvalidInput"), ("missing", "FileNotFound")])
def test_parse_errors_exit_two(files, name, kind):
    code, out = invoke("optimize", files[name])
    assert code == 2
    assert out["error"]["kind"] == kind
    jsonschema.validate(out, SCHEMAS["error"])


def test_unknown_command_exits_two():
    code, out = invoke("frobnicate", "x.json")
    assert code == 2
    jsonschema.validate(out, SCHEMAS["error"])


def test_twelve_significant_digits():
    out = to_jsonable({"x": np.float64(1 / 3), "z": 1 / 3 + 2j, "a": np.arange(2)})
    assert out == {"x": 0.333333333333, "z": {"re": 0.333333333333, "im": 2.0}, "a": [0, 1]}


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "usdisc", "concentrate", str(files["schmidt"])],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["P_C"] == 0.6
