import json
import subprocess
import sys

import numpy as np
import pytest

from entcat import presets
from entcat.cli import main
from entcat.io import dumps_state, read_state


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_schmidt_preset(capsys):
    code, out, _ = run(capsys, "schmidt", "psi-eq8a")
    assert code == 0
    assert np.allclose(json.loads(out), [0.38, 0.38, 0.095, 0.095, 0.05], atol=1e-15)


def test_schmidt_bell_json(capsys):
    code, out, _ = run(capsys, "schmidt", "bell", "--json")
    assert code == 0 and np.allclose(json.loads(out)["spectrum"], [0.5, 0.5])


def test_schmidt_from_file(capsys, tmp_path):
    path = tmp_path / "psi.json"
    path.write_text(dumps_state(presets.target_state()))
    code, out, _ = run(capsys, "schmidt", str(path))
    assert code == 0 and np.allclose(json.loads(out), [0.5, 0.25, 0.25, 0, 0], atol=1e-15)


@pytest.mark.parametrize("arg", ["{bad", "no-such-preset-or-file", "psi-eq14(2)"])
def test_schmidt_malformed(capsys, arg):
    code, _, err = run(capsys, "schmidt", arg)
    assert code == 64 and "error" in err


def test_decide_exit_codes(capsys):
    assert run(capsys, "decide", "phitilde-eq10", "phi-eq8b")[0] == 1
    assert run(capsys, "decide", "phitilde-eq10", "phi-eq8b", "--catalyst", "[0.6,0.4]")[0] == 0
    assert run(capsys, "decide", "[0.5,0.5]", "[1,0]")[0] == 0
    assert run(capsys, "decide", "[0.6,0.2,0.2]", "[0.5,0.5]", "--search-dim", "3")[0] == 2


def test_decide_search_reports_catalyst(capsys):
    code, out, _ = run(capsys, "decide", "phitilde-eq10", "phi-eq8b", "--search-dim", "2",
                       "--json")
    assert code == 0
    report = json.loads(out)
    assert report["decision"] == "Possible"
    assert 0.6 - 1e-9 <= report["certificate"]["catalyst"][0] <= 0.625


def test_decide_bad_usage_is_not_unknown(capsys):
    assert run(capsys, "decide", "--bogus")[0] == 64
    assert run(capsys, "decide", "[0.5,0.6]", "[1]")[0] == 64
    assert run(capsys, "decide", "[1]", "[1]", "--search-dim", "1")[0] == 64


def test_tolerance_flag_changes_verdict(capsys):
    assert run(capsys, "majorize", "[0.4,0.4,0.1,0.1]", "[0.5,0.25,0.25]")[0] == 1
    assert run(capsys, "majorize", "[0.4,0.4,0.1,0.1]", "[0.5,0.25,0.25]",
               "--tol", "0.2")[0] == 0


def test_lemma1_and_protocol(capsys):
    code, out, _ = run(capsys, "lemma1", "--preset", "paper-sec3", "--json")
    assert code == 1 and json.loads(out)["certificate"]["violating_k"] == 2
    code, out, _ = run(capsys, "protocol", "--preset", "paper-sec3", "--json")
    report = json.loads(out)
    assert code == 0 and report["branch_probabilities"] == pytest.approx([0.475, 0.525])


def test_lemma1_custom_states(capsys):
    code, _, _ = run(capsys, "lemma1", "--psi", "psi-eq8a", "--phi", "phi-eq8b",
                     "--eta", "eta-55", "--lambda", "0.3")
    assert code == 1
    assert run(capsys, "lemma1")[0] == 64
    # eta must be a product state
    assert run(capsys, "lemma1", "--psi", "psi-eq8a", "--phi", "phi-eq8b",
               "--eta", "phi-eq8b")[0] == 66


def test_radius(capsys):
    code, out, _ = run(capsys, "radius", "phitilde-eq10", "omega-catalyst", "--json")
    assert code == 0 and json.loads(out)["delta"] == pytest.approx(4e-4)


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--eps", "1", "--lambdas", "0.5", "--json")
    rows = json.loads(out)["rows"]
    assert code == 0 and rows[0]["separated"]


def test_close_pair_writes_states(capsys, tmp_path):
    code, out, _ = run(capsys, "close-pair", "--delta", "0.1", "--out-dir", str(tmp_path),
                       "--json")
    assert code == 0 and json.loads(out)["fidelity"] > 0.9
    sigma = read_state(str(tmp_path / "sigma.json"))
    assert sigma.dim_a == 5


def test_attack_records(capsys):
    code, out, _ = run(capsys, "attack", "--trials", "3", "--records", "--seed", "4")
    lines = [json.loads(x) for x in out.strip().splitlines()]
    assert code == 0
    assert {"trial", "branch_count", "prob", "fidelity_out"} <= lines[0].keys()
    assert lines[-1]["summary"]["pass"]


def test_attack_bad_lambda(capsys):
    assert run(capsys, "attack", "--lambda", "abc")[0] == 64


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "entcat", "schmidt", "bell"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == pytest.approx([0.5, 0.5])
