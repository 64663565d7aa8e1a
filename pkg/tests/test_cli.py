import json
import math
import subprocess
import sys

import pytest

from nodal_plumbing.cli import main
from nodal_plumbing.series import ComplexSeries

ZW_SECTION = json.dumps({"k": 2, "coeff": {"vars": ["z", "w"], "trunc": 4, "terms": [{"exp": [1, 1], "re": 1.0, "im": 0.0}]}})
W_SECTION = json.dumps({"k": 2, "coeff": {"vars": ["z", "w"], "trunc": 6, "terms": [{"exp": [0, 1], "re": 1.0, "im": 0.0}]}})


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_laur(capsys):
    code, out, _ = run(capsys, "laur", "--section", ZW_SECTION)
    assert code == 0
    assert json.loads(out)["laur"]["terms"] == [{"exp": [1], "re": 4.0, "im": 0.0}]


def test_dims(capsys):
    code, out, _ = run(capsys, "dims", "--config", '{"parts":[{"g":0,"n":3}],"nodes":0}')
    assert code == 0 and json.loads(out)["dimension"] == 3


def test_compplum_reports_three_methods(capsys):
    code, out, _ = run(capsys, "compplum", "--F", "[1, 1]", "--G", "[1]", "--section", W_SECTION, "--verify")
    assert code == 0
    obj = json.loads(out)
    methods = [r["method"] for r in obj["results"]]
    assert methods == ["closed_form", "coordinate_change_oracle", "finite_difference"]
    assert obj["results"][1]["re"] == pytest.approx(4 * math.pi)
    assert obj["verify"]["pass"] is True


def test_pair_with_t_and_verify(capsys):
    code, out, _ = run(capsys, "pair", "--section", ZW_SECTION, "--t", "0.01,0", "--verify")
    obj = json.loads(out)
    assert code == 0
    assert obj["pairing"]["method"] == "closed_form"
    assert obj["pairing"]["re"] == pytest.approx(-4 * math.pi)
    assert obj["verify"]["pass"] is True


def test_pair_limit_rejects_residue(capsys):
    quarter = json.dumps({"k": 2, "coeff": {"vars": ["z", "w"], "trunc": 4, "terms": [{"exp": [0, 0], "re": 0.25, "im": 0}]}})
    code, _, err = run(capsys, "pair", "--section", quarter)
    assert code == 2 and "residue" in err


def test_lp_pairing(capsys):
    lam = json.dumps({"coeff": {"vars": ["z", "w"], "trunc": 4, "terms": [{"exp": [0, 0], "re": 1, "im": 0}]}})
    code, out, _ = run(capsys, "pair", "--section", ZW_SECTION, "--vertical", lam)
    assert code == 0 and json.loads(out)["lp"]["value"]["terms"] == [{"exp": [1], "re": 4.0, "im": 0.0}]


def test_series_ops(capsys):
    a = ComplexSeries(("z",), 3, {(1,): 1, (2,): 1}).to_json()
    code, out, _ = run(capsys, "series", "--op", "mul", "--a", a, "--b", a)
    assert code == 0
    assert ComplexSeries.from_json_obj(json.loads(out)["series"]) == ComplexSeries(("z",), 3, {(2,): 1, (3,): 2})
    code, out, _ = run(capsys, "series", "--op", "coefficient", "--a", a, "--exp", "[2]")
    assert json.loads(out)["coefficient"] == {"re": 1.0, "im": 0.0}


def test_frames(capsys):
    frame = {
        "base_vars": ["t"],
        "smoothing": "t",
        "sections": [{"k": 2, "coeff": {"vars": ["u", "v"], "trunc": 4, "terms": [{"exp": [0, 0], "re": 0.5, "im": 0}]}}],
        "eval_matrix": [[{"vars": ["t"], "trunc": 2, "terms": [{"exp": [0], "re": 2.0, "im": 0}]}]],
    }
    code, out, _ = run(capsys, "frames", "--frame", json.dumps(frame))
    obj = json.loads(out)
    assert code == 0
    assert obj["normalized"]["sections"][0]["coeff"]["terms"] == [{"exp": [0, 0], "re": 0.25, "im": 0.0}]


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "dims", "--config", '{"parts":[{"g":0,"n":2}],"nodes":0}')
    assert code == 2 and "unstable" in err


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "dims", "--config", "{nope")
    assert code == 1 and "invalid JSON" in err


def test_missing_file_exit_code(capsys):
    code, _, _ = run(capsys, "laur", "--section", "@/nonexistent/file.json")
    assert code == 1


def test_bad_arguments_exit_code(capsys):
    code, _, _ = run(capsys, "nosuchcommand")
    assert code == 1


def test_file_input(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(ZW_SECTION)
    code, out, _ = run(capsys, "laur", "--section", f"@{p}")
    assert code == 0 and json.loads(out)["laur"]["terms"][0]["re"] == 4.0


def test_examples_verify(capsys):
    code, out, _ = run(capsys, "example", "elliptic", "--tau", "0,2", "--verify")
    obj = json.loads(out)
    assert code == 0 and obj["verify"]["pass"] is True
    assert obj["cotangent_table"]["provenance"][2][2] == "paper-sourced"
    code, out, _ = run(capsys, "example", "abelian", "--verify", "--t", "0.01,0.02")
    assert code == 0 and json.loads(out)["verify"]["pass"] is True


def test_text_format(capsys):
    code, out, _ = run(capsys, "--format", "text", "laur", "--section", ZW_SECTION)
    assert code == 0 and "laur:" in out and "t" in out


def test_env_default_trunc(monkeypatch, capsys):
    monkeypatch.setenv("NODAL_PLUMBING_TRUNC", "notanint")
    code, _, _ = run(capsys, "dims", "--config", '{"parts":[{"g":2,"n":0}]}')
    assert code == 1


def test_output_is_deterministic():
    cmd = [sys.executable, "-m", "nodal_plumbing", "compplum", "--F", "[2, 0.5]", "--G", "[1, -1]",
           "--section", W_SECTION]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_emitted_series_reparse(capsys):
    code, out, _ = run(capsys, "laur", "--section", ZW_SECTION)
    obj = json.loads(out)["laur"]
    s = ComplexSeries.from_json_obj(obj)
    assert s.to_json_obj() == obj
