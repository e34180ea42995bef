import csv
import io
import json

import jsonschema
import numpy as np
import pytest

from qgraph.cli import load_schema, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_classify_presets(capsys):
    code, out, _ = run(capsys, "classify", "--graph", "star:2", "--bc", "pt_point:0.785")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("report"))
    assert doc["class"] == "QuasiSectorial"

    code, out, _ = run(capsys, "classify", "--graph", "interval", "--bc", "intermediate")
    assert code == 0 and json.loads(out)["class"] == "RegularNonQuasiSectorial"


def test_classify_from_files(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"vertices": [0, 1], "internal_edges": [{"id": "e", "initial": 0, "terminal": 1, "length": 1.0}]}))
    b = tmp_path / "bc.json"
    b.write_text(json.dumps({"A": [[1, 0], [0, 1]], "B": [[0, 0], [{"re": -1, "im": 0}, 0]]}))
    code, out, _ = run(capsys, "classify", "--graph", str(g), "--bc", str(b))
    assert code == 0 and json.loads(out)["class"] == "RegularNonQuasiSectorial"

    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"graph": json.loads(g.read_text()), "bc": {"preset": "dirichlet"}}))
    code, out, _ = run(capsys, "classify", "--spec", str(spec))
    assert code == 0 and json.loads(out)["class"] == "SelfAdjoint"


def test_missing_field_exit_2(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"internal_edges": [{"id": "e", "initial": 0, "terminal": 1}]}))
    code, _, err = run(capsys, "classify", "--graph", str(g), "--bc", "dirichlet")
    assert code == 2 and "'vertices'" in err

    g.write_text(json.dumps({"vertices": [0, 1], "internal_edges": [{"id": "e", "initial": 0, "terminal": 1}]}))
    code, _, err = run(capsys, "classify", "--graph", str(g), "--bc", "dirichlet")
    assert code == 2 and "'length'" in err

    g.write_text('{"vertices": [0, 1], "internal_ed')
    code, _, err = run(capsys, "classify", "--graph", str(g), "--bc", "dirichlet")
    assert code == 2 and "malformed JSON" in err


def test_dimension_mismatch_names_expected_d(tmp_path, capsys):
    b = tmp_path / "bc.json"
    b.write_text(json.dumps({"A": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "B": [[0] * 3] * 3}))
    code, _, err = run(capsys, "classify", "--graph", "interval", "--bc", str(b))
    assert code == 2 and "d = 2" in err


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--graph", "interval", "--bc", "dirichlet", "--region", "0.1", "10", "-1", "1")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["re_k", "im_k", "re_lambda", "im_lambda", "multiplicity"]
    assert np.allclose([float(x["re_k"]) for x in r], [np.pi, 2 * np.pi, 3 * np.pi], rtol=1e-8)


def test_spectrum_intermediate_matches_sin_k_equals_k(capsys):
    code, out, _ = run(capsys, "spectrum", "--graph", "interval", "--bc", "intermediate", "--region", "0.1", "25", "-5", "5")
    assert code == 0
    for r in rows(out):
        k = complex(float(r["re_k"]), float(r["im_k"]))
        assert abs(np.sin(k) - k) <= 1e-8 * abs(k)


def test_spectrum_is_deterministic(capsys):
    args = ("spectrum", "--graph", "interval", "--bc", "intermediate", "--region", "0.1", "15", "-4", "4")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_spectrum_irregular_exit_3(capsys):
    code, _, err = run(capsys, "spectrum", "--graph", "interval", "--bc", "totally_degenerate", "--region", "0.1", "10", "-1", "1")
    assert code == 3 and "empty or all of the complex plane" in err


def test_similarity_delta(capsys):
    code, out, _ = run(capsys, "similarity", "--graph", "star:3", "--bc", "delta:-1")
    assert code == 0 and json.loads(out)["similar"] is True
    code, _, _ = run(capsys, "similarity", "--graph", "interval", "--bc", "dirichlet")
    assert code == 5


def test_witness_csv_slope(capsys):
    code, out, _ = run(capsys, "witness", "--graph", "interval", "--bc", "intermediate", "--sweep", "10", "20", "40", "80")
    assert code == 0
    r = rows(out)
    assert len(r) == 4 and -1.3 <= float(r[0]["loglog_slope"]) <= -0.8


def test_enclosure_parabola(capsys):
    code, out, _ = run(capsys, "enclosure", "--graph", "interval", "--bc", "dirichlet")
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("enclosure"))
    assert code == 0 and doc["kind"] == "parabola"


def test_greens_and_error_codes(capsys):
    code, out, _ = run(capsys, "greens", "--graph", "interval", "--bc", "dirichlet", "--k", "1+2j", "--x", "0.3", "--y", "0.6")
    assert code == 0
    jsonschema.validate(json.loads(out), load_schema("greens"))
    code, _, _ = run(capsys, "greens", "--graph", "interval", "--bc", "dirichlet", "--k", "3.141592653589793")
    assert code == 6
    code, _, _ = run(capsys, "greens", "--graph", "interval", "--bc", "dirichlet", "--k", "0")
    assert code == 2


def test_evolve_json_and_csv(capsys, tmp_path):
    base = ("evolve", "--graph", "interval", "--bc", "dirichlet", "--initial", "sin", "--steps", "5", "--h", "0.05")
    code, out, _ = run(capsys, *base)
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("evolution"))
    assert code == 0 and len(doc["norms"]) == 6
    target = tmp_path / "norms.csv"
    code, out, _ = run(capsys, *base, "--format", "csv", "--out", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("t,norm")


def test_unknown_preset_exit_2(capsys):
    code, _, err = run(capsys, "classify", "--graph", "interval", "--bc", "nonsense")
    assert code == 2 and "nonsense" in err


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(load_schema())
