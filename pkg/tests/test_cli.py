import json

from basicindex.cli import main
from basicindex.scenario import load_corpus_scenario, scenario_to_dict


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def corpus_doc(name):
    return scenario_to_dict(load_corpus_scenario(name))


def test_index_sphere(capsys):
    assert main(["index", "sphere_suspension"]) == 0
    out = capsys.readouterr().out
    assert "north_pole: 1" in out and "south_pole: 1" in out and "total: 2" in out


def test_index_carriere(capsys):
    assert main(["index", "carriere"]) == 0
    assert "total: 0" in capsys.readouterr().out


def test_index_json_format(capsys):
    assert main(["index", "cp2_signature_a", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["total"] == 1
    assert [c["index"] for c in payload["closures"]] == [1, -1, 1]


def test_index_expected_mismatch_exit_code(tmp_path, capsys):
    doc = corpus_doc("sphere_suspension")
    doc["expected_index"] = 5
    path = write_scenario(tmp_path, doc)
    assert main(["index", path]) == 1
    assert "MISMATCH" in capsys.readouterr().err


def test_missing_file_is_input_error(capsys):
    assert main(["index", "/nonexistent/path.json"]) == 2
    assert "input error" in capsys.readouterr().err


def test_malformed_json_is_input_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["index", str(path)]) == 2
    assert "input error" in capsys.readouterr().err


def test_validate_corpus(capsys):
    assert main(["validate", "sphere_suspension"]) == 0
    out = capsys.readouterr().out
    assert "all closures valid" in out


def test_validate_failure_exit_code(tmp_path, capsys):
    doc = corpus_doc("sphere_suspension")
    z = doc["closures"][0]["perturbation"]["Z"]
    z[1] = z[0]  # duplicate perturbation: singular scalar matrix
    path = write_scenario(tmp_path, doc)
    assert main(["validate", path]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_validate_json_payload(capsys):
    assert main(["validate", "cp2_signature_a", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["all_passed"] is True
    names = {c["name"] for closure in payload["closures"] for c in closure["checks"]
             if c["severity"] == "warning" and not c["passed"]}
    assert "symbol_anticommutation_all_pairs" in names


def test_spectrum_command(capsys):
    assert main(["spectrum", "carriere", "--closure", "t_quarter", "--count", "6"]) == 0
    out = capsys.readouterr().out
    assert "kernel dims 1, 1" in out


def test_spectrum_numerical_deviation(capsys):
    assert main(["spectrum", "sphere_suspension", "--closure", "north_pole",
                 "--count", "5", "--numerical", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["oracle"]["max_deviation"] < 1e-5


def test_spectrum_unknown_closure(capsys):
    assert main(["spectrum", "carriere", "--closure", "nope"]) == 2


def test_model_check_command(capsys):
    assert main(["model-check", "sphere_suspension"]) == 0
    assert "total: 2" in capsys.readouterr().out


def test_localize_command(capsys):
    assert main(["localize", "cosine_localization", "--s", "10,100,1000",
                 "--modes", "128", "--jmax", "4"]) == 0
    out = capsys.readouterr().out
    assert "monotone tail: True" in out


def test_localize_without_circle_model(capsys):
    assert main(["localize", "sphere_suspension"]) == 2


def test_list_examples(capsys):
    assert main(["list-examples"]) == 0
    out = capsys.readouterr().out
    for name in ("sphere_suspension", "carriere", "odd_codim_q3"):
        assert name in out


def test_run_corpus(capsys):
    assert main(["run-corpus"]) == 0
    out = capsys.readouterr().out
    assert "7/7 scenarios pass" in out


def test_tol_env_override(monkeypatch, capsys):
    monkeypatch.setenv("BASICINDEX_TOL", "1e-7")
    assert main(["index", "sphere_suspension"]) == 0
    monkeypatch.setenv("BASICINDEX_TOL", "not-a-number")
    assert main(["index", "sphere_suspension"]) == 2
