import json

import numpy as np
import pytest

from quadkit.cli import main
from quadkit.experiments import ExperimentDescriptor, run_experiment, validate_selection
from quadkit import serialize


def test_rule_csv_stdout(capsys):
    assert main(["rule", "--family", "legendre", "--points", "5"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 5
    nodes = [float(line.split(",")[0]) for line in lines]
    assert nodes == sorted(nodes)


def test_rule_lobatto_json(tmp_path):
    out = tmp_path / "rule.json"
    main(["rule", "--family", "legendre", "--points", "3", "--kind", "lobatto",
          "--format", "json", "--out", str(out)])
    obj = json.loads(out.read_text())
    assert obj["provenance"] == "lobatto"
    np.testing.assert_allclose([p[0] for p in obj["points"]], [-1.0, 0.0, 1.0],
                               atol=1e-14)


def test_sparse_command(tmp_path):
    out = tmp_path / "sparse.json"
    main(["sparse", "--d", "2", "--level", "6", "--growth", "exponential",
          "--format", "json", "--out", str(out)])
    obj = json.loads(out.read_text())
    assert len(obj["points"]) == 701
    assert obj["metadata"]["growth"] == "exponential"


def test_sample_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        main(["sample", "--strategy", "christoffel", "--d", "2", "--m", "200",
              "--seed", "42", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()
    pts, wts = serialize.read_points_csv(a)
    assert pts.shape == (200, 2)
    np.testing.assert_allclose(wts.sum(), 1.0, atol=1e-12)


def test_design_subselect_validate_pipeline(tmp_path):
    points = tmp_path / "points.csv"
    design = tmp_path / "design.json"
    selection = tmp_path / "selection.json"
    main(["sample", "--strategy", "christoffel", "--d", "2", "--m", "120",
          "--seed", "7", "--weights-order", "3", "--out", str(points)])
    main(["design", "--points", str(points), "--family", "legendre",
          "--kind", "total_order", "--order", "3", "--out", str(design)])
    assert main(["subselect", "--strategy", "newton", "--k", "12",
                 "--in", str(design), "--out", str(selection)]) == 0
    stored = json.loads(selection.read_text())
    assert len(stored["row_indices"]) == 12
    assert "z_relaxed" in stored
    report = validate_selection(selection, design)
    assert report["weights_match"]
    assert report["diffs"]["kappa"] < 1e-9


def test_validate_rejects_corrupted_index(tmp_path):
    points = tmp_path / "points.csv"
    design = tmp_path / "design.json"
    selection = tmp_path / "selection.json"
    main(["sample", "--strategy", "christoffel", "--d", "1", "--m", "30",
          "--seed", "3", "--out", str(points)])
    main(["design", "--points", str(points), "--family", "legendre",
          "--kind", "total_order", "--order", "2", "--out", str(design)])
    main(["subselect", "--strategy", "qr", "--k", "3",
          "--in", str(design), "--out", str(selection)])
    obj = json.loads(selection.read_text())
    obj["row_indices"][-1] = 30  # out of range
    selection.write_text(json.dumps(obj))
    with pytest.raises(IndexError):
        validate_selection(selection, design)
    assert main(["validate", "--selection", str(selection),
                 "--design", str(design)]) == 1


def test_validate_rejects_checksum_mismatch(tmp_path):
    points = tmp_path / "points.csv"
    design = tmp_path / "design.json"
    other_design = tmp_path / "design2.json"
    selection = tmp_path / "selection.json"
    main(["sample", "--strategy", "christoffel", "--d", "1", "--m", "30",
          "--seed", "3", "--out", str(points)])
    main(["design", "--points", str(points), "--family", "legendre",
          "--kind", "total_order", "--order", "2", "--out", str(design)])
    main(["design", "--points", str(points), "--family", "legendre",
          "--kind", "total_order", "--order", "3", "--out", str(other_design)])
    main(["subselect", "--strategy", "qr", "--k", "3",
          "--in", str(design), "--out", str(selection)])
    with pytest.raises(ValueError, match="checksum"):
        validate_selection(selection, other_design)


def test_lsq_command(tmp_path, capsys):
    points = tmp_path / "points.csv"
    design = tmp_path / "design.json"
    values = tmp_path / "f.csv"
    main(["rule", "--family", "legendre", "--points", "8", "--out", str(points)])
    main(["design", "--points", str(points), "--family", "legendre",
          "--kind", "total_order", "--order", "4", "--out", str(design)])
    pts, _ = serialize.read_points_csv(points)
    np.savetxt(values, np.exp(pts[:, 0]), delimiter=",")
    main(["lsq", "--design", str(design), "--values", str(values)])
    result = json.loads(capsys.readouterr().out)
    # degree-0 coefficient of exp under uniform density is sinh(1)
    assert result["coefficients"][0] == pytest.approx(np.sinh(1.0), abs=1e-10)


def test_gram_command(tmp_path, capsys):
    points = tmp_path / "points.csv"
    design = tmp_path / "design.json"
    gram = tmp_path / "gram.csv"
    main(["rule", "--family", "legendre", "--points", "5", "--out", str(points)])
    main(["design", "--points", str(points), "--family", "legendre",
          "--kind", "total_order", "--order", "4", "--out", str(design)])
    main(["gram", "--design", str(design), "--out", str(gram)])
    summary = json.loads(capsys.readouterr().out)
    assert summary["kappa_design"] == pytest.approx(1.0, abs=1e-10)
    body = gram.read_text().strip().split("\n")
    assert body[0] == "p,q,value"
    assert len(body) == 26


def test_experiment_descriptor_validation():
    with pytest.raises(ValueError, match="unknown experiment"):
        ExperimentDescriptor("nope", {}, ".")
    with pytest.raises(ValueError, match="unknown parameters"):
        ExperimentDescriptor("doe-gram", {"bogus": 1}, ".")


def test_doe_gram_experiment(tmp_path):
    desc = ExperimentDescriptor("doe-gram", {"plots": False}, str(tmp_path))
    manifest = run_experiment(desc)
    assert manifest["status"] == "success"
    assert (tmp_path / "gram_gauss.csv").exists()
    assert (tmp_path / "manifest.json").exists()
    gauss = np.loadtxt(tmp_path / "gram_gauss.csv", delimiter=",", skiprows=1)
    gram = gauss[:, 2].reshape(5, 5)
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-10)


def test_experiment_csv_reproducible(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    for out in (out1, out2):
        run_experiment(ExperimentDescriptor("subsample-gauss-1d",
                                            {"plots": False, "orders": [4]},
                                            str(out)))
    assert (out1 / "selections.csv").read_bytes() == (out2 / "selections.csv").read_bytes()


def test_manifest_written_on_failure(tmp_path, monkeypatch):
    # a tiny tensor cap forces the sparse stage to fail; the manifest must
    # still land with the failing stage named
    monkeypatch.setenv("QUADKIT_CAP", "50")
    desc = ExperimentDescriptor("sparse-decay", {"plots": False}, str(tmp_path))
    with pytest.raises(Exception):
        run_experiment(desc)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "failed"
    assert manifest["failing_stage"] == "tensor"
    assert "error" in manifest


def test_experiment_cli_gnuplot_hints(tmp_path):
    code = main(["experiment", "--name", "doe-gram", "--out-dir", str(tmp_path),
                 "--no-plots", "--emit-gnuplot-hints"])
    assert code == 0
    assert (tmp_path / "columns.txt").read_text().startswith("gram_")


def test_padua_experiment(tmp_path):
    desc = ExperimentDescriptor("padua", {"plots": False}, str(tmp_path))
    manifest = run_experiment(desc)
    assert manifest["status"] == "success"
    match = json.loads((tmp_path / "match.json").read_text())
    assert match["family_match"] in ("closed-form", "mirror")
    nnls_report = json.loads((tmp_path / "nnls_report.json").read_text())
    assert not nnls_report["inexact"]
