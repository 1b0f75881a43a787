"""Command-line surface: argument handling, file formats, exit codes,
schema-conforming outputs. Commands run in-process through main(argv)."""

import csv
import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from fou.cli import load_series_csv, main
from fou.errors import DataFormatError
from fou.foucore import AcfEvaluator, FouModel, SpectralDensity


def _schema(name):
    with resources.files("fou").joinpath(f"schemas/{name}").open() as fh:
        return json.load(fh)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# --------------------------------------------------------------------------
# CSV ingestion

def test_load_csv_with_header_and_blanks(tmp_path):
    p = _write(tmp_path, "a.csv", "value\n1.0\n\n2.5\n3.5\n")
    np.testing.assert_allclose(load_series_csv(p), [1.0, 2.5, 3.5])


def test_load_csv_last_column_of_many(tmp_path):
    p = _write(tmp_path, "b.csv", "t,level\n0,1.5\n1,2.5\n")
    np.testing.assert_allclose(load_series_csv(p), [1.5, 2.5])
    q = _write(tmp_path, "c.tsv", "t\tlevel\n0\t1.25\n1\t2.25\n")
    np.testing.assert_allclose(load_series_csv(q), [1.25, 2.25])


def test_load_csv_reports_bad_line(tmp_path):
    p = _write(tmp_path, "bad.csv", "value\n1.0\nbogus\n2.0\n")
    with pytest.raises(DataFormatError, match="line 3"):
        load_series_csv(p)


# --------------------------------------------------------------------------
# simulate / fit round trip

def test_simulate_then_fit_round_trip(tmp_path, capsys):
    sim_csv = str(tmp_path / "sim.csv")
    rc = main(["simulate", "--lambdas", "1.0,0.3", "--sigma", "1.0",
               "--hurst", "0.7", "--n", "400", "--dt", "0.1",
               "--seed", "3", "--out", sim_csv])
    assert rc == 0
    out = capsys.readouterr().out
    assert "variance" in out.lower() or "gamma" in out.lower()
    vals = load_series_csv(sim_csv)
    assert vals.shape == (400,)

    fit_json = str(tmp_path / "fit.json")
    acf_tsv = str(tmp_path / "acf.tsv")
    rc = main(["fit", "--input", sim_csv, "--structure", "1,1",
               "--horizon", "40.0", "--lags", "8", "--restarts", "4",
               "--seed", "0", "--out", fit_json, "--acf-out", acf_tsv])
    assert rc == 0
    doc = json.loads(open(fit_json).read())
    jsonschema.validate(doc, _schema("fit_result.schema.json"))
    assert len(doc["model"]["lambdas"]) == 2
    assert len(doc["matched_lags"]) == 8
    rows = open(acf_tsv).read().strip().splitlines()
    assert rows[0].split("\t") == ["lag_time", "empirical", "fitted"]
    assert len(rows) > 8


def test_simulate_operator_route(tmp_path):
    sim_csv = str(tmp_path / "op.csv")
    rc = main(["simulate", "--lambdas", "1.0", "--sigma", "1.0",
               "--hurst", "0.75", "--n", "128", "--dt", "0.1",
               "--seed", "1", "--method", "operator", "--out", sim_csv])
    assert rc == 0
    assert load_series_csv(sim_csv).shape == (128,)


def test_simulate_repeated_structure(tmp_path):
    sim_csv = str(tmp_path / "rep.csv")
    rc = main(["simulate", "--lambdas", "1.0", "--structure", "2",
               "--sigma", "1.0", "--hurst", "0.75", "--n", "64",
               "--dt", "0.1", "--seed", "1", "--out", sim_csv])
    assert rc == 0
    assert load_series_csv(sim_csv).shape == (64,)


# --------------------------------------------------------------------------
# evaluate

def test_evaluate_writes_report_table_and_predictions(tmp_path):
    rng = np.random.default_rng(8)
    x = np.cumsum(rng.standard_normal(60)) * 0.3 + 10
    series = "\n".join(f"{v:.6f}" for v in x)
    in_csv = _write(tmp_path, "series.csv", "value\n" + series + "\n")
    out_json = str(tmp_path / "report.json")
    table holds = None
    rc = main(["evaluate", "--input", in_csv, "--structure", "1",
               "--holdout", "5", "--lags", "5", "--restarts", "2",
               "--seed", "0", "--ar", "1", "--out", out_json,
               "--table", str(tmp_path / "table.tsv"),
               "--predictions-dir", str(tmp_path / "preds")])
    assert rc == 0
    doc = json.loads(open(out_json).read())
    jsonschema.validate(doc, _schema("eval_report.schema.json"))
    labels = set(doc["per_model"])
    assert any(l.startswith("FOU") for l in labels)
    assert "AR(1)" in labels
    assert doc["metadata"]["holdout_indices"] == list(range(55, 60))
    assert doc["metadata"]["fitted_on"] == "full-series"
    table = open(tmp_path / "table.tsv").read().strip().splitlines()
    assert table[0].split("\t") == ["Model", "d", "RMSE", "d1", "MAE"]
    assert len(table) == 1 + len(labels)
    pred_files = list((tmp_path / "preds").glob("*.csv"))
    assert len(pred_files) == len(labels)
    with open(pred_files[0]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    assert {"index", "target", "prediction"} <= set(rows[0])


# --------------------------------------------------------------------------
# spectrum / acf

def test_spectrum_marks_singularity(tmp_path):
    out = str(tmp_path / "spec.tsv")
    rc = main(["spectrum", "--lambdas", "1.0", "--sigma", "1.0",
               "--hurst", "0.75", "--xmax", "2.0", "--points", "9",
               "--out", out])
    assert rc == 0
    text = open(out).read()
    assert "singular" in text
    m = FouModel.from_rates([1.0], sigma=1.0, hurst=0.75)
    d = SpectralDensity(m)
    for line in text.splitlines():
        if line.startswith("#") or "\t" not in line or "singular" in line:
            continue
        x, v = map(float, line.split("\t"))
        assert v == pytest.approx(float(d(x)), rel=1e-10)


def test_acf_values_match_library(tmp_path, capsys):
    out = str(tmp_path / "acf.tsv")
    rc = main(["acf", "--lambdas", "1.0,2.0", "--sigma", "1.0",
               "--hurst", "0.75", "--tmax", "2.0", "--points", "5",
               "--out", out])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "0.0917718" in printed
    ev = AcfEvaluator(FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.75))
    lines = [l for l in open(out).read().splitlines()
             if l and not l.startswith("#") and not l.startswith("t")]
    for line in lines:
        t, v = map(float, line.split("\t"))
        assert v == pytest.approx(ev(t), abs=1e-12)


# --------------------------------------------------------------------------
# exit codes

def test_duplicate_rate_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--lambdas", "1.0,1.0", "--sigma", "1",
              "--hurst", "0.7", "--n", "32", "--dt", "0.1", "--seed", "0",
              "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2
    assert "--structure" in capsys.readouterr().err


def test_structure_length_mismatch_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--lambdas", "1.0,2.0", "--structure", "1",
              "--sigma", "1", "--hurst", "0.7", "--n", "32", "--dt", "0.1",
              "--seed", "0", "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2


def test_zero_holdout_is_usage_error(tmp_path):
    p = _write(tmp_path, "s.csv", "value\n" + "\n".join(["1.0"] * 30) + "\n")
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--input", p, "--holdout", "0",
              "--out", str(tmp_path / "r.json")])
    assert exc.value.code == 2


def test_bad_data_exit_code(tmp_path, capsys):
    p = _write(tmp_path, "bad.csv", "value\n1.0\nbogus\n")
    rc = main(["fit", "--input", p, "--out", str(tmp_path / "f.json")])
    assert rc == 3
    assert "line 3" in capsys.readouterr().err


def test_short_series_exit_code(tmp_path, capsys):
    p = _write(tmp_path, "short.csv", "value\n1.0\n2.0\n3.0\n")
    rc = main(["fit", "--input", p, "--out", str(tmp_path / "f.json")])
    assert rc == 3


def test_missing_file_exit_code(tmp_path):
    rc = main(["fit", "--input", str(tmp_path / "nope.csv"),
               "--out", str(tmp_path / "f.json")])
    assert rc == 3
