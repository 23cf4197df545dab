import json
import numpy as np
import pandas as pd
import pytest
from simplex_models.errors import DeltaBelowOne, ParseError, ZeroEntryWithLogModel
from simplex_models.models import ModelSpec, ParameterSet
from sampling.exact import sample_dirichlet
from pipeline.io import (
    matrix_to_json, params_from_json, params_to_json, read_dataset, read_json, write_dataset, write_json,
)
from pipeline.run_config import RunConfig
from score_pipeline import main


LOG_MODEL = ModelSpec(a=0, b=0)


# ----------------------------------------------------------------------
# CSV
# ----------------------------------------------------------------------
def test_dataset_round_trip(tmp_path):
    data = sample_dirichlet([1.0, 2.0, 3.0], 25, seed=8, labels=["a", "b", "c"])
    path = tmp_path / "data.csv"
    write_dataset(path, data)
    back = read_dataset(path, LOG_MODEL)
    assert back.labels == ["a", "b", "c"]
    np.testing.assert_allclose(back.samples, data.samples, rtol=0, atol=1e-12)


def test_read_dataset_without_header(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("0.2,0.8\n0.5,0.5\n")
    data = read_dataset(path)
    assert data.labels is None
    assert data.n == 2


def test_read_counts_with_pseudocount(tmp_path):
    path = tmp_path / "counts.csv"
    pd.DataFrame({"x": [0, 2], "y": [1, 2], "z": [3, 0]}).to_csv(path, index=False)
    with pytest.raises(ZeroEntryWithLogModel):
        read_dataset(path, LOG_MODEL, close=True)
    data = read_dataset(path, LOG_MODEL, close=True, pseudocount=0.5)
    assert data.provenance == "counts"
    np.testing.assert_allclose(data.samples[0], [0.5 / 5.5, 1.5 / 5.5, 3.5 / 5.5])


def test_read_dataset_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        read_dataset(tmp_path / "missing.csv")
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n0.5,oops\n")
    with pytest.raises(ParseError):
        read_dataset(path)


# ----------------------------------------------------------------------
# JSON
# ----------------------------------------------------------------------
def test_json_envelope_is_canonical(tmp_path):
    first, second = tmp_path / "one.json", tmp_path / "two.json"
    payload = {"b": np.arange(3), "a": ModelSpec(a=0.5, b=1.0)}
    write_json(first, payload, "abc")
    write_json(second, dict(reversed(list(payload.items()))), "abc")
    assert first.read_bytes() == second.read_bytes()
    document = read_json(first)
    assert document["schema_version"] == 1
    assert document["fingerprint"] == "abc"
    assert document["a"]["mode"] == "general"


def test_params_json_round_trip():
    params = ParameterSet(K=np.arange(4.0).reshape(2, 2), eta=[1.0, -1.0])
    back = params_from_json(json.loads(json.dumps(params_to_json(params))))
    np.testing.assert_array_equal(back.K, params.K)
    with pytest.raises(ParseError):
        params_from_json({"K": [[1.0]]})


def test_matrix_to_json_writes_null_for_nan():
    assert matrix_to_json(np.array([[np.nan, 0.5], [0.5, np.nan]])) == [[None, 0.5], [0.5, None]]


# ----------------------------------------------------------------------
# run configuration
# ----------------------------------------------------------------------
def test_run_config_rejects_small_delta():
    with pytest.raises(DeltaBelowOne):
        RunConfig(spec=LOG_MODEL, delta=0.5)


def test_run_config_settings():
    run = RunConfig(spec=LOG_MODEL, J_count=10, seed=4)
    settings = run.settings(6)
    assert settings.J_policy == "random"
    assert settings.J_count == 6
    assert settings.J_seed == 4
    explicit = RunConfig(spec=LOG_MODEL, J=[0, 2]).settings(6)
    assert explicit.dropped(6) == (0, 2)


# ----------------------------------------------------------------------
# command line
# ----------------------------------------------------------------------
def simulate(out, seed=0, n=150):
    argv = [
        "simulate", "--truth", "banded", "--sampler", "logistic", "--m", "5", "--s", "1",
        "--n", str(n), "--seed", str(seed), "--out", str(out),
    ]
    assert main(argv) == 0
    return out / "data.csv", out / "truth.json"


def estimate(data, out, *extra):
    argv = ["estimate", str(data), "--mode", "am1", "--n-lambda", "8", "--folds", "3", "--out", str(out), *extra]
    return main(argv)


def test_simulate_dirichlet(tmp_path):
    argv = ["simulate", "--truth", "dirichlet", "--dirichlet-alpha", "1", "2", "4", "--n", "40", "--out", str(tmp_path)]
    assert main(argv) == 0
    data = read_dataset(tmp_path / "data.csv", LOG_MODEL)
    truth = read_json(tmp_path / "truth.json")
    assert data.n == 40
    assert truth["truth"]["eta"] == [0.0, 1.0, 3.0]


def test_estimate_and_eval_round_trip(tmp_path):
    data, truth = simulate(tmp_path / "sim")
    assert estimate(data, tmp_path / "fit") == 0
    fitted = read_json(tmp_path / "fit" / "estimate.json")
    K = np.array(fitted["selected"]["K"])
    assert K.shape == (5, 5)
    assert np.count_nonzero(K) <= 25
    assert len(fitted["path"]) == 8
    assert fitted["lambda_star"] in [entry["lambda"] for entry in fitted["path"]]

    argv = ["eval", "--estimate", str(tmp_path / "fit" / "estimate.json"), "--truth", str(truth), "--out", str(tmp_path / "eval")]
    assert main(argv) == 0
    metrics = read_json(tmp_path / "eval" / "metrics.json")
    assert 0.0 <= metrics["auc"] <= 1.0
    assert len(metrics["per_lambda"]) == 8
    assert set(metrics["norm_errors"]) == {"max", "frobenius", "spectral"}
    assert (metrics["c"], metrics["pi"]) == (2.0, 1.0)
    table = pd.read_csv(tmp_path / "eval" / "auc_table.csv")
    assert list(table.columns) == ["c", "pi", "auc"]
    assert table.loc[0, "c"] == 2.0 and table.loc[0, "pi"] == 1.0
    assert table.loc[0, "auc"] == pytest.approx(metrics["auc"])
    roc = pd.read_csv(tmp_path / "eval" / "roc.csv")
    assert list(roc.columns) == ["fpr", "tpr"]
    assert len(roc) == len(metrics["roc"])


def test_estimate_is_reproducible_across_threads(tmp_path):
    data, _ = simulate(tmp_path / "sim", seed=5)
    assert estimate(data, tmp_path / "one", "--threads", "1") == 0
    assert estimate(data, tmp_path / "two", "--threads", "3") == 0
    one = (tmp_path / "one" / "estimate.json").read_bytes()
    assert one == (tmp_path / "two" / "estimate.json").read_bytes()
    assert "threads" not in read_json(tmp_path / "one" / "estimate.json")["config"]


def test_am1_mode_rejects_power_exponents(tmp_path):
    data, _ = simulate(tmp_path / "sim")
    assert estimate(data, tmp_path / "fit", "--a", "1") == 3


def test_invalid_fold_count_is_a_validation_error(tmp_path):
    data, _ = simulate(tmp_path / "sim")
    assert estimate(data, tmp_path / "fit", "--folds", "1") == 3


def test_missing_input_is_a_parse_error(tmp_path):
    assert estimate(tmp_path / "missing.csv", tmp_path / "fit") == 2


def test_eval_rejects_mismatched_truth(tmp_path):
    data, _ = simulate(tmp_path / "sim")
    assert estimate(data, tmp_path / "fit") == 0
    argv = ["simulate", "--truth", "dirichlet", "--n", "10", "--out", str(tmp_path / "other")]
    assert main(argv) == 0
    argv = [
        "eval", "--estimate", str(tmp_path / "fit" / "estimate.json"),
        "--truth", str(tmp_path / "other" / "truth.json"), "--out", str(tmp_path / "eval"),
    ]
    assert main(argv) == 3


def test_difftest_report(tmp_path):
    first, _ = simulate(tmp_path / "g1", seed=1, n=60)
    second, _ = simulate(tmp_path / "g2", seed=2, n=60)
    argv = [
        "difftest", str(first), str(second), "--mode", "am1", "--B", "2", "--n-lambda", "4",
        "--folds", "3", "--out", str(tmp_path / "diff"),
    ]
    assert main(argv) == 0
    report = read_json(tmp_path / "diff" / "report.json")
    assert report["B"] == 2
    assert report["family"] == "unordered"
    assert report["local_p"][0][0] is None
    assert set(report["degrees"]) == {"x1", "x2", "x3", "x4", "x5"}


def test_study_J_comparison(tmp_path):
    argv = [
        "study", "--kind", "J", "--m", "5", "--s", "1", "--n", "80", "--trials", "1",
        "--sampler", "logistic", "--out", str(tmp_path),
    ]
    assert main(argv) == 0
    table = pd.read_csv(tmp_path / "J_comparison.csv")
    assert list(table.columns) == ["seed", "averaged", "single_mean", "single_max"]
    assert len(table) == 1


def test_simulate_output_ignores_threads_and_destination(tmp_path):
    argv = ["simulate", "--truth", "dirichlet", "--n", "20", "--seed", "3"]
    assert main(argv + ["--threads", "1", "--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--threads", "2", "--out", str(tmp_path / "b")]) == 0
    for name in ("data.csv", "truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_difftest_report_is_byte_identical_across_threads(tmp_path):
    first, _ = simulate(tmp_path / "g1", seed=1, n=60)
    second, _ = simulate(tmp_path / "g2", seed=2, n=60)
    reports = []
    for threads in ("1", "2"):
        out = tmp_path / f"diff{threads}"
        argv = [
            "difftest", str(first), str(second), "--mode", "am1", "--B", "2", "--n-lambda", "4",
            "--folds", "3", "--threads", threads, "--out", str(out),
        ]
        assert main(argv) == 0
        reports.append((out / "report.json").read_bytes())
    assert reports[0] == reports[1]
