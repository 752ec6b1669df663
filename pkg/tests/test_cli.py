"""End-to-end runs of the command line pipeline, in process.

Every test invokes main(argv) directly and inspects the files it wrote;
nothing here shells out. Outputs carry no timestamps, so reruns with the
same flags must be byte-identical, which several tests pin down.
"""

import hashlib
import json
import os
import pathlib

import numpy as np
import pytest

from multicause.cli import OUTPUT_DIR_ENV, main
from multicause.tables import canonical_json


def run(*argv):
    return main([str(a) for a in argv])


def read_json(directory, name):
    return json.loads((pathlib.Path(directory) / name).read_text())


@pytest.fixture(scope="module")
def flip_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("flip")
    assert run("synth", "--scenario", "flip", "--n", 2000, "--seed", 0, "--out", d) == 0
    return d


@pytest.fixture(scope="module")
def mediation_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("med")
    code = run(
        "synth", "--scenario", "mediation-partial", "--n", 1200, "--seed", 2, "--out", d
    )
    assert code == 0
    return d


@pytest.fixture(scope="module")
def sparse_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("sparse")
    code = run(
        "synth",
        "--scenario",
        "confounded",
        "--n",
        600,
        "--seed",
        3,
        "--missing-rate",
        0.1,
        "--out",
        d,
    )
    assert code == 0
    return d


def test_synth_outputs(flip_data):
    assert (flip_data / "data.csv").exists()
    truth = read_json(flip_data, "truth.json")
    assert truth["scenario"] == "flip"
    assert truth["column_names"] == ["c1", "c2", "c3", "c4", "c5"]
    assert len(truth["true_beta"]) == 5
    assert truth["mediator"] is None
    header = (flip_data / "data.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "id"
    assert "popularity" in header


def test_manifest_hash_is_self_consistent(flip_data):
    manifest = read_json(flip_data, "manifest.json")
    body = {k: manifest[k] for k in ("command", "package_version", "parameters")}
    digest = hashlib.sha256(canonical_json(body).encode()).hexdigest()
    assert manifest["hash"] == digest
    assert manifest["command"] == "synth"
    assert manifest["parameters"]["seed"] == 0


def test_missing_rate_only_for_confounded(tmp_path):
    code = run(
        "synth",
        "--scenario",
        "flip",
        "--n",
        100,
        "--seed",
        0,
        "--missing-rate",
        0.1,
        "--out",
        tmp_path,
    )
    assert code == 1


def effects_args(data_dir, out_dir, *extra):
    return (
        "effects",
        "--input",
        data_dir / "data.csv",
        "--outcome",
        "popularity",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        out_dir,
        *extra,
    )


def test_effects_pipeline_and_rerun_bytes(flip_data, tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert run(*effects_args(flip_data, out1)) == 0
    for name in ("report.txt", "report.json", "model.json", "holdout.json", "manifest.json"):
        assert (out1 / name).exists(), name
    assert run(*effects_args(flip_data, out2)) == 0
    for name in ("report.txt", "report.json", "model.json", "holdout.json", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    report = read_json(out1, "report.json")
    assert report["predictive_check"]["passed"] is True
    assert len(report["causal"]["beta"]) == 5
    assert len(report["noncausal"]["beta"]) == 5
    assert report["screen"]["dropped"] == []
    assert report["manifest_hash"] == read_json(out1, "manifest.json")["hash"]
    text = (out1 / "report.txt").read_text()
    assert "predictive check: score" in text
    assert "non-causal comparison" in text
    # the rendered tables show only intercept and causes, the JSON has all rows
    assert "z1" not in text
    names = [r["name"] for r in report["causal"]["regression"]["rows"]]
    assert "z1" in names


def test_default_k_clamps_below_cause_count(flip_data, tmp_path):
    assert run(*effects_args(flip_data, tmp_path)) == 0
    manifest = read_json(tmp_path, "manifest.json")
    # 'popularity' asks for K=5, but only 4 fits under the 5 causes
    assert manifest["parameters"]["k_requested"] is None
    assert manifest["parameters"]["k"] == 4
    assert read_json(tmp_path, "model.json")["K"] == 4


def test_fit_ppca_then_check_reproduces_the_pipeline_score(flip_data, tmp_path):
    fit_dir = tmp_path / "fit"
    eff_dir = tmp_path / "eff"
    chk_dir = tmp_path / "chk"
    assert run(*effects_args(flip_data, eff_dir)) == 0
    code = run(
        "fit-ppca",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "popularity",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        fit_dir,
    )
    assert code == 0
    code = run(
        "check",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "popularity",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--model",
        fit_dir / "model.json",
        "--mask",
        fit_dir / "holdout.json",
        "--out",
        chk_dir,
    )
    assert code == 0
    check_report = read_json(chk_dir, "report.json")
    pipeline_score = read_json(eff_dir, "report.json")["predictive_check"]["score"]
    assert check_report["score"] == pipeline_score
    assert check_report["passed"] is True


def test_gate_failure_exits_2_and_force_continues(flip_data, tmp_path, capsys):
    blocked = tmp_path / "blocked"
    code = run(*effects_args(flip_data, blocked, "--check-threshold", 0.99))
    assert code == 2
    err = capsys.readouterr().err
    assert "error [ppca]" in err
    assert "hint:" in err
    assert not (blocked / "report.json").exists()

    forced = tmp_path / "forced"
    code = run(*effects_args(flip_data, forced, "--check-threshold", 0.99, "--force"))
    assert code == 0
    err = capsys.readouterr().err
    assert "WARNING: predictive check failed" in err
    assert "FAILED (forced)" in (forced / "report.txt").read_text()
    assert read_json(forced, "report.json")["predictive_check"]["passed"] is False


def test_missing_input_fails_with_stage_and_hint(tmp_path, capsys):
    code = run(
        "effects",
        "--input",
        tmp_path / "nowhere.csv",
        "--outcome",
        "popularity",
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 1
    err = capsys.readouterr().err
    assert "error [dataset]" in err
    assert "hint:" in err


def test_malformed_csv_fails_with_line_number(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,c1,c2,y\nu1,1.0,2.0,3.0\nu2,oops,2.0,1.0\n")
    code = run(
        "effects",
        "--input",
        bad,
        "--outcome",
        "y",
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 1
    assert "line 3" in capsys.readouterr().err


def test_unknown_column_is_rejected(flip_data, tmp_path, capsys):
    code = run(
        "effects",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "no_such_column",
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 1
    assert "not present" in capsys.readouterr().err


def test_check_refuses_model_from_other_columns(flip_data, sparse_data, tmp_path, capsys):
    fit_dir = tmp_path / "fit"
    code = run(
        "fit-ppca",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "popularity",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        fit_dir,
    )
    assert code == 0
    code = run(
        "check",
        "--input",
        sparse_data / "data.csv",
        "--outcome",
        "popularity",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--model",
        fit_dir / "model.json",
        "--mask",
        fit_dir / "holdout.json",
        "--out",
        tmp_path / "chk",
    )
    assert code == 1
    assert "different columns" in capsys.readouterr().err


def test_impute_cli_round_trip(sparse_data, tmp_path):
    out1 = tmp_path / "first"
    code = run(
        "impute",
        "--input",
        sparse_data / "data.csv",
        "--outcome",
        "popularity",
        "--out",
        out1,
    )
    assert code == 0
    report = read_json(out1, "report.json")
    assert report["imputation"]["ran"] is True
    assert report["imputation"]["sweeps"] >= 1
    text = (out1 / "imputed.csv").read_text()
    assert "NA" not in text and ",," not in text

    out2 = tmp_path / "second"
    code = run(
        "impute",
        "--input",
        out1 / "imputed.csv",
        "--outcome",
        "popularity",
        "--out",
        out2,
    )
    assert code == 0
    assert read_json(out2, "report.json")["imputation"]["ran"] is False


def test_effects_on_sparse_data_records_imputation(sparse_data, tmp_path):
    assert run(*effects_args(sparse_data, tmp_path)) == 0
    report = read_json(tmp_path, "report.json")
    assert report["imputation"]["ran"] is True
    assert report["overlap"]["passed"] is True
    assert len(report["causal"]["beta"]) == len(report["screen"]["kept"])


def test_mediate_cli(mediation_data, tmp_path):
    code = run(
        "mediate",
        "--input",
        mediation_data / "data.csv",
        "--outcome",
        "popularity",
        "--mediator",
        "rating",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 0
    report = read_json(tmp_path, "report.json")
    assert "lambda" in report
    assert report["lambda"] == pytest.approx(0.8, abs=0.1)
    assert report["decomposition_residual"] <= 1e-8
    assert set(report["status"]) == {"c1", "c2", "c3", "c4", "c5", "c6"}
    text = (tmp_path / "report.txt").read_text()
    assert "mediation status:" in text
    assert "lambda in the joint fit" in text


def test_mediator_must_differ_from_outcome(mediation_data, tmp_path, capsys):
    code = run(
        "mediate",
        "--input",
        mediation_data / "data.csv",
        "--outcome",
        "rating",
        "--mediator",
        "rating",
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 1
    assert "different columns" in capsys.readouterr().err


def test_robustness_cli_flags_the_flip(flip_data, tmp_path):
    code = run(
        "robustness",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "popularity",
        "--mode",
        "both",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 0
    report = read_json(tmp_path, "report.json")
    noncausal_flips = report["noncausal"]["flips"]
    assert [(f["cause"], f["step"]) for f in noncausal_flips] == [("c1", 5)]
    assert noncausal_flips[0]["from_sign"] == 1
    assert noncausal_flips[0]["to_sign"] == -1
    assert report["causal"]["flips"] == []
    text = (tmp_path / "report.txt").read_text()
    assert "c1: + to - at step 5" in text
    assert text.count("sign flips") == 2


def test_robustness_custom_order(flip_data, tmp_path):
    code = run(
        "robustness",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "popularity",
        "--mode",
        "noncausal",
        "--order",
        "c5,c4,c3,c2,c1",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 0
    report = read_json(tmp_path, "report.json")
    assert report["noncausal"]["order"] == ["c5", "c4", "c3", "c2", "c1"]
    assert report["noncausal"]["flips"] == []
    assert "causal" not in report


def test_compare_predictive_cli(flip_data, tmp_path):
    code = run(
        "compare-predictive",
        "--input",
        flip_data / "data.csv",
        "--outcome",
        "popularity",
        "--corr-threshold",
        0.95,
        "--seed",
        0,
        "--out",
        tmp_path,
    )
    assert code == 0
    report = read_json(tmp_path, "report.json")
    for label in ("causal", "noncausal"):
        assert report["comparison"][label]["mse"] > 0.0
        assert report["comparison"][label]["mae"] > 0.0
    assert "Model" in (tmp_path / "report.txt").read_text()


def test_output_dir_env_var(flip_data, tmp_path, monkeypatch):
    env_dir = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(env_dir))
    code = run(
        "synth", "--scenario", "unconfounded", "--n", 100, "--seed", 7
    )
    assert code == 0
    assert (env_dir / "data.csv").exists()
    # an explicit --out wins over the environment
    flag_dir = tmp_path / "from_flag"
    code = run(
        "synth", "--scenario", "unconfounded", "--n", 100, "--seed", 7, "--out", flag_dir
    )
    assert code == 0
    assert (flag_dir / "data.csv").exists()
    assert (env_dir / "data.csv").read_bytes() == (flag_dir / "data.csv").read_bytes()


def test_ignored_columns_are_dropped(flip_data, tmp_path):
    out = tmp_path / "dropped"
    code = run(
        *effects_args(flip_data, out, "--ignore", "c4")
    )
    assert code == 0
    report = read_json(out, "report.json")
    assert "c4" not in report["screen"]["kept"]
    assert len(report["causal"]["beta"]) == 4
