import json

import numpy as np
import pytest

from oracles import nnls_dual
from svmqke import GroupParams, SvmModel
from svmqke.cli import main, parse_seeds
from svmqke.feature_kernel import kernel_block
from svmqke.concepts import Concept, LabeledSample, exact_accuracy, label, read_dataset, write_dataset
from svmqke.runner import ExperimentConfig, run_suite, write_report
from svmqke.svm_solver import dual_objective, predict_many


def run(*argv) -> int:
    return main([str(a) for a in argv])


P23 = ("--p", 23, "--g", 5)


def test_parse_seeds():
    assert parse_seeds("0-3,7") == (0, 1, 2, 3, 7)


def test_gen_round_trip_and_determinism(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("gen", *P23, "--m", 30, "--seed", 4, "--out", a) == 0
    assert run("gen", *P23, "--m", 30, "--seed", 4, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    samples, params, header = read_dataset(a)
    assert len(samples) == 30 and params == GroupParams(23, 5)
    c = Concept(int(header["s"]), params)
    assert all(s.y == label(s.x, c) for s in samples)


def test_gen_rejects_large_k(tmp_path, capsys):
    assert run("gen", *P23, "--k", 4, "--out", tmp_path / "x.jsonl") == 2
    assert "too large" in capsys.readouterr().err
    assert not (tmp_path / "x.jsonl").exists()


def test_gen_challenge_kind(tmp_path):
    assert run("gen", "--kind", "challenge", *P23, "--m", 5, "--m-test", 6,
               "--out", tmp_path / "c.jsonl", "--secret", tmp_path / "s.json") == 0
    assert "hidden_s" in (tmp_path / "s.json").read_text()
    assert run("gen", "--kind", "challenge", *P23, "--out", tmp_path / "d.jsonl") == 2


def test_train_deterministic_and_matches_reference(tmp_path):
    data = tmp_path / "d.jsonl"
    run("gen", "--p", 1019, "--g", 2, "--m", 40, "--seed", 1, "--out", data)
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    assert run("train", "--data", data, "--k", 5, "--out", m1) == 0
    assert run("train", "--data", data, "--k", 5, "--out", m2) == 0
    assert m1.read_bytes() == m2.read_bytes()
    model = SvmModel.load(m1)
    K = (kernel_block(model.train_x, model.train_x, model.config) + 1) / 2
    ref = nnls_dual(K, model.train_y, 0.5)
    assert abs(dual_objective(model.alphas, K, model.train_y, 0.5)
               - dual_objective(ref, K, model.train_y, 0.5)) <= 1e-8


def test_train_two_point_toy(tmp_path):
    data = tmp_path / "toy.jsonl"
    write_dataset(data, [LabeledSample(5, 1), LabeledSample(5, -1)], GroupParams(23, 5), 0)
    assert run("train", "--data", data, "--k", 2, "--out", tmp_path / "m.json") == 0
    assert np.allclose(SvmModel.load(tmp_path / "m.json").alphas, [0.5, 0.5], atol=1e-6)


def test_train_solver_failure_exit_code(tmp_path, capsys):
    data = tmp_path / "d.jsonl"
    run("gen", "--p", 1019, "--g", 2, "--m", 40, "--seed", 1, "--out", data)
    capsys.readouterr()
    assert run("train", "--data", data, "--k", 5, "--max-sweeps", 1, "--out", tmp_path / "m.json") == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "solver" and err["residual"] > 0


def test_eval_exhaustive_matches_exact_accuracy(tmp_path, capsys):
    data, model = tmp_path / "d.jsonl", tmp_path / "m.json"
    run("gen", *P23, "--m", 20, "--seed", 1, "--out", data)
    run("train", "--data", data, "--k", 2, "--out", model)
    capsys.readouterr()
    out = tmp_path / "e.json"
    assert run("eval", "--model", model, "--data", data, "--exhaustive", "--out", out, "--csv", tmp_path / "e.csv") == 0
    report = json.loads(out.read_text())
    m = SvmModel.load(model)
    _, _, header = read_dataset(data)
    ref = exact_accuracy(lambda xs: predict_many(xs, m), Concept(int(header["s"]), m.config.params), batch=8)
    assert report["accuracy"] == ref and report["total"] == 22
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "accuracy,mode,model,s,total"


def test_eval_training_set_and_errors(tmp_path):
    data, model = tmp_path / "d.jsonl", tmp_path / "m.json"
    run("gen", *P23, "--m", 20, "--seed", 1, "--out", data)
    run("train", "--data", data, "--k", 2, "--out", model)
    assert run("eval", "--model", model, "--data", data, "--out", tmp_path / "r.json") == 0
    assert json.loads((tmp_path / "r.json").read_text())["accuracy"] >= 0.7
    empty = tmp_path / "empty.jsonl"
    write_dataset(empty, [], GroupParams(23, 5), 0)
    assert run("eval", "--model", model, "--data", empty) == 2
    other = tmp_path / "other.jsonl"
    run("gen", "--p", 1019, "--g", 2, "--m", 5, "--out", other)
    assert run("eval", "--model", model, "--data", other) == 2


def test_challenge_cli_round_trip(tmp_path, capsys):
    c, s = tmp_path / "c.jsonl", tmp_path / "s.json"
    assert run("challenge", "make", "--p", 65521, "--g", 17, "--seed", 3, "--out", c, "--secret", s) == 0
    ans = tmp_path / "a.json"
    assert run("challenge", "respond", "--challenge", c, "--prover", "dlog", "--out", ans) == 0
    capsys.readouterr()
    code = run("challenge", "verify", "--challenge", c, "--secret", s, "--answer", ans)
    verdict = json.loads(capsys.readouterr().out)
    assert code == (0 if verdict["accepted"] else 4)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([1] * 1000))
    assert run("challenge", "verify", "--challenge", c, "--secret", s, "--answer", bad) == 4
    bad.write_text(json.dumps([1] * 3))
    assert run("challenge", "verify", "--challenge", c, "--secret", s, "--answer", bad) == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        main(["train"])
    assert e.value.code == 2
    assert run("experiment", "nope") == 2


def test_experiment_census_p23(tmp_path, capsys):
    assert run("experiment", "census", *P23, "--k", 2, "--concept-s", 1, "--out-dir", tmp_path) == 0
    report = json.loads((tmp_path / "census.json").read_text())
    assert report["summary"]["violating_fraction"] == "3/11"
    assert report["rows"][0]["seed"] == 0 and len(report["config_hash"]) == 16


def test_experiment_robustness_schema(tmp_path):
    assert run("experiment", "robustness", "--p", 1019, "--g", 2, "--k", 5, "--m", 12, "--m-test", 20,
               "--seeds", "0-1", "--out-dir", tmp_path) == 0
    report = json.loads((tmp_path / "robustness.json").read_text())
    assert sorted({r["R"] for r in report["rows"]}) == [144, 1728, 20736]
    header = (tmp_path / "robustness.csv").read_text().splitlines()[0]
    assert header == "config_hash,R,deviation,seed"
    assert (tmp_path / "robustness.plot.csv").read_text().startswith("seed,x,y")


def test_experiment_challenge_tallies(tmp_path):
    assert run("experiment", "challenge", "--p", 1019, "--g", 2, "--k", 5, "--m", 30, "--m-test", 50,
               "--seeds", "0-2", "--out-dir", tmp_path) == 0
    summary = json.loads((tmp_path / "challenge.json").read_text())["summary"]
    assert set(summary) >= {"svmqke_accepted", "dlog_accepted", "classical_accepted", "runs"}
    assert summary["runs"] == 3


@pytest.mark.parametrize("suite", ["accuracy", "perturbation", "baselines"])
def test_reports_byte_identical(tmp_path, suite):
    cfg = ExperimentConfig(p=1019, g=2, k=5, m=16, m_test=30, seeds=(0, 1), shots=400)
    a = write_report(run_suite(suite, cfg), tmp_path / "a")
    b = write_report(run_suite(suite, cfg, workers=2), tmp_path / "b")
    for key in ("json", "csv"):
        assert a[key].read_bytes() == b[key].read_bytes()
    assert "written_at" in json.loads(a["meta"].read_text())


def test_config_shots_auto_and_hash():
    cfg = ExperimentConfig(m=50, shots="auto")
    assert cfg.resolved_shots() == 50**4
    assert cfg.digest() == ExperimentConfig(m=50, shots="auto").digest()
    assert cfg.digest() != ExperimentConfig(m=51, shots="auto").digest()
