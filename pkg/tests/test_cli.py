import json
import os

import numpy as np
import pandas as pd
import pytest

from attnet.cli import main
from attnet.data import gen_synthetic_multiview, load_image_tensor, save_dataset, write_labels
from attnet.tensor import DenseTensor, write_tensor


@pytest.fixture
def tensor_file(tmp_path, rng):
    path = str(tmp_path / "x.attn")
    write_tensor(path, DenseTensor(rng.standard_normal((4, 5, 6))))
    return path


@pytest.fixture
def chain_file(tmp_path, planted_chain):
    x, _ = planted_chain(3, dims=(4, 4, 4), rank=2)
    path = str(tmp_path / "chain.attn")
    write_tensor(path, x)
    return path


@pytest.fixture
def dataset_dir(tmp_path):
    dataset = gen_synthetic_multiview(
        k=2, per_cluster=10, views=2, subspace_dim=2, noise_sigma=0.0, seed=5
    )
    return save_dataset(dataset, str(tmp_path / "dataset"))


def _read_json(path):
    with open(path) as f:
        return json.load(f)


def test_decompose_tucker_full(tensor_file, tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["decompose", tensor_file, "--method", "tucker", "--ranks", "full", "--out", out]) == 0

    report = _read_json(os.path.join(out, "tucker", "report.json"))
    assert report["rse"] <= 1e-10
    assert report["storage_cost"] == 120 + 16 + 25 + 36
    assert report["converged"] is True
    assert "elapsed" in report["timings"]
    for c in range(4):
        assert os.path.exists(os.path.join(out, "tucker", "component_{}.attn".format(c)))
    reconstruction = load_image_tensor(os.path.join(out, "tucker", "reconstruction.attn"))
    original = load_image_tensor(tensor_file)
    np.testing.assert_allclose(reconstruction.data, original.data, atol=1e-10)
    assert capsys.readouterr().out.startswith("tucker: RSE=")


def test_decompose_several_methods(tensor_file, tmp_path):
    out = str(tmp_path / "out")
    code = main(
        [
            "decompose", tensor_file, "--method", "tt,tr,fctn", "--ranks", "2",
            "--iter-max", "20", "--allow-nonconverged", "--out", out,
        ]
    )
    assert code == 0

    table = pd.read_csv(os.path.join(out, "comparison.csv"))
    assert list(table["Method"]) == ["TT", "TR", "FCTN"]
    assert list(table.columns) == [
        "Method", "RSE", "Time", "StorageCost", "Iterations", "CompressionRatio",
    ]
    np.testing.assert_allclose(table["CompressionRatio"], 120 / table["StorageCost"])
    for method in ("tt", "tr", "fctn"):
        assert os.path.exists(os.path.join(out, method, "factors", "manifest.json"))

    manifest = _read_json(os.path.join(out, "run_manifest.json"))
    assert manifest["command"][0] == "decompose"
    assert manifest["seeds"] == [0]
    assert tensor_file in manifest["inputs"]
    assert os.path.join(out, "comparison.csv") in manifest["outputs"]
    assert set(manifest["timings"]) == {"load", "tt", "tr", "fctn"}


def test_decompose_adaptive(chain_file, tmp_path):
    out = str(tmp_path / "out")
    args = ["decompose", chain_file, "--epsilon", "0.05", "--allow-nonconverged"]
    assert main(args + ["--out", out]) == 0
    assert main(args + ["--out", str(tmp_path / "again")]) == 0

    first = _read_json(os.path.join(out, "attn", "report.json"))
    second = _read_json(str(tmp_path / "again" / "attn" / "report.json"))
    first.pop("timings")
    second.pop("timings")
    first.pop("input")
    second.pop("input")
    assert first == second
    assert first["spec"]["options"]["epsilon"] == 0.05
    assert "delta_table" in first["details"]

    manifest = _read_json(os.path.join(out, "attn", "factors", "manifest.json"))
    assert len(manifest["factors"]) == 3


def test_decompose_config_keeps_flags(chain_file, tmp_path):
    config = tmp_path / "attn.yml"
    config.write_text("prune: false\nincrement: false\nr_init: 3\n")
    out = str(tmp_path / "out")
    args = ["decompose", chain_file, "--config", str(config), "--iter-max", "2", "--tol", "1e-9"]
    assert main(args + ["--out", out, "--allow-nonconverged"]) == 0

    report = _read_json(os.path.join(out, "attn", "report.json"))
    assert report["spec"]["options"] == {"prune": False, "increment": False, "r_init": 3, "rng_seed": 0}
    assert report["iterations"] == 2
    assert report["details"]["sweeps_used"] == 2

    config.write_text("r_init: 1\n")
    assert main(args + ["--out", out]) == 2


def test_output_directory_from_environment(tensor_file, tmp_path, monkeypatch):
    out = str(tmp_path / "from_env")
    monkeypatch.setenv("ATTNET_OUTPUT_DIR", out)
    assert main(["decompose", tensor_file, "--method", "tucker", "--ranks", "2", "--allow-nonconverged"]) == 0
    assert os.path.exists(os.path.join(out, "comparison.csv"))


def test_decompose_errors(tensor_file, tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["decompose", str(tmp_path / "missing.attn"), "--out", out]) == 2
    assert main(["decompose", tensor_file, "--method", "cp", "--out", out]) == 2
    assert main(["decompose", tensor_file, "--method", "tt", "--ranks", "2,2,2", "--out", out]) == 2
    assert "error (" in capsys.readouterr().err


def test_cluster(dataset_dir, tmp_path):
    out = str(tmp_path / "out")
    code = main(
        ["cluster", dataset_dir, "--s-solver", "identity", "--trials", "2", "--jobs", "2", "--out", out]
    )
    assert code == 0

    for t in range(2):
        for name in ("labels_trial_{}.txt", "trace_trial_{}.csv", "affinity_trial_{}.attn"):
            assert os.path.exists(os.path.join(out, name.format(t)))
    summary = pd.read_csv(os.path.join(out, "summary.csv"), index_col="metric")
    assert list(summary.index) == ["f_score", "precision", "recall", "nmi", "ar", "acc"]
    assert summary.loc["acc", "mean"] >= 0.95

    trials = pd.read_csv(os.path.join(out, "trials.csv"), index_col="trial")
    assert list(trials["seed"]) == [0, 1]

    report = _read_json(os.path.join(out, "report.json"))
    assert report["dataset"] == {"name": "synthetic", "I": 20, "V": 2, "k": 2}
    assert report["config"]["s_solver"] == "identity"
    assert len(report["trials"]) == 2
    assert len(report["timings"]) == 2

    manifest = _read_json(os.path.join(out, "run_manifest.json"))
    assert manifest["seeds"] == [0, 1]
    assert dataset_dir in manifest["inputs"]


def test_cluster_sweep(dataset_dir, tmp_path):
    out = str(tmp_path / "out")
    code = main(
        ["cluster", dataset_dir, "--s-solver", "identity", "--sweep", "lambda=0.1,1", "--out", out]
    )
    assert code == 0

    sweep = pd.read_csv(os.path.join(out, "sweep_lambda.csv"))
    assert list(sweep["lambda"]) == [0.1, 1.0]
    assert {"acc", "acc_std", "nmi", "converged"} <= set(sweep.columns)
    for value in ("0.1", "1.0"):
        directory = os.path.join(out, "lambda_{}".format(value))
        assert os.path.exists(os.path.join(directory, "summary.csv"))
        report = _read_json(os.path.join(directory, "report.json"))
        assert report["config"]["lambda"] == float(value)


def test_cluster_without_labels(dataset_dir, tmp_path):
    os.remove(os.path.join(dataset_dir, "labels.txt"))
    out = str(tmp_path / "out")
    assert main(["cluster", dataset_dir, "--s-solver", "identity", "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "labels_trial_0.txt"))
    assert not os.path.exists(os.path.join(out, "summary.csv"))
    assert _read_json(os.path.join(out, "report.json"))["summary"] is None


def test_cluster_nonconverged(dataset_dir, tmp_path):
    args = ["cluster", dataset_dir, "--s-solver", "identity", "--iter-max", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 1
    assert main(args + ["--out", str(tmp_path / "b"), "--allow-nonconverged"]) == 0


def test_cluster_errors(dataset_dir, tmp_path):
    out = str(tmp_path / "out")
    assert main(["cluster", str(tmp_path / "missing"), "--out", out]) == 2
    assert main(["cluster", dataset_dir, "--sweep", "mu=1,2", "--out", out]) == 2
    assert main(["cluster", dataset_dir, "--reshape", "3,5,3,5", "--out", out]) == 2


def test_metrics(tmp_path, capsys, label_fixture):
    true_path = str(tmp_path / "true.txt")
    pred_path = str(tmp_path / "pred.txt")
    write_labels(true_path, label_fixture[0])
    write_labels(pred_path, label_fixture[1])

    assert main(["metrics", true_path, true_path]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert metrics == pytest.approx({m: 1.0 for m in metrics})

    out = str(tmp_path / "metrics.json")
    assert main(["metrics", true_path, pred_path, "--out", out]) == 0
    metrics = _read_json(out)
    assert metrics["acc"] == pytest.approx(0.75)
    assert metrics["f_score"] == pytest.approx(0.4)
    assert metrics["ar"] == pytest.approx(0.0, abs=1e-12)

    write_labels(pred_path, [0, 1, 1])
    assert main(["metrics", true_path, pred_path]) == 2
