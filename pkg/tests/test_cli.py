import csv
import json

import numpy as np
import pytest

from vqcnet.cli import main, probability_grid
from vqcnet.models import model_from_dict


def run(tmp_path, name, *args):
    out = tmp_path / name
    assert main(["run", *args, "--out", str(out)]) == 0
    return out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def synth_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("synth")
    return {kind: run(base, kind, "--dataset", "synth", "--model", kind, "--trials", "1", "--seed", "0")
            for kind in ("vqc", "hnn")}


def test_run_synth_artifacts(synth_runs):
    out = synth_runs["vqc"]
    assert sorted(p.name for p in out.glob("trial_*.json")) == ["trial_0.json"]
    rows = read_csv(out / "epochs_0.csv")
    assert len(rows) == 11
    assert all(row["out_acc"] != "" for row in rows)
    for name in ("summary.json", "table.txt", "table.csv", "manifest.json", "dataset.csv"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["batch_size"] == 16 and manifest["config"]["epochs"] == 10
    assert set(manifest["transform"]) == {"mean", "std", "max_abs"}


def test_run_bas_has_na_fields(tmp_path):
    out = run(tmp_path, "bas", "--dataset", "bas", "--model", "hnn", "--trials", "2", "--seed", "7",
              "--epochs", "2")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["stats"]["out_accuracy"] is None and summary["stats"]["out_cost"] is None
    row = read_csv(out / "table.csv")[0]
    assert row["out_accuracy_median"] == "N/A" and row["parameters"] == "20"
    assert "N/A" in (out / "table.txt").read_text()


def test_shots_recorded_in_manifest(tmp_path):
    out = run(tmp_path, "shots", "--dataset", "bas", "--model", "vqc", "--trials", "1", "--epochs", "1",
              "--shots", "1024")
    assert json.loads((out / "manifest.json").read_text())["config"]["shots"] == 1024


def test_reruns_are_byte_identical(tmp_path):
    args = ("--dataset", "iris", "--model", "hnn", "--trials", "2", "--epochs", "1", "--seed", "3")
    a, b = run(tmp_path, "a", *args), run(tmp_path, "b", *args)
    names = sorted(p.name for p in a.iterdir() if p.name != "manifest.json")
    assert names == sorted(p.name for p in b.iterdir() if p.name != "manifest.json")
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_table_round_trip(tmp_path, synth_runs, capsys):
    bas = run(tmp_path, "bas", "--dataset", "bas", "--model", "hnn", "--trials", "1", "--epochs", "1")
    files = [str(bas / "summary.json"), str(synth_runs["vqc"] / "summary.json")]
    assert main(["table", *files, "--out", str(tmp_path / "merged")]) == 0
    rows = read_csv(tmp_path / "merged" / "table.csv")
    assert [(r["data"], r["model"], r["parameters"]) for r in rows] == [("bas", "HNN", "20"), ("synth", "VQC", "4")]
    stats = json.loads((synth_runs["vqc"] / "summary.json").read_text())["stats"]
    for metric, entry in stats.items():
        assert float(rows[1][f"{metric}_median"]) == entry["median"]
        assert float(rows[1][f"{metric}_avg"]) == entry["average"]
        assert float(rows[1][f"{metric}_std"]) == entry["std"]
    assert "simulated" in capsys.readouterr().out


def test_table_needs_files():
    with pytest.raises(SystemExit) as exc:
        main(["table"])
    assert exc.value.code == 2


def test_table_rejects_bad_summary(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dataset": "bas"}')
    assert main(["table", str(bad)]) == 1


@pytest.mark.parametrize("argv", [
    ["run", "--dataset", "mnist", "--model", "vqc"],
    ["run", "--dataset", "bas", "--model", "vqc", "--trials", "0"],
    ["run", "--dataset", "bas", "--model", "vqc", "--batch-size", "-2"],
    ["frobnicate"],
])
def test_invalid_flags_exit_two(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_runtime_failure_exits_one(tmp_path, capsys):
    code = main(["run", "--dataset", "bas", "--model", "vqc", "--trials", "1", "--batch-size", "8",
                 "--out", str(tmp_path)])
    assert code == 1
    assert "error" in capsys.readouterr().err


# -- grid ------------------------------------------------------------------------


def test_grid_small_resolution(tmp_path, synth_runs):
    out = tmp_path / "grid"
    assert main(["grid", str(synth_runs["hnn"] / "trial_0.json"), "--resolution", "3", "--out", str(out)]) == 0
    rows = read_csv(out / "grid.csv")
    assert len(rows) == 9
    assert all(0.0 <= float(r["p"]) <= 1.0 for r in rows)
    assert len(read_csv(out / "points.csv")) == 100
    svg = (out / "grid.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 100
    assert json.loads((out / "manifest.json").read_text())["config"]["resolution"] == 3


def test_grid_default_resolution_and_env_fallback(tmp_path, synth_runs, monkeypatch):
    monkeypatch.setenv("VQC_OUT_DIR", str(tmp_path / "env"))
    assert main(["grid", str(synth_runs["vqc"] / "trial_0.json")]) == 0
    assert len(read_csv(tmp_path / "env" / "grid.csv")) == 2500


def test_grid_rejects_non_2d_model(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"model_type": "vqc", "input_dim": 4, "parameters": [0.0] * 8}))
    assert main(["grid", str(path), "--out", str(tmp_path)]) == 1


def max_transect_slope(model, n=400):
    # horizontal transect through the middle of the [0, pi]^2 square, crossing the class boundary
    x0 = np.linspace(0.0, np.pi, n)
    pts = np.column_stack([x0, np.full(n, np.pi / 2)])
    p = (model.output(pts) + 1) / 2
    return np.max(np.abs(np.diff(p) / np.diff(x0)))


def test_hnn_transition_steeper_than_vqc(synth_runs):
    models = {k: model_from_dict(json.loads((v / "trial_0.json").read_text())["model"])
              for k, v in synth_runs.items()}
    assert max_transect_slope(models["hnn"]) > max_transect_slope(models["vqc"])


def test_probability_grid_shape():
    model = model_from_dict({"model_type": "vqc", "input_dim": 2, "parameters": [0.0] * 4})
    grid = probability_grid(model, 4)
    assert grid.shape == (16, 3)
    assert grid[0, 0] == 0.0 and grid[-1, 0] == pytest.approx(np.pi)
