import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from rdmlab.cli import load_instance, main, SchemaError

DATA = Path(__file__).resolve().parents[1] / "src" / "rdmlab" / "data"


@pytest.fixture
def runner():
    return CliRunner()


def write_bd_csv(path, rates, metrics):
    lines = ["rate,metric"] + [f"{r},{m}" for r, m in zip(rates, metrics)]
    path.write_text("\n".join(lines) + "\n")


def test_load_bundled_instances():
    for name in ("split_chain.json", "constant_task.json"):
        inst = load_instance(DATA / name)
        assert "T" in inst.distortions


def test_schema_errors_carry_field_paths(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": 2}))
    with pytest.raises(SchemaError, match="schema"):
        load_instance(bad)
    bad.write_text(
        json.dumps(
            {
                "schema": 1,
                "alphabets": [4, 2],
                "source": [0.25, 0.25, 0.25, 0.25],
                "stages": [[0, 0, 1, 9]],
                "cuts": {},
                "distortions": {"T": [[0, 1], [1, 0]]},
            }
        )
    )
    with pytest.raises(SchemaError, match="stages"):
        load_instance(bad)


def test_rd_curve_split_matches_direct(runner, tmp_path):
    for approach in ("split", "direct"):
        result = runner.invoke(
            main,
            ["rd-curve", "--instance", str(DATA / "split_chain.json"),
             "--approach", approach, "--cut", "Y",
             "--out", str(tmp_path / approach)],
        )
        assert result.exit_code == 0, result.output
    a = (tmp_path / "split" / "curve.csv").read_text().splitlines()
    b = (tmp_path / "direct" / "curve.csv").read_text().splitlines()
    assert len(a) == len(b)
    for ra, rb in zip(a[1:], b[1:]):
        va, vb = ra.split(","), rb.split(",")
        assert abs(float(va[1]) - float(vb[1])) < 1e-6
        assert abs(float(va[2]) - float(vb[2])) < 1e-6


def test_rd_curve_writes_figure_and_meta(runner, tmp_path):
    result = runner.invoke(
        main,
        ["rd-curve", "--instance", str(DATA / "split_chain.json"),
         "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "curve.png").exists()
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["approach"] == "full"


def test_rd_curve_bad_target_is_usage_error(runner, tmp_path):
    result = runner.invoke(
        main,
        ["rd-curve", "--instance", str(DATA / "split_chain.json"),
         "--approach", "split", "--cut", "Y", "--target", "Z",
         "--out", str(tmp_path)],
    )
    assert result.exit_code == 2


def test_constant_task_collapses_to_one_row(runner, tmp_path):
    result = runner.invoke(
        main,
        ["rd-curve", "--instance", str(DATA / "constant_task.json"),
         "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    rows = (tmp_path / "curve.csv").read_text().splitlines()
    assert len(rows) == 2
    _, rate, dist = rows[1].split(",")
    assert float(rate) == 0.0
    assert float(dist) == 0.0


def test_verify_single_seed(runner, tmp_path):
    result = runner.invoke(
        main, ["verify", "--theorem", "thm1", "--seeds", "1",
               "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    verdict = json.loads((tmp_path / "thm1.json").read_text())
    assert verdict["passed"] is True
    assert verdict["instances"] == 1


def test_verify_unknown_theorem(runner, tmp_path):
    result = runner.invoke(
        main, ["verify", "--theorem", "nope", "--out", str(tmp_path)]
    )
    assert result.exit_code == 2
    assert "thm1" in result.output


def test_verify_zero_tolerance_fails(runner, tmp_path):
    result = runner.invoke(
        main, ["verify", "--theorem", "thm2", "--seeds", "1", "--tol", "0",
               "--out", str(tmp_path)]
    )
    assert result.exit_code == 1


def test_task_app_on_toy_exports(runner, tmp_path):
    from rdmlab.toy_lab import export_feature_sets, sample_dataset

    paths = export_feature_sets(sample_dataset(100_000, 0), tmp_path)
    result = runner.invoke(
        main,
        ["task-app", "--inputs", paths["inputs"], "--inputs", paths["features"],
         "--names", "X", "--names", "Y", "--out", str(tmp_path / "out")],
    )
    assert result.exit_code == 0, result.output
    rows = (tmp_path / "out" / "rho.csv").read_text().splitlines()
    assert rows[0] == "name,rho,monotone_vs_prev"
    x_row = rows[1].split(",")
    y_row = rows[2].split(",")
    assert float(x_row[1]) == pytest.approx(0.479, abs=0.01)
    assert float(y_row[1]) == pytest.approx(725.0, abs=1.0)
    assert x_row[2] == "" and y_row[2] == "true"
    assert (tmp_path / "out" / "rho.png").exists()


def test_task_app_single_input(runner, tmp_path):
    from rdmlab.toy_lab import export_feature_sets, sample_dataset

    paths = export_feature_sets(sample_dataset(10_000, 0), tmp_path)
    result = runner.invoke(
        main, ["task-app", "--inputs", paths["features"],
               "--out", str(tmp_path / "out")]
    )
    assert result.exit_code == 0, result.output
    rows = (tmp_path / "out" / "rho.csv").read_text().splitlines()
    assert len(rows) == 2
    assert rows[1].endswith(",")


def test_task_app_class_count_mismatch(runner, tmp_path):
    from rdmlab.task_appropriateness import LabeledFeatureSet, save_feature_set

    rng = np.random.default_rng(0)
    two = LabeledFeatureSet(rng.normal(size=(40, 2)),
                            np.tile([0, 1], 20), num_classes=2)
    three = LabeledFeatureSet(rng.normal(size=(60, 2)),
                              np.tile([0, 1, 2], 20), num_classes=3)
    save_feature_set(two, tmp_path / "two.lfs")
    save_feature_set(three, tmp_path / "three.lfs")
    result = runner.invoke(
        main,
        ["task-app", "--inputs", str(tmp_path / "two.lfs"),
         "--inputs", str(tmp_path / "three.lfs"), "--out", str(tmp_path / "o")],
    )
    assert result.exit_code == 2
    assert "two" in result.output and "three" in result.output


def test_toy_subcommand(runner, tmp_path):
    result = runner.invoke(
        main, ["toy", "--n", "20000", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["feature_task_error"] == 0.0
    assert abs(meta["input_task_error"] - 0.5) < 0.02
    header = (tmp_path / "points.csv").read_text().splitlines()[0]
    assert header == "u,v,g_u,g_v,label,bin_inputs,bin_features"
    assert (tmp_path / "scatter.png").exists()


def test_bd_subcommand_identity_and_doubling(runner, tmp_path):
    rates = [100, 200, 400, 800]
    metrics = [30, 32, 34, 36]
    write_bd_csv(tmp_path / "a.csv", rates, metrics)
    write_bd_csv(tmp_path / "b.csv", [2 * r for r in rates], metrics)
    same = runner.invoke(
        main, ["bd", "--anchor", str(tmp_path / "a.csv"),
               "--test", str(tmp_path / "a.csv")]
    )
    assert same.exit_code == 0
    assert json.loads(same.output)["bd_rate_percent"] == 0.0
    doubled = runner.invoke(
        main, ["bd", "--anchor", str(tmp_path / "a.csv"),
               "--test", str(tmp_path / "b.csv")]
    )
    assert json.loads(doubled.output)["bd_rate_percent"] == pytest.approx(100.0)


def test_bd_no_overlap_is_error(runner, tmp_path):
    write_bd_csv(tmp_path / "a.csv", [100, 200, 400, 800], [30, 32, 34, 36])
    write_bd_csv(tmp_path / "b.csv", [100, 200, 400, 800], [60, 62, 64, 66])
    result = runner.invoke(
        main, ["bd", "--anchor", str(tmp_path / "a.csv"),
               "--test", str(tmp_path / "b.csv")]
    )
    assert result.exit_code == 2
    assert "overlap" in result.output


def test_missing_input_is_io_error(runner, tmp_path):
    result = runner.invoke(
        main, ["task-app", "--inputs", str(tmp_path / "absent.lfs"),
               "--out", str(tmp_path / "o")]
    )
    assert result.exit_code == 3


def test_reruns_are_byte_identical(runner, tmp_path):
    for sub in ("one", "two"):
        result = runner.invoke(
            main, ["verify", "--theorem", "thm1", "--seeds", "2",
                   "--out", str(tmp_path / sub)]
        )
        assert result.exit_code == 0
    a = (tmp_path / "one" / "thm1.json").read_bytes()
    b = (tmp_path / "two" / "thm1.json").read_bytes()
    assert a == b
