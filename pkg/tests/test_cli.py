import json
import logging

import pandas as pd
import pytest
from click.testing import CliRunner

from src.main import cli

TRAINING = ["--epochs", "3", "--learning-rate", "0.3", "--seed", "1"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def data_args(synthetic_files):
    csv_path, schema_path = synthetic_files
    return ["--data", str(csv_path), "--schema", str(schema_path)]


@pytest.fixture
def importance_file(runner, data_args, tmp_path):
    out = tmp_path / "importance.json"
    result = runner.invoke(cli, ["importance", *data_args, "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


def test_synth_writes_dataset_schema_and_manifest(runner, tmp_path):
    out = tmp_path / "xor.csv"
    result = runner.invoke(cli, ["synth", "--kind", "xor", "--repeats", "2", "--out", str(out)])

    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(out)) == 8
    assert (tmp_path / "xor.schema.json").exists()
    manifest = json.loads((tmp_path / "xor.csv.manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["outputs"] == ["xor.csv", "xor.schema.json"]


def test_importance_file_shape_and_determinism(runner, data_args, importance_file, tmp_path):
    content = json.loads(importance_file.read_text())
    # 4 continuous features x 2 classes
    assert len(content["entries"]) == 8
    assert content["scope"] == "full"

    again = tmp_path / "again.json"
    result = runner.invoke(cli, ["importance", *data_args, "--out", str(again)])
    assert result.exit_code == 0
    assert again.read_bytes() == importance_file.read_bytes()
    assert "x0" in result.output


def test_train_scope_requires_split_flags(runner, data_args, tmp_path):
    result = runner.invoke(
        cli, ["importance", *data_args, "--scope", "train", "--out", str(tmp_path / "i.json")]
    )
    assert result.exit_code == 2
    assert "--seed" in result.output
    assert not (tmp_path / "i.json").exists()


def test_train_scope_with_split_flags(runner, data_args, tmp_path):
    out = tmp_path / "i.json"
    result = runner.invoke(
        cli,
        [
            "importance",
            *data_args,
            "--scope",
            "train",
            "--seed",
            "3",
            "--train-fraction",
            "0.5",
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    content = json.loads(out.read_text())
    assert content["seed"] == 3 and content["train_fraction"] == 0.5


def test_cann_training_needs_importance(runner, data_args, tmp_path):
    result = runner.invoke(
        cli, ["train", *data_args, "--method", "cann", "--p", "0.5", "--out", str(tmp_path / "m")]
    )
    assert result.exit_code == 2
    assert "--importance" in result.output


def test_plain_training_warns_about_importance(
    runner, data_args, importance_file, tmp_path, caplog
):
    out = tmp_path / "plain.json"
    with caplog.at_level(logging.WARNING):
        result = runner.invoke(
            cli,
            [
                "train",
                *data_args,
                *TRAINING,
                "--method",
                "plain",
                "--importance",
                str(importance_file),
                "--out",
                str(out),
            ],
        )
    assert result.exit_code == 0, result.output
    assert any("ignored" in record.getMessage() for record in caplog.records)
    assert out.exists()


def test_full_blend_cann_matches_plain_and_logs_correlation_error(
    runner, data_args, importance_file, tmp_path
):
    plain_out, cann_out = tmp_path / "plain.json", tmp_path / "cann.json"
    plain = runner.invoke(
        cli, ["train", *data_args, *TRAINING, "--method", "plain", "--out", str(plain_out)]
    )
    cann = runner.invoke(
        cli,
        [
            "train",
            *data_args,
            *TRAINING,
            "--method",
            "cann",
            "--p",
            "1.0",
            "--importance",
            str(importance_file),
            "--out",
            str(cann_out),
        ],
    )
    assert plain.exit_code == 0, plain.output
    assert cann.exit_code == 0, cann.output

    plain_model = json.loads(plain_out.read_text())
    cann_model = json.loads(cann_out.read_text())
    assert cann_model["weights"] == plain_model["weights"]
    assert cann_model["biases"] == plain_model["biases"]

    log = pd.read_csv(tmp_path / "cann.log.csv")
    assert list(log["epoch"]) == [1, 2, 3]
    assert log["correlation_error"].notna().all()
    assert pd.read_csv(tmp_path / "plain.log.csv")["correlation_error"].isna().all()


def test_importance_for_another_dataset_is_refused(runner, importance_file, tmp_path):
    other_csv = tmp_path / "other.csv"
    result = runner.invoke(cli, ["synth", "--seed", "9", "--n-noise", "3", "--out", str(other_csv)])
    assert result.exit_code == 0
    result = runner.invoke(
        cli,
        [
            "train",
            "--data",
            str(other_csv),
            "--schema",
            str(tmp_path / "other.schema.json"),
            "--importance",
            str(importance_file),
            "--out",
            str(tmp_path / "m.json"),
        ],
    )
    assert result.exit_code == 1
    assert "different dataset" in result.output
    assert not (tmp_path / "m.json").exists()


def bench_args(data_args, out_dir, *extra):
    return [
        "bench",
        *data_args,
        *TRAINING,
        "--trials",
        "2",
        "--fraction",
        "0.5",
        "--out",
        str(out_dir),
        *extra,
    ]


def test_bench_writes_paired_reports_and_is_repeatable(runner, data_args, tmp_path):
    out_dir = tmp_path / "bench"
    result = runner.invoke(cli, bench_args(data_args, out_dir, "--keep-fraction", "0.75"))
    assert result.exit_code == 0, result.output

    names = sorted(path.name for path in out_dir.iterdir())
    assert names == [
        "cann_report.json",
        "cann_trials.csv",
        "manifest.json",
        "plain_report.json",
        "plain_selected_report.json",
        "plain_selected_trials.csv",
        "plain_trials.csv",
    ]
    plain = json.loads((out_dir / "plain_report.json").read_text())
    cann = json.loads((out_dir / "cann_report.json").read_text())
    assert plain["fingerprint"]["seeds"] == cann["fingerprint"]["seeds"] == [1, 2]

    first = {name: (out_dir / name).read_bytes() for name in names if name != "manifest.json"}
    rerun = runner.invoke(cli, bench_args(data_args, out_dir, "--keep-fraction", "0.75"))
    assert rerun.exit_code == 0, rerun.output
    assert all((out_dir / name).read_bytes() == content for name, content in first.items())


def test_bench_refuses_a_different_run_without_force(runner, data_args, tmp_path):
    out_dir = tmp_path / "bench"
    assert runner.invoke(cli, bench_args(data_args, out_dir)).exit_code == 0

    conflicting = runner.invoke(cli, bench_args(data_args, out_dir, "--p", "0.3"))
    assert conflicting.exit_code == 1
    assert "--force" in conflicting.output

    forced = runner.invoke(cli, bench_args(data_args, out_dir, "--p", "0.3", "--force"))
    assert forced.exit_code == 0, forced.output
    assert json.loads((out_dir / "manifest.json").read_text())["flags"]["p"] == 0.3


def test_forced_bench_removes_files_of_the_replaced_run(runner, data_args, tmp_path):
    out_dir = tmp_path / "bench"
    first = runner.invoke(cli, bench_args(data_args, out_dir, "--keep-fraction", "0.75"))
    assert first.exit_code == 0, first.output
    assert (out_dir / "plain_selected_trials.csv").exists()

    forced = runner.invoke(cli, bench_args(data_args, out_dir, "--p", "0.3", "--force"))
    assert forced.exit_code == 0, forced.output

    manifest = json.loads((out_dir / "manifest.json").read_text())
    on_disk = sorted(path.name for path in out_dir.iterdir())
    assert on_disk == sorted([*manifest["outputs"], "manifest.json"])
    assert "plain_selected_report.json" not in on_disk


def test_bench_with_matched_data_step(runner, data_args, tmp_path):
    out_dir = tmp_path / "bench"
    result = runner.invoke(
        cli, bench_args(data_args, out_dir, "--p", "0.5", "--match-data-step")
    )
    assert result.exit_code == 0, result.output

    cann = json.loads((out_dir / "cann_report.json").read_text())
    plain = json.loads((out_dir / "plain_report.json").read_text())
    assert cann["fingerprint"]["learning_rate"] == pytest.approx(0.6)
    assert plain["fingerprint"]["learning_rate"] == pytest.approx(0.3)

    refused = runner.invoke(
        cli, bench_args(data_args, tmp_path / "other", "--p", "0", "--match-data-step")
    )
    assert refused.exit_code == 2


def test_curve_has_a_point_per_method_and_fraction(runner, data_args, tmp_path):
    out = tmp_path / "curve.csv"
    args = [
        "curve",
        *data_args,
        *TRAINING,
        "--trials",
        "2",
        "--fractions",
        "0.25,0.5,0.75",
        "--out",
        str(out),
    ]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output

    frame = pd.read_csv(out)
    assert len(frame) == 6
    assert sorted(frame["method"].unique()) == ["cann", "plain"]
    assert (tmp_path / "curve.csv.manifest.json").exists()

    first = out.read_bytes()
    assert runner.invoke(cli, args).exit_code == 0
    assert out.read_bytes() == first


def test_curve_rejects_unordered_fractions(runner, data_args, tmp_path):
    out = tmp_path / "curve.csv"
    result = runner.invoke(
        cli, ["curve", *data_args, "--fractions", "0.5,0.2", "--out", str(out)]
    )
    assert result.exit_code == 1
    assert not out.exists()
