"""Command-line pipeline: artifacts, exit codes, config precedence."""

from __future__ import annotations

import json
import pathlib

import pytest
from click.testing import CliRunner

from reentrylab.cli import main
from reentrylab.datagen import DATASET_HEADER

HEADER_LINE = ",".join(DATASET_HEADER)


@pytest.fixture()
def runner():
    return CliRunner()


def _write(path: pathlib.Path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


# ----------------------------------------------------------------- generate


def test_generate_writes_corpus_identical_to_the_library_path(
    runner, tmp_path, dataset_csv_path
):
    result = runner.invoke(main, ["generate", "--out", str(tmp_path), "--seed", "0"])
    assert result.exit_code == 0
    assert "105 rows (53 benign, 52 harmful)" in result.output
    assert "45 contracts" in result.output
    dataset = tmp_path / "dataset.csv"
    catalog = tmp_path / "catalog.csv"
    lines = dataset.read_text(encoding="utf-8").splitlines()
    assert lines[0] == HEADER_LINE
    assert len(lines) == 106
    assert len(catalog.read_text(encoding="utf-8").splitlines()) == 46
    assert dataset.read_bytes() == pathlib.Path(dataset_csv_path).read_bytes()


def test_generate_is_deterministic_per_seed(runner, tmp_path):
    for sub in ("a", "b"):
        result = runner.invoke(
            main, ["generate", "--out", str(tmp_path / sub), "--seed", "3"]
        )
        assert result.exit_code == 0
    assert (tmp_path / "a" / "dataset.csv").read_bytes() == (
        tmp_path / "b" / "dataset.csv"
    ).read_bytes()
    assert (tmp_path / "a" / "catalog.csv").read_bytes() == (
        tmp_path / "b" / "catalog.csv"
    ).read_bytes()


def test_generate_honors_the_output_env_var(runner, tmp_path):
    result = runner.invoke(
        main,
        ["generate", "--seed", "0"],
        env={"REENTRYLAB_OUT": str(tmp_path)},
    )
    assert result.exit_code == 0
    assert (tmp_path / "dataset.csv").exists()
    assert (tmp_path / "catalog.csv").exists()


def test_generate_gas_schedule_file_changes_the_corpus(
    runner, tmp_path, dataset_csv_path
):
    schedule = _write(tmp_path / "gas.json", json.dumps({"arith": 50}))
    result = runner.invoke(
        main,
        ["generate", "--out", str(tmp_path), "--seed", "0", "--gas-schedule", schedule],
    )
    assert result.exit_code == 0
    assert (tmp_path / "dataset.csv").read_bytes() != pathlib.Path(
        dataset_csv_path
    ).read_bytes()


def test_generate_rejects_bad_gas_schedule(runner, tmp_path):
    schedule = _write(tmp_path / "gas.json", json.dumps({"blobs": 1}))
    result = runner.invoke(
        main, ["generate", "--out", str(tmp_path), "--gas-schedule", schedule]
    )
    assert result.exit_code == 3


def test_generate_undisguised_changes_the_corpus(runner, tmp_path, dataset_csv_path):
    result = runner.invoke(
        main, ["generate", "--out", str(tmp_path), "--seed", "0", "--undisguised"]
    )
    assert result.exit_code == 0
    assert (tmp_path / "dataset.csv").read_bytes() != pathlib.Path(
        dataset_csv_path
    ).read_bytes()


def test_generate_config_overrides_flags(runner, tmp_path):
    config = _write(tmp_path / "cfg.json", json.dumps({"seed": 7}))
    first = runner.invoke(
        main,
        ["generate", "--out", str(tmp_path / "via-config"), "--seed", "0", "--config", config],
    )
    second = runner.invoke(
        main, ["generate", "--out", str(tmp_path / "via-flag"), "--seed", "7"]
    )
    assert first.exit_code == 0 and second.exit_code == 0
    assert (tmp_path / "via-config" / "dataset.csv").read_bytes() == (
        tmp_path / "via-flag" / "dataset.csv"
    ).read_bytes()


@pytest.mark.parametrize(
    "content,code",
    [
        ('{"sed": 1}', 3),
        ("[1, 2]", 3),
        ("{", 3),
    ],
    ids=["unknown-key", "not-an-object", "invalid-json"],
)
def test_config_file_validation(runner, tmp_path, content, code):
    config = _write(tmp_path / "cfg.json", content)
    result = runner.invoke(
        main, ["generate", "--out", str(tmp_path), "--config", config]
    )
    assert result.exit_code == code
    assert "error:" in result.output


def test_missing_config_file_is_an_io_error(runner, tmp_path):
    result = runner.invoke(
        main,
        ["generate", "--out", str(tmp_path), "--config", str(tmp_path / "none.json")],
    )
    assert result.exit_code == 2


def test_unusable_output_directory_is_an_io_error(runner, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory", encoding="utf-8")
    result = runner.invoke(
        main, ["generate", "--out", str(blocker / "sub"), "--seed", "0"]
    )
    assert result.exit_code == 2
    assert "error:" in result.output


# --------------------------------------------------------------------- eval


def test_eval_writes_reports_and_figures(runner, tmp_path, dataset_csv_path):
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset",
            dataset_csv_path,
            "--models",
            "nb,knn",
            "--repeats",
            "2",
            "--out",
            str(tmp_path),
        ],
    )
    assert result.exit_code == 0
    assert "[full] nb:" in result.output
    assert "[full] knn:" in result.output

    payload = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert payload["samples"] == 105
    assert payload["folds"] == 10
    assert payload["repetitions"] == 2
    assert payload["seed"] == 0
    assert list(payload["experiments"]) == ["full"]
    assert sorted(payload["experiments"]["full"]["models"]) == ["knn", "nb"]

    metrics = (tmp_path / "metrics.csv").read_text(encoding="utf-8").splitlines()
    assert metrics[0] == "mask,model,accuracy,precision,recall,f1,fpr,fnr"
    assert [line.split(",")[:2] for line in metrics[1:]] == [
        ["full", "knn"],
        ["full", "nb"],
    ]
    for name in ("metrics.svg", "correlation.csv", "correlation.svg"):
        assert (tmp_path / name).stat().st_size > 0
    assert not (tmp_path / "metrics_ablated.svg").exists()


def test_eval_restricts_the_report_to_chosen_models(runner, tmp_path, dataset_csv_path):
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset",
            dataset_csv_path,
            "--models",
            "rf",
            "--repeats",
            "1",
            "--out",
            str(tmp_path),
        ],
    )
    assert result.exit_code == 0
    payload = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert list(payload["experiments"]["full"]["models"]) == ["rf"]


def test_eval_ablation_artifacts(runner, tmp_path, dataset_csv_path):
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset",
            dataset_csv_path,
            "--models",
            "nb",
            "--repeats",
            "1",
            "--ablate-depth",
            "--out",
            str(tmp_path),
        ],
    )
    assert result.exit_code == 0
    assert "[no_depth] nb:" in result.output

    payload = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert list(payload["experiments"]) == ["full", "no_depth"]
    assert payload["experiments"]["no_depth"]["feature_mask"] == [
        "gas_used",
        "bal_diff_c1",
        "bal_diff_c2",
    ]

    metrics = (tmp_path / "metrics.csv").read_text(encoding="utf-8").splitlines()
    assert [line.split(",")[:2] for line in metrics[1:]] == [
        ["full", "nb"],
        ["no_depth", "nb"],
    ]

    features = (
        (tmp_path / "ablation_features.csv").read_text(encoding="utf-8").splitlines()
    )
    assert features[0] == "tx_id,gas_used,bal_diff_c1,bal_diff_c2,label"
    assert len(features) == 106
    assert (tmp_path / "metrics_ablated.svg").stat().st_size > 0


def test_eval_missing_dataset_is_an_io_error(runner, tmp_path):
    result = runner.invoke(
        main,
        ["eval", "--dataset", str(tmp_path / "none.csv"), "--out", str(tmp_path)],
    )
    assert result.exit_code == 2


def test_eval_malformed_dataset_is_invalid_input(runner, tmp_path):
    bad = _write(tmp_path / "bad.csv", "not,a,dataset\n1,2,3\n")
    result = runner.invoke(
        main, ["eval", "--dataset", bad, "--out", str(tmp_path)]
    )
    assert result.exit_code == 3


@pytest.mark.parametrize(
    "models", ["nb,zz", "nb,nb", ""], ids=["unknown", "duplicate", "empty"]
)
def test_eval_rejects_bad_model_lists(runner, tmp_path, dataset_csv_path, models):
    result = runner.invoke(
        main,
        ["eval", "--dataset", dataset_csv_path, "--models", models, "--out", str(tmp_path)],
    )
    assert result.exit_code == 3


@pytest.mark.parametrize(
    "flag,value",
    [("--folds", "1"), ("--folds", "60"), ("--repeats", "0")],
    ids=["folds-too-small", "folds-exceed-class", "repeats-zero"],
)
def test_eval_rejects_impossible_protocols(
    runner, tmp_path, dataset_csv_path, flag, value
):
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset",
            dataset_csv_path,
            "--models",
            "nb",
            flag,
            value,
            "--out",
            str(tmp_path),
        ],
    )
    assert result.exit_code == 3


def test_eval_single_class_dataset_exits_degenerate(runner, tmp_path):
    rows = [HEADER_LINE]
    rows += [f"t{i:02d},{21000 + i},0,0,1.500000,0" for i in range(20)]
    dataset = _write(tmp_path / "one-class.csv", "\n".join(rows) + "\n")
    result = runner.invoke(
        main,
        ["eval", "--dataset", dataset, "--models", "nb", "--out", str(tmp_path)],
    )
    assert result.exit_code == 4
    assert "degenerate" in result.output


# -------------------------------------------------------------- attack-demo


def test_attack_demo_shows_drain_and_guarded_counterfactual(runner):
    result = runner.invoke(main, ["attack-demo"])
    assert result.exit_code == 0
    assert "donations paid out: 10" in result.output
    assert "donations paid out: 1" in result.output
    assert '"gasUsed": 36050' in result.output
    assert '"gasUsed": 22615' in result.output
    assert "[reverted]" in result.output


def test_attack_demo_bounded_run(runner):
    result = runner.invoke(main, ["attack-demo", "--reentries", "3"])
    assert result.exit_code == 0
    assert "donations paid out: 3" in result.output
    assert "average call stack depth: 3.5000" in result.output


def test_attack_demo_single_donation_looks_benign(runner):
    result = runner.invoke(main, ["attack-demo", "--reentries", "1"])
    assert result.exit_code == 0
    assert result.output.count("average call stack depth: 1.5000") == 2


def test_attack_demo_option_validation(runner):
    assert runner.invoke(main, ["attack-demo", "--reentries", "0"]).exit_code == 3
    assert (
        runner.invoke(
            main, ["attack-demo", "--reentries", "2", "--unbounded"]
        ).exit_code
        == 3
    )


def test_attack_demo_reads_config(runner, tmp_path):
    config = _write(tmp_path / "cfg.json", json.dumps({"reentries": 2}))
    result = runner.invoke(main, ["attack-demo", "--config", config])
    assert result.exit_code == 0
    assert "donations paid out: 2" in result.output


# --------------------------------------------------------------------- help


def test_help_documents_option_precedence(runner):
    for command in ("generate", "eval", "attack-demo"):
        result = runner.invoke(main, [command, "--help"])
        assert result.exit_code == 0
        assert "Precedence" in result.output
