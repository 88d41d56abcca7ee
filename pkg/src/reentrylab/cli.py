"""Command-line entry point.

Three subcommands cover the full pipeline: ``generate`` produces the labelled
transaction dataset and contract manifest, ``eval`` runs the cross-validated
detector comparison and emits reports and figures, and ``attack-demo`` prints
an annotated exploit walkthrough.

Every command accepts ``--config FILE`` with a JSON object whose keys are the
command's option names; config values override flags, flags override
defaults. Exit codes: 0 success, 2 I/O failure, 3 invalid input, 4 degenerate
training data.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import os
import sys

import click

from .chain import ChainError, GasSchedule
from .datagen import (
    DatasetFormatError,
    RunConfig,
    generate_dataset,
    read_dataset_csv,
    write_catalog_csv,
    write_dataset_csv,
)
from .demo import format_demo, run_attack_demo
from .detector import ModelSpec
from .detector.base import MODEL_KINDS, DegenerateTraining
from .evaluation import (
    METRIC_NAMES,
    ExperimentReport,
    TooFewSamples,
    correlation_matrix,
    run_ablation,
    run_experiment,
    write_correlation_csv,
)
from .plots import plot_correlation_heatmap, plot_metric_bars

EXIT_IO = 2
EXIT_INVALID = 3
EXIT_DEGENERATE = 4

OUT_DIR_ENV = "REENTRYLAB_OUT"

_PRECEDENCE = (
    "Precedence: values from --config override command-line flags; flags "
    "override built-in defaults."
)


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Translate domain failures into the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DegenerateTraining as exc:
            _fail(f"degenerate training data: {exc}", EXIT_DEGENERATE)
        except (DatasetFormatError, TooFewSamples, ChainError, ValueError) as exc:
            _fail(str(exc), EXIT_INVALID)
        except OSError as exc:
            _fail(str(exc), EXIT_IO)

    return wrapper


def _apply_config(config_path: str | None, values: dict) -> dict:
    """Overlay JSON config entries onto parsed option values."""
    if config_path is None:
        return values
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        _fail(str(exc), EXIT_IO)
    except json.JSONDecodeError as exc:
        _fail(f"config file is not valid JSON: {exc}", EXIT_INVALID)
    if not isinstance(raw, dict):
        _fail("config file must hold a JSON object", EXIT_INVALID)
    unknown = sorted(set(raw) - set(values))
    if unknown:
        _fail(f"unknown config keys: {', '.join(unknown)}", EXIT_INVALID)
    values.update(raw)
    return values


def _resolve_out(out: str | None) -> str:
    directory = out or os.environ.get(OUT_DIR_ENV) or "."
    try:
        os.makedirs(directory, exist_ok=True)
        probe = os.path.join(directory, ".write-probe")
        with open(probe, "w", encoding="utf-8"):
            pass
        os.remove(probe)
    except OSError as exc:
        _fail(f"output directory not writable: {exc}", EXIT_IO)
    return directory


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main() -> None:
    """Reentrancy transaction lab: dataset generation, detection, demo."""


@main.command()
@click.option("--seed", type=int, default=0, show_default=True, help="Root seed; every random draw derives from it.")
@click.option("--out", type=str, default=None, help=f"Output directory (default: ${OUT_DIR_ENV} or the working directory).")
@click.option("--gas-schedule", "gas_schedule", type=str, default=None, help="JSON file overriding instruction gas costs.")
@click.option("--undisguised", is_flag=True, default=False, help="Disable attacker greediness and depth randomization.")
@click.option("--config", "config_path", type=str, default=None, help="JSON object overriding the options above.")
@_guarded
def generate(seed: int, out: str | None, gas_schedule: str | None, undisguised: bool, config_path: str | None) -> None:
    """Generate the labelled transaction dataset and contract manifest.

    \b
    Writes dataset.csv and catalog.csv into the output directory.
    """
    values = _apply_config(
        config_path,
        {"seed": seed, "out": out, "gas_schedule": gas_schedule, "undisguised": undisguised},
    )
    directory = _resolve_out(values["out"])
    schedule = (
        GasSchedule.from_file(values["gas_schedule"])
        if values["gas_schedule"]
        else GasSchedule()
    )
    bundle = generate_dataset(
        int(values["seed"]),
        config=RunConfig(schedule=schedule),
        disguised=not values["undisguised"],
    )
    dataset_path = os.path.join(directory, "dataset.csv")
    catalog_path = os.path.join(directory, "catalog.csv")
    write_dataset_csv(dataset_path, bundle)
    write_catalog_csv(catalog_path, bundle.catalog)
    labels = [s.label for s in bundle.dataset.samples]
    click.echo(
        f"wrote {dataset_path}: {len(labels)} rows "
        f"({labels.count(0)} benign, {labels.count(1)} harmful)"
    )
    click.echo(f"wrote {catalog_path}: {len(bundle.catalog.entries())} contracts")


generate.help += "\n\n" + _PRECEDENCE


def _parse_models(text: str) -> list[ModelSpec]:
    kinds = [part.strip() for part in text.split(",") if part.strip()]
    if not kinds:
        raise ValueError("no model kinds given")
    unknown = [k for k in kinds if k not in MODEL_KINDS]
    if unknown:
        raise ValueError(
            f"unknown model kinds: {', '.join(unknown)} "
            f"(choose from {', '.join(MODEL_KINDS)})"
        )
    if len(set(kinds)) != len(kinds):
        raise ValueError("duplicate model kinds")
    return [ModelSpec(kind=k) for k in kinds]


def _metrics_csv_rows(reports: dict[str, ExperimentReport]) -> str:
    lines = ["mask,model," + ",".join(METRIC_NAMES)]
    for mask_name, report in reports.items():
        for kind in sorted(report.models):
            means = report.models[kind].means()
            cells = ",".join(f"{means[m]:.6f}" for m in METRIC_NAMES)
            lines.append(f"{mask_name},{kind},{cells}")
    return "\n".join(lines) + "\n"


@main.command("eval")
@click.option("--dataset", "dataset_path", type=str, required=True, help="Dataset CSV produced by the generate command.")
@click.option("--models", type=str, default=",".join(MODEL_KINDS), show_default=True, help="Comma-separated model kinds to evaluate.")
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--repeats", type=int, default=10, show_default=True)
@click.option("--ablate-depth", "ablate_depth", is_flag=True, default=False, help="Also evaluate without the avg_stack_depth feature.")
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed for fold shuffles and model training.")
@click.option("--out", type=str, default=None, help=f"Output directory (default: ${OUT_DIR_ENV} or the working directory).")
@click.option("--config", "config_path", type=str, default=None, help="JSON object overriding the options above.")
@_guarded
def evaluate(
    dataset_path: str,
    models: str,
    folds: int,
    repeats: int,
    ablate_depth: bool,
    seed: int,
    out: str | None,
    config_path: str | None,
) -> None:
    """Run repeated stratified cross-validation over the chosen models.

    \b
    Writes into the output directory:
      report.json          full structured results
      metrics.csv          per-model metric means, one row per feature mask
      metrics.svg          grouped bar chart of the means
      correlation.csv/.svg feature-label correlation matrix and heatmap
      ablation_features.csv  dataset under the reduced mask (--ablate-depth)
      metrics_ablated.svg    bar chart for the reduced mask (--ablate-depth)
    """
    values = _apply_config(
        config_path,
        {
            "dataset": dataset_path,
            "models": models,
            "folds": folds,
            "repeats": repeats,
            "ablate_depth": ablate_depth,
            "seed": seed,
            "out": out,
        },
    )
    directory = _resolve_out(values["out"])
    model_text = values["models"]
    if isinstance(model_text, (list, tuple)):
        model_text = ",".join(model_text)
    specs = _parse_models(model_text)
    dataset = read_dataset_csv(values["dataset"])
    k = int(values["folds"])
    repetitions = int(values["repeats"])
    base_seed = int(values["seed"])
    if repetitions < 1:
        raise ValueError("repeats must be at least 1")

    report = run_experiment(
        dataset, specs, repetitions=repetitions, k=k, base_seed=base_seed
    )
    reports: dict[str, ExperimentReport] = {"full": report}
    if values["ablate_depth"]:
        reports["no_depth"] = run_ablation(
            dataset, specs, repetitions=repetitions, k=k, base_seed=base_seed
        )

    report_path = os.path.join(directory, "report.json")
    payload = {
        "seed": base_seed,
        "folds": k,
        "repetitions": repetitions,
        "samples": len(dataset),
        "experiments": {name: rep.to_json_dict() for name, rep in reports.items()},
    }
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")

    metrics_path = os.path.join(directory, "metrics.csv")
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(_metrics_csv_rows(reports))

    plot_metric_bars(report, os.path.join(directory, "metrics.svg"))
    if "no_depth" in reports:
        plot_metric_bars(
            reports["no_depth"], os.path.join(directory, "metrics_ablated.svg")
        )
        ablated = dataset.with_mask(reports["no_depth"].feature_mask)
        with open(
            os.path.join(directory, "ablation_features.csv"),
            "w",
            encoding="utf-8",
            newline="",
        ) as fh:
            fh.write(_mask_csv(ablated))

    corr = correlation_matrix(dataset)
    write_correlation_csv(os.path.join(directory, "correlation.csv"), corr)
    plot_correlation_heatmap(corr, os.path.join(directory, "correlation.svg"))

    for mask_name, rep in reports.items():
        for kind in sorted(rep.models):
            means = rep.models[kind].means()
            cells = "  ".join(f"{m}={means[m]:.4f}" for m in METRIC_NAMES)
            click.echo(f"[{mask_name}] {kind}: {cells}")
    click.echo(f"wrote report to {directory}")


evaluate.help += "\n\n" + _PRECEDENCE


def _mask_csv(dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("tx_id",) + dataset.feature_mask + ("label",))
    matrix = dataset.matrix()
    for sample, row in zip(dataset.samples, matrix):
        writer.writerow(
            [sample.tx_id]
            + [f"{value:.6f}" for value in row]
            + [sample.label]
        )
    return out.getvalue()


@main.command("attack-demo")
@click.option("--reentries", type=int, default=None, help="Total donation requests the attacker makes.")
@click.option("--unbounded", is_flag=True, default=False, help="Keep reentering until gas or funds run out (default).")
@click.option("--config", "config_path", type=str, default=None, help="JSON object overriding the options above.")
@_guarded
def attack_demo(reentries: int | None, unbounded: bool, config_path: str | None) -> None:
    """Walk through the exploit and its guarded counterfactual.

    \b
    Deploys a donation service holding 10 ether next to an attacker
    contract, sends the attack transaction, and prints the call-frame
    tree, balance movements, and receipt; then repeats the run against
    the guarded service, which pays at most once per caller.
    """
    values = _apply_config(
        config_path, {"reentries": reentries, "unbounded": unbounded}
    )
    bound = values["reentries"]
    if values["unbounded"] and bound is not None:
        raise ValueError("--reentries and --unbounded are mutually exclusive")
    if bound is not None and int(bound) < 1:
        raise ValueError("--reentries must be at least 1")
    demo = run_attack_demo(None if bound is None else int(bound))
    click.echo(format_demo(demo))


attack_demo.help += "\n\n" + _PRECEDENCE


if __name__ == "__main__":
    main()
