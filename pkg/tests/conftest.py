"""Shared fixtures.

The seed-0 corpus and the full cross-validated evaluation are expensive,
so both are built once per session. The dataset fixture goes through the
CSV writer and reader so tests exercise exactly what the command-line
pipeline consumes.
"""

from __future__ import annotations

import time

import pytest

from reentrylab.datagen import generate_dataset, read_dataset_csv, write_dataset_csv
from reentrylab.detector import ModelSpec
from reentrylab.detector.base import MODEL_KINDS
from reentrylab.evaluation import run_ablation, run_experiment


@pytest.fixture(scope="session")
def bundle0():
    return generate_dataset(0)


@pytest.fixture(scope="session")
def dataset_csv_path(bundle0, tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "dataset.csv"
    write_dataset_csv(str(path), bundle0)
    return str(path)


@pytest.fixture(scope="session")
def dataset0(dataset_csv_path):
    return read_dataset_csv(dataset_csv_path)


@pytest.fixture(scope="session")
def full_experiment(dataset0):
    """Five models, ten repetitions of stratified 10-fold, plus the
    depth-ablated rerun. Wall time is recorded for the runtime budget."""
    specs = [ModelSpec(kind=kind) for kind in MODEL_KINDS]
    started = time.perf_counter()
    full = run_experiment(dataset0, specs, repetitions=10, k=10, base_seed=0)
    ablated = run_ablation(dataset0, specs, repetitions=10, k=10, base_seed=0)
    elapsed = time.perf_counter() - started
    return {"full": full, "ablated": ablated, "seconds": elapsed}
