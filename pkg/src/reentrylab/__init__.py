"""Reentrancy transaction lab.

A deterministic miniature blockchain with scripted contracts, a reentrancy
exploit and its guarded counterfactual, a transaction-metadata monitor, and
five from-scratch classifiers evaluated under repeated stratified
cross-validation to detect harmful transactions from receipts alone.
"""

from .behaviors import (
    ContractBehavior,
    ContractCatalog,
    FuzzConfig,
    build_catalog,
    make_benign_user,
    make_malicious_user,
    make_robust_service,
    make_vulnerable_service,
)
from .chain import (
    ChainState,
    ExecutionTrace,
    GasSchedule,
    Receipt,
    Transaction,
    balance_of,
    deploy,
    execute_transaction,
)
from .datagen import (
    DatasetBundle,
    RunConfig,
    generate_dataset,
    read_dataset_csv,
    write_catalog_csv,
    write_dataset_csv,
)
from .demo import run_attack_demo
from .detector import Dataset, FeatureVector, ModelSpec, TrainedModel, extract_features, fit, predict
from .evaluation import (
    ConfusionCounts,
    ExperimentReport,
    compute_metrics,
    correlation_matrix,
    run_ablation,
    run_experiment,
    stratified_kfold,
)
from .monitor import Observation, TransactionFeed, WatchList, observe, subscribe_pending
from .rng import Rng

__version__ = "0.1.0"

__all__ = [
    "ContractBehavior",
    "ContractCatalog",
    "FuzzConfig",
    "build_catalog",
    "make_benign_user",
    "make_malicious_user",
    "make_robust_service",
    "make_vulnerable_service",
    "ChainState",
    "ExecutionTrace",
    "GasSchedule",
    "Receipt",
    "Transaction",
    "balance_of",
    "deploy",
    "execute_transaction",
    "DatasetBundle",
    "RunConfig",
    "generate_dataset",
    "read_dataset_csv",
    "write_catalog_csv",
    "write_dataset_csv",
    "run_attack_demo",
    "Dataset",
    "FeatureVector",
    "ModelSpec",
    "TrainedModel",
    "extract_features",
    "fit",
    "predict",
    "ConfusionCounts",
    "ExperimentReport",
    "compute_metrics",
    "correlation_matrix",
    "run_ablation",
    "run_experiment",
    "stratified_kfold",
    "Observation",
    "TransactionFeed",
    "WatchList",
    "observe",
    "subscribe_pending",
    "Rng",
    "__version__",
]
