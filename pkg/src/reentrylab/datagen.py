"""Labelled corpus generation.

Each sample is one committed transaction between a freshly deployed service
contract and a freshly deployed user contract on its own single-purpose
chain, observed through the monitor. The corpus mixes:

* 25 curated runs pairing the fixed contract catalog: every unguarded
  (vulnerable) service paired with a malicious user yields a harmful
  transaction; the guarded services paired with a rotating mix of users
  yield benign ones (including failed exploit attempts, which commit with
  their intended single donation and are benign by outcome),
* 80 fuzzed runs from two template pairs: a randomized vulnerable service
  against a randomized malicious user (harmful) and the same service
  template against a randomized benign user (benign).

Labels follow the pairing: harmful means the user contract drives its
fallback at an open service, however greedy this particular run happened to
be. A reverted run left nothing for the monitor, so it is resampled with a
fresh child seed until the corpus holds the full 105 committed observations
(53 benign, 52 harmful).

Fuzzed attackers draw their donation budget uniformly from [1, 8], and
fuzzed services run a random-depth internal call chain, which together keep
the call-stack-depth feature only weakly informative. Building with
``disguised=False`` removes both knobs (unbounded attackers, no internal
churn) for studying the undisguised signal.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .behaviors import (
    CatalogEntry,
    ContractCatalog,
    ContractBehavior,
    FuzzConfig,
    build_catalog,
    make_benign_user,
    make_malicious_user,
    make_vulnerable_service,
)
from .chain import (
    ChainState,
    Executed,
    GasSchedule,
    Transaction,
    WEI_PER_ETHER,
    deploy,
)
from .detector import Dataset, FeatureVector, extract_features
from .monitor import Observation, TransactionFeed, WatchList, observe, subscribe_pending
from .rng import Rng

CURATED_HARMFUL = 12
CURATED_BENIGN = 13
FUZZED_PER_CLASS = 40

DEFAULT_ENDOWMENT = 10 * WEI_PER_ETHER
DEFAULT_GAS_LIMIT = 1_000_000

# disguise knobs for the fuzzed templates: the attacker's reentry budget
# draw, the churn-depth ceiling every fuzzed service shares, and the deeper
# ceiling of benign users' own fallback churn (compensates the call-stack
# depth an attack ladder adds on the harmful side)
MAX_REENTRY_DRAW = 8
SERVICE_CHURN_DEPTH = 10
USER_CHURN_DEPTH = 34
FUZZ_LOOP_DRAW = 10

DATASET_HEADER = (
    "tx_id",
    "gas_used",
    "bal_diff_c1",
    "bal_diff_c2",
    "avg_stack_depth",
    "label",
)


@dataclass(frozen=True)
class RunConfig:
    """Chain-level knobs shared by every generated run."""

    endowment: int = DEFAULT_ENDOWMENT
    gas_limit: int = DEFAULT_GAS_LIMIT
    schedule: GasSchedule = field(default_factory=GasSchedule)


@dataclass(frozen=True)
class LabeledRun:
    service_id: str
    user_id: str
    expected_label: int
    observation: Observation


@dataclass(frozen=True)
class DatasetBundle:
    dataset: Dataset
    runs: tuple[LabeledRun, ...]
    catalog: ContractCatalog
    seed: int
    disguised: bool


class RunReverted(RuntimeError):
    """A run expected to commit reverted at the top level."""


def run_pairing(
    service: ContractBehavior,
    user: ContractBehavior,
    *,
    chain_id: int,
    config: RunConfig,
) -> Observation | None:
    """Deploy a (service, user) pair on a fresh chain and run one donate.

    Returns the monitor observation, or None when the transaction reverted
    at the top level and therefore produced nothing observable.
    """
    state = ChainState(schedule=config.schedule, chain_id=chain_id)
    feed = TransactionFeed(state)
    service_addr = deploy(state, service, config.endowment)
    user_addr = deploy(state, user, 0)
    watch = WatchList(c1=service_addr, c2=user_addr)
    tx = Transaction(
        sender=user_addr,
        to=service_addr,
        function="donate",
        value=0,
        gas_limit=config.gas_limit,
    )
    result = feed.submit(tx)
    if not isinstance(result, Executed):
        return None
    tx_ids = list(subscribe_pending(feed, watch))
    return observe(feed, tx_ids[0], watch)


def _curated_plan(catalog: ContractCatalog) -> list[tuple[CatalogEntry, CatalogEntry, int]]:
    plan: list[tuple[CatalogEntry, CatalogEntry, int]] = []
    malicious = catalog.malicious_users
    for i, service in enumerate(catalog.vulnerable_services):
        plan.append((service, malicious[i % len(malicious)], 1))
    users = list(catalog.users)
    for i, service in enumerate(catalog.robust_services):
        plan.append((service, users[i % len(users)], 0))
    return plan


def _fuzzed_service(rng: Rng, churn_depth: int) -> ContractBehavior:
    fuzz = FuzzConfig(
        random_work=True,
        loop_draw=FUZZ_LOOP_DRAW,
        random_amount=True,
        churn_depth=churn_depth,
        seed=rng.child("svc").seed,
    )
    return make_vulnerable_service(donation=0, fuzz=fuzz)


def _fuzzed_malicious(rng: Rng, disguised: bool) -> ContractBehavior:
    if disguised:
        bound = 1 + rng.child("bound").stream().randrange(MAX_REENTRY_DRAW)
    else:
        bound = None
    fuzz = FuzzConfig(
        random_work=True, loop_draw=FUZZ_LOOP_DRAW, seed=rng.child("usr").seed
    )
    return make_malicious_user(bound, fuzz)


def _fuzzed_benign(rng: Rng, churn_depth: int) -> ContractBehavior:
    fuzz = FuzzConfig(
        random_work=True,
        loop_draw=FUZZ_LOOP_DRAW,
        churn_depth=churn_depth,
        seed=rng.child("usr").seed,
    )
    return make_benign_user(fuzz)


def generate_dataset(
    seed: int,
    *,
    config: RunConfig | None = None,
    disguised: bool = True,
) -> DatasetBundle:
    """Generate the 105-transaction corpus for ``seed``.

    Deterministic: the same seed, configuration, and disguise setting yield
    byte-identical CSV output. Reverted fuzzed runs are resampled from fresh
    child seeds; curated runs are constructed to commit and raise
    :class:`RunReverted` if they ever do not.
    """
    config = config or RunConfig()
    root = Rng(seed)
    catalog = build_catalog(root.child("catalog").seed)
    runs: list[LabeledRun] = []

    for service, user, label in _curated_plan(catalog):
        chain_id = root.child("curated", service.id, user.id).seed
        obs = run_pairing(
            service.behavior, user.behavior, chain_id=chain_id, config=config
        )
        if obs is None:
            raise RunReverted(f"curated pairing {service.id} x {user.id} reverted")
        runs.append(LabeledRun(service.id, user.id, label, obs))

    svc_churn = SERVICE_CHURN_DEPTH if disguised else 0
    usr_churn = USER_CHURN_DEPTH if disguised else 0
    for i in range(FUZZED_PER_CLASS):
        for family, label in (("fuzz-harmful", 1), ("fuzz-benign", 0)):
            base = root.child(family, i)
            attempt = 0
            while True:
                node = base.child("attempt", attempt)
                service = _fuzzed_service(node, svc_churn)
                if label == 1:
                    user = _fuzzed_malicious(node, disguised)
                else:
                    user = _fuzzed_benign(node, usr_churn)
                obs = run_pairing(
                    service, user, chain_id=node.seed, config=config
                )
                if obs is not None:
                    runs.append(
                        LabeledRun(f"{family}-svc-{i:02d}", f"{family}-usr-{i:02d}", label, obs)
                    )
                    break
                attempt += 1
                if attempt > 1000:
                    raise RunReverted(f"{family} run {i} kept reverting")

    samples = []
    for run in runs:
        feats = extract_features(run.observation)
        samples.append(
            FeatureVector(
                tx_id=feats.tx_id,
                gas_used=feats.gas_used,
                bal_diff_c1=feats.bal_diff_c1,
                bal_diff_c2=feats.bal_diff_c2,
                avg_stack_depth=feats.avg_stack_depth,
                label=run.expected_label,
            )
        )
    dataset = Dataset(samples=tuple(samples))
    return DatasetBundle(
        dataset=dataset,
        runs=tuple(runs),
        catalog=catalog,
        seed=seed,
        disguised=disguised,
    )


# --- CSV round trips -------------------------------------------------------


def dataset_to_csv(bundle_or_dataset: DatasetBundle | Dataset) -> str:
    dataset = (
        bundle_or_dataset.dataset
        if isinstance(bundle_or_dataset, DatasetBundle)
        else bundle_or_dataset
    )
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for s in dataset.samples:
        writer.writerow(
            [
                s.tx_id,
                int(s.gas_used),
                int(s.bal_diff_c1),
                int(s.bal_diff_c2),
                f"{s.avg_stack_depth:.6f}",
                s.label,
            ]
        )
    return out.getvalue()


def write_dataset_csv(path: str, bundle_or_dataset: DatasetBundle | Dataset) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(bundle_or_dataset))


class DatasetFormatError(ValueError):
    pass


def read_dataset_csv(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("dataset file is empty") from None
        if tuple(header) != DATASET_HEADER:
            raise DatasetFormatError(f"unexpected dataset header: {header}")
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(DATASET_HEADER):
                raise DatasetFormatError(f"line {lineno}: expected 6 columns")
            try:
                samples.append(
                    FeatureVector(
                        tx_id=row[0],
                        gas_used=float(row[1]),
                        bal_diff_c1=float(row[2]),
                        bal_diff_c2=float(row[3]),
                        avg_stack_depth=float(row[4]),
                        label=int(row[5]),
                    )
                )
            except ValueError as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from None
        for s in samples:
            if s.label not in (0, 1):
                raise DatasetFormatError(f"label must be 0/1, got {s.label}")
    try:
        return Dataset(samples=tuple(samples))
    except ValueError as exc:
        raise DatasetFormatError(str(exc)) from None


def _format_param(value: object) -> str:
    if value is None:
        return "unbounded"
    if isinstance(value, FuzzConfig):
        return f"work={value.work_units}"
    return str(value)


def catalog_to_csv(catalog: ContractCatalog) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("id", "role", "class", "params"))
    for entry in catalog.entries():
        params = ";".join(
            f"{key}={_format_param(entry.params[key])}" for key in sorted(entry.params)
        )
        writer.writerow((entry.id, entry.role, entry.klass, params))
    return out.getvalue()


def write_catalog_csv(path: str, catalog: ContractCatalog) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(catalog_to_csv(catalog))
