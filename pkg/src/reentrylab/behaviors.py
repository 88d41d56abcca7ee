"""Contract behavior templates for the reentrancy laboratory.

A behavior is a set of named handler scripts plus a fallback script. Scripts
are short tuples of abstract, gas-costed instructions that the transaction
executor interprets. Instructions can only reach two addresses: the frame's
caller and the executing account itself. That is deliberately restrictive,
but it is exactly enough to express the four contract families this package
needs:

* a donation service that pays its caller one donation per ``donate`` call
  and is open to reentrancy,
* a guarded variant that records each counterparty in storage before paying
  and therefore pays at most once per counterparty,
* a malicious user whose fallback re-enters ``donate`` on the service that
  just paid it, up to a configurable number of total donations,
* a benign user whose fallback only does local work.

Fuzzed variants randomize gas work, donation amounts, and internal call
depth from a seeded stream so that generated corpora are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .rng import Rng

ETHER = 10**18

# storage names shared between templates and the executor
REENTRY_COUNTER = "reentries"
GUARD_PREFIX = "donated"
CHURN_BUDGET = "churn_budget"
CHURN_HANDLER = "churn"

# donation fuzz law: amount = randrange(AMOUNT_DRAW) * AMOUNT_STEP wei
AMOUNT_STEP = 5 * 10**14
AMOUNT_DRAW = 1000


class BehaviorError(ValueError):
    """Raised when a template is constructed with unusable parameters."""


@dataclass(frozen=True)
class FuzzConfig:
    """Randomization knobs for a behavior instance.

    ``work_units`` is a fixed amount of extra arithmetic per invocation.
    ``random_work`` draws a coin and, on heads, burns a random number of
    arithmetic steps. ``random_amount`` redraws the donation amount on every
    ``donate`` call. ``churn_depth`` > 0 makes each invocation run a random
    chain of nested self-calls before donating, modelling services whose
    internal computation has its own call-stack depth. Any random knob needs
    a ``seed``.
    """

    work_units: int = 0
    random_work: bool = False
    loop_draw: int = 10
    random_amount: bool = False
    churn_depth: int = 0
    seed: int | None = None

    @property
    def randomized(self) -> bool:
        return self.random_work or self.random_amount or self.churn_depth > 0


# --- instruction set ------------------------------------------------------
#
# Each instruction names its gas charges in terms of the engine's schedule
# kinds (call_base / sstore / arith). The executor is the single interpreter.


@dataclass(frozen=True)
class Work:
    """Burn ``units`` arithmetic steps."""

    units: int


@dataclass(frozen=True)
class FuzzWork:
    """Seeded gas fuzz: draw a coin and a counter, loop on heads.

    Draws ``flag`` from {0, 1} and ``count`` from [0, loop_draw); both are
    written to storage. When the flag is set, burns ``count`` arithmetic
    steps. The two storage writes are charged, the loop costs count x arith.
    """

    loop_draw: int = 10


@dataclass(frozen=True)
class StartChurn:
    """Draw an internal call-chain length from [0, max_depth) and run it.

    Writes the drawn budget to storage and, when positive, self-calls the
    churn handler, which recurses until the budget is spent. Failures of the
    churn chain are ignored.
    """

    max_depth: int


@dataclass(frozen=True)
class ChurnStep:
    """One link of the internal chain: decrement the budget, maybe recurse."""


@dataclass(frozen=True)
class SetCallerFlag:
    """storage[f"{prefix}:{caller}"] = 1"""

    prefix: str


@dataclass(frozen=True)
class IfCallerFlagUnset:
    """Run ``body`` in the same frame when the caller's flag is unset."""

    prefix: str
    body: tuple["Instruction", ...]


@dataclass(frozen=True)
class IncrementCounter:
    name: str


@dataclass(frozen=True)
class IfCounterBelow:
    """Run ``body`` when storage[name] < limit; ``limit=None`` always runs."""

    name: str
    limit: int | None
    body: tuple["Instruction", ...]


@dataclass(frozen=True)
class DonateToCaller:
    """Transfer value to the caller via a fallback-dispatching call.

    ``amount=None`` redraws the amount per invocation (the fuzz law above)
    and records it in storage. With ``require_success`` the frame reverts
    when the transfer or the receiver's fallback fails; otherwise the
    failure is swallowed, which is what lets an outer frame keep effects
    that an inner frame lost.
    """

    amount: int | None
    require_success: bool = True


@dataclass(frozen=True)
class CallCallerFunction:
    """Plain zero-value call of a named function on the frame's caller."""

    function: str
    require_success: bool = False


Instruction = Union[
    Work,
    FuzzWork,
    StartChurn,
    ChurnStep,
    SetCallerFlag,
    IfCallerFlagUnset,
    IncrementCounter,
    IfCounterBelow,
    DonateToCaller,
    CallCallerFunction,
]


@dataclass(frozen=True)
class ContractBehavior:
    """Immutable program for one account: named handlers plus a fallback."""

    handlers: Mapping[str, tuple[Instruction, ...]]
    fallback: tuple[Instruction, ...]
    params: Mapping[str, object] = field(default_factory=dict)
    rng_seed: int | None = None

    def handler(self, function: str | None) -> tuple[Instruction, ...]:
        if function is not None and function in self.handlers:
            return self.handlers[function]
        return self.fallback


# --- templates ------------------------------------------------------------


def _donate_prologue(fuzz: FuzzConfig) -> list[Instruction]:
    prologue: list[Instruction] = []
    if fuzz.work_units > 0:
        prologue.append(Work(fuzz.work_units))
    if fuzz.random_work:
        prologue.append(FuzzWork(fuzz.loop_draw))
    if fuzz.churn_depth > 0:
        prologue.append(StartChurn(fuzz.churn_depth))
    return prologue


def _check_fuzz(fuzz: FuzzConfig) -> None:
    if fuzz.randomized and fuzz.seed is None:
        raise BehaviorError("randomized behavior needs a fuzz seed")
    if fuzz.work_units < 0 or fuzz.loop_draw <= 0 or fuzz.churn_depth < 0:
        raise BehaviorError(f"bad fuzz parameters: {fuzz}")


def _service_handlers(donate: list[Instruction], fuzz: FuzzConfig) -> dict:
    handlers = {"donate": tuple(donate)}
    if fuzz.churn_depth > 0:
        handlers[CHURN_HANDLER] = (ChurnStep(),)
    return handlers


def make_vulnerable_service(
    donation: int, fuzz: FuzzConfig = FuzzConfig()
) -> ContractBehavior:
    """Donation service without a repeat guard: open to reentrancy.

    ``donate`` pays the caller one donation through a value call and reverts
    the frame if the transfer fails. Nothing stops the receiver's fallback
    from calling ``donate`` again before the first call returns.
    """
    _check_fuzz(fuzz)
    if donation <= 0 and not fuzz.random_amount:
        raise BehaviorError("donation must be positive")
    amount = None if fuzz.random_amount else donation
    script = _donate_prologue(fuzz) + [DonateToCaller(amount, require_success=True)]
    return ContractBehavior(
        handlers=_service_handlers(script, fuzz),
        fallback=(),
        params={"template": "vulnerable_service", "donation": donation, "fuzz": fuzz},
        rng_seed=fuzz.seed,
    )


def make_robust_service(
    donation: int, fuzz: FuzzConfig = FuzzConfig()
) -> ContractBehavior:
    """Donation service that marks each counterparty before paying.

    The caller's flag is written ahead of the transfer, so a reentrant
    ``donate`` from the receiver's fallback finds the flag set and does
    nothing. At most one donation per counterparty can leave this account
    within a transaction (or across transactions on the same chain).
    """
    _check_fuzz(fuzz)
    if donation <= 0 and not fuzz.random_amount:
        raise BehaviorError("donation must be positive")
    amount = None if fuzz.random_amount else donation
    guarded = IfCallerFlagUnset(
        GUARD_PREFIX,
        (SetCallerFlag(GUARD_PREFIX), DonateToCaller(amount, require_success=True)),
    )
    script = _donate_prologue(fuzz) + [guarded]
    return ContractBehavior(
        handlers=_service_handlers(script, fuzz),
        fallback=(),
        params={"template": "robust_service", "donation": donation, "fuzz": fuzz},
        rng_seed=fuzz.seed,
    )


def make_malicious_user(
    max_reentries: int | None, fuzz: FuzzConfig = FuzzConfig()
) -> ContractBehavior:
    """User contract whose fallback re-enters the paying service.

    Every time value arrives, the fallback bumps a storage counter and, while
    the counter is below ``max_reentries``, calls ``donate`` back on the
    service that just paid. The counter includes the donation that triggered
    the fallback, so ``max_reentries`` is the total number of donations the
    user tries to collect in one transaction; ``max_reentries=1`` collects a
    single donation and is indistinguishable from a benign receipt.
    ``max_reentries=None`` re-enters until a frame fails.

    The re-entrant call deliberately ignores failure: when the innermost
    donation dies, the fallback that issued it still completes, so every
    donation already journalled in outer frames is kept.
    """
    _check_fuzz(fuzz)
    if max_reentries is not None and max_reentries < 1:
        raise BehaviorError("max_reentries must be >= 1 or None")
    fallback: list[Instruction] = []
    if fuzz.work_units > 0:
        fallback.append(Work(fuzz.work_units))
    if fuzz.random_work:
        fallback.append(FuzzWork(fuzz.loop_draw))
    fallback += [
        IncrementCounter(REENTRY_COUNTER),
        IfCounterBelow(
            REENTRY_COUNTER,
            max_reentries,
            (CallCallerFunction("donate", require_success=False),),
        ),
    ]
    return ContractBehavior(
        handlers={},
        fallback=tuple(fallback),
        params={
            "template": "malicious_user",
            "max_reentries": max_reentries,
            "fuzz": fuzz,
        },
        rng_seed=fuzz.seed,
    )


def make_benign_user(fuzz: FuzzConfig = FuzzConfig()) -> ContractBehavior:
    """User contract that accepts value and does only its own work.

    With ``churn_depth`` > 0 the fallback also runs a random-length chain of
    internal self-calls (bookkeeping of its own), so even a plain donation
    receipt shows a varying call-stack depth. The user never calls back into
    its counterparty.
    """
    _check_fuzz(fuzz)
    fallback: list[Instruction] = []
    if fuzz.work_units > 0:
        fallback.append(Work(fuzz.work_units))
    if fuzz.random_work:
        fallback.append(FuzzWork(fuzz.loop_draw))
    if fuzz.churn_depth > 0:
        fallback.append(StartChurn(fuzz.churn_depth))
    handlers = {CHURN_HANDLER: (ChurnStep(),)} if fuzz.churn_depth > 0 else {}
    return ContractBehavior(
        handlers=handlers,
        fallback=tuple(fallback),
        params={"template": "benign_user", "fuzz": fuzz},
        rng_seed=fuzz.seed,
    )


def make_fuzzed_vulnerable_service(
    rng: Rng, churn_depth: int = 0
) -> ContractBehavior:
    """Vulnerable service with per-invocation randomness.

    Each ``donate`` draws a coin and a loop counter (extra gas on heads) and
    redraws the donated amount as ``randrange(1000) * 5e14`` wei. With
    ``churn_depth`` > 0 it additionally runs a random-length chain of
    internal self-calls, so the observable call-stack depth varies even for
    single-donation transactions.
    """
    fuzz = FuzzConfig(
        random_work=True,
        random_amount=True,
        churn_depth=churn_depth,
        seed=rng.child("draws").seed,
    )
    return make_vulnerable_service(donation=0, fuzz=fuzz)


# --- contract catalog -----------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    role: str  # "service" | "user"
    klass: str  # "robust" | "vulnerable" | "benign" | "malicious"
    params: Mapping[str, object]
    behavior: ContractBehavior


@dataclass(frozen=True)
class ContractCatalog:
    seed: int
    services: tuple[CatalogEntry, ...]
    users: tuple[CatalogEntry, ...]

    @property
    def robust_services(self) -> list[CatalogEntry]:
        return [e for e in self.services if e.klass == "robust"]

    @property
    def vulnerable_services(self) -> list[CatalogEntry]:
        return [e for e in self.services if e.klass == "vulnerable"]

    @property
    def benign_users(self) -> list[CatalogEntry]:
        return [e for e in self.users if e.klass == "benign"]

    @property
    def malicious_users(self) -> list[CatalogEntry]:
        return [e for e in self.users if e.klass == "malicious"]

    def entries(self) -> list[CatalogEntry]:
        return list(self.services) + list(self.users)


N_ROBUST = 13
N_VULNERABLE = 12
N_BENIGN = 11
N_MALICIOUS = 9

# curated parameter sweeps; tuples must stay pairwise distinct per class
_DONATIONS = (ETHER // 2, ETHER, 3 * ETHER // 2, 2 * ETHER)
_MALICIOUS_PLANS: tuple[tuple[int | None, int], ...] = (
    (2, 200),
    (3, 160),
    (4, 130),
    (1, 0),
    (5, 100),
    (6, 80),
    (8, 60),
    (None, 50),
    (None, 25),
)


def build_catalog(seed: int) -> ContractCatalog:
    """Instantiate the fixed population of curated contracts.

    13 guarded and 12 unguarded donation services sweep donation size and
    extra gas work; 11 benign and 9 malicious users sweep local work and
    reentry bounds, from a single-donation attacker indistinguishable from a
    benign donor by call depth up to two unbounded drainers. The sweep is
    deterministic; ``seed`` is recorded so downstream artifacts can tie a
    catalog to a run.
    """
    services: list[CatalogEntry] = []
    for i in range(N_ROBUST):
        donation = _DONATIONS[i % 4]
        work = 40 * (i // 4)
        behavior = make_robust_service(donation, FuzzConfig(work_units=work))
        services.append(
            CatalogEntry(
                id=f"svc-r{i:02d}",
                role="service",
                klass="robust",
                params={"donation": donation, "work_units": work},
                behavior=behavior,
            )
        )
    for i in range(N_VULNERABLE):
        donation = _DONATIONS[i % 4]
        work = 40 * (i // 4)
        behavior = make_vulnerable_service(donation, FuzzConfig(work_units=work))
        services.append(
            CatalogEntry(
                id=f"svc-v{i:02d}",
                role="service",
                klass="vulnerable",
                params={"donation": donation, "work_units": work},
                behavior=behavior,
            )
        )
    users: list[CatalogEntry] = []
    for i in range(N_BENIGN):
        work = 30 * i
        behavior = make_benign_user(FuzzConfig(work_units=work))
        users.append(
            CatalogEntry(
                id=f"usr-b{i:02d}",
                role="user",
                klass="benign",
                params={"work_units": work},
                behavior=behavior,
            )
        )
    for i, (bound, work) in enumerate(_MALICIOUS_PLANS):
        behavior = make_malicious_user(bound, FuzzConfig(work_units=work))
        users.append(
            CatalogEntry(
                id=f"usr-m{i:02d}",
                role="user",
                klass="malicious",
                params={"max_reentries": bound, "work_units": work},
                behavior=behavior,
            )
        )
    return ContractCatalog(seed=seed, services=tuple(services), users=tuple(users))
