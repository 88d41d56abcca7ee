"""Self-contained exploit walkthrough used by the command-line demo.

Runs the same donation scenario twice on fresh chains: once against a
service whose donate handler pays out before any bookkeeping, and once
against the guarded variant that marks the caller as paid before
transferring. Both runs face the same attacker contract, so the printed
traces differ only in what the service semantics allow.
"""

from __future__ import annotations

from dataclasses import dataclass

from .behaviors import (
    ETHER,
    FuzzConfig,
    make_malicious_user,
    make_robust_service,
    make_vulnerable_service,
)
from .chain import (
    Address,
    ChainState,
    Executed,
    ExecutionTrace,
    GasSchedule,
    Receipt,
    Transaction,
    Wei,
    balance_of,
    deploy,
)
from .monitor import TransactionFeed, avg_call_stack_depth

DEMO_DONATION: Wei = 1 * ETHER
DEMO_ENDOWMENT: Wei = 10 * ETHER
DEMO_GAS_LIMIT = 1_000_000


@dataclass(frozen=True)
class DemoRun:
    """Everything observable about one run of the donation scenario."""

    title: str
    service: Address
    attacker: Address
    service_before: Wei
    service_after: Wei
    attacker_before: Wei
    attacker_after: Wei
    receipt: Receipt | None
    trace: ExecutionTrace | None
    revert_reason: str | None = None

    @property
    def donations_paid(self) -> int:
        return (self.attacker_after - self.attacker_before) // DEMO_DONATION


@dataclass(frozen=True)
class AttackDemo:
    exploitable: DemoRun
    guarded: DemoRun


def _run_scenario(
    title: str,
    service_behavior,
    max_reentries: int | None,
    *,
    chain_id: int,
    schedule: GasSchedule | None = None,
) -> DemoRun:
    state = ChainState(schedule=schedule, chain_id=chain_id)
    service = deploy(state, service_behavior, endowment=DEMO_ENDOWMENT)
    attacker = deploy(state, make_malicious_user(max_reentries, FuzzConfig()))
    svc_before = balance_of(state, service)
    atk_before = balance_of(state, attacker)
    feed = TransactionFeed(state)
    result = feed.submit(
        Transaction(
            sender=attacker,
            to=service,
            function="donate",
            value=0,
            gas_limit=DEMO_GAS_LIMIT,
        )
    )
    if isinstance(result, Executed):
        receipt, trace, reason = result.receipt, result.trace, None
    else:
        receipt, trace, reason = None, None, result.reason
    return DemoRun(
        title=title,
        service=service,
        attacker=attacker,
        service_before=svc_before,
        service_after=balance_of(state, service),
        attacker_before=atk_before,
        attacker_after=balance_of(state, attacker),
        receipt=receipt,
        trace=trace,
        revert_reason=reason,
    )


def run_attack_demo(max_reentries: int | None = None) -> AttackDemo:
    """Execute the exploit and its guarded counterfactual.

    ``max_reentries`` bounds the attacker's total donation requests;
    ``None`` keeps reentering until gas or the victim's balance runs out.
    """
    quiet = FuzzConfig()
    exploitable = _run_scenario(
        "payout-before-bookkeeping service",
        make_vulnerable_service(DEMO_DONATION, quiet),
        max_reentries,
        chain_id=1,
    )
    guarded = _run_scenario(
        "guarded service (caller marked paid first)",
        make_robust_service(DEMO_DONATION, quiet),
        max_reentries,
        chain_id=2,
    )
    return AttackDemo(exploitable=exploitable, guarded=guarded)


def _ether(amount: Wei) -> str:
    whole, frac = divmod(amount, ETHER)
    if frac == 0:
        return f"{whole} ether"
    return f"{amount / ETHER:.4f} ether"


def _short(address: Address) -> str:
    return address[:10]


def format_demo_run(run: DemoRun) -> str:
    lines = [f"== {run.title} =="]
    lines.append(f"service  {run.service}")
    lines.append(f"attacker {run.attacker}")
    lines.append(
        f"transaction: {_short(run.attacker)} -> {_short(run.service)} donate()"
    )
    if run.trace is None:
        lines.append(f"top-level revert: {run.revert_reason}")
    else:
        lines.append("call frames:")
        for frame in run.trace.frames:
            marker = "" if frame.outcome.value == "completed" else f"  [{frame.outcome.value}]"
            lines.append(
                f"  {'. ' * (frame.depth - 1)}[{frame.depth}] "
                f"{_short(frame.caller)} -> {_short(frame.callee)} {frame.function} "
                f"value={_ether(frame.value)}{marker}"
            )
        lines.append(f"average call stack depth: {avg_call_stack_depth(run.trace):.4f}")
    lines.append(
        "service balance:  "
        f"{_ether(run.service_before)} -> {_ether(run.service_after)}"
    )
    lines.append(
        "attacker balance: "
        f"{_ether(run.attacker_before)} -> {_ether(run.attacker_after)}"
    )
    lines.append(f"donations paid out: {run.donations_paid}")
    if run.receipt is not None:
        lines.append("receipt:")
        for raw in run.receipt.to_json().splitlines():
            lines.append("  " + raw)
    return "\n".join(lines)


def format_demo(demo: AttackDemo) -> str:
    return format_demo_run(demo.exploitable) + "\n\n" + format_demo_run(demo.guarded)


__all__ = [
    "AttackDemo",
    "DemoRun",
    "DEMO_DONATION",
    "DEMO_ENDOWMENT",
    "DEMO_GAS_LIMIT",
    "run_attack_demo",
    "format_demo",
    "format_demo_run",
]
