"""Transaction metadata monitor.

This is the observation layer a detector would sit behind on a real network:
it never looks inside contract code, only at what a node client exposes for
*committed* transactions: the receipt, the call trace, and account balances
probed immediately before and after execution. Transactions whose top-level
frame reverted produce no receipt and therefore never show up here.

Observations are reduced to the four metadata features used downstream:
gas used, the balance movement of the two watched contracts, and the average
call-stack depth of the trace.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator

from .chain import (
    Address,
    ChainState,
    Executed,
    ExecutionResult,
    ExecutionTrace,
    Transaction,
    Wei,
    execute_transaction,
)


class UnknownTransaction(KeyError):
    pass


@dataclass(frozen=True)
class WatchList:
    """The two contracts a deployment watches: the service and its user."""

    c1: Address
    c2: Address

    def touches(self, tx_from: Address, tx_to: Address) -> bool:
        watched = {self.c1, self.c2}
        return tx_from in watched or tx_to in watched


@dataclass(frozen=True)
class Observation:
    """Metadata of one committed transaction, as seen from outside."""

    tx_id: str
    gas_used: int
    balance_before_c1: Wei
    balance_after_c1: Wei
    balance_before_c2: Wei
    balance_after_c2: Wei
    trace: ExecutionTrace

    @property
    def bal_diff_c1(self) -> Wei:
        return self.balance_after_c1 - self.balance_before_c1

    @property
    def bal_diff_c2(self) -> Wei:
        return self.balance_after_c2 - self.balance_before_c2

    @property
    def avg_stack_depth(self) -> float:
        return avg_call_stack_depth(self.trace)


@dataclass(frozen=True)
class _CommittedTx:
    tx_hash: str
    sender: Address
    to: Address
    receipt: object
    trace: ExecutionTrace
    balances_before: dict[Address, Wei]
    balances_after: dict[Address, Wei]


class TransactionFeed:
    """Executes transactions and retains what a node client would expose.

    Balance probes are synchronous reads strictly before and strictly after
    each execution; with one transaction per block there is nothing in
    between to race against.
    """

    def __init__(self, state: ChainState):
        self.state = state
        self._committed: list[_CommittedTx] = []

    def submit(self, tx: Transaction) -> ExecutionResult:
        before = {a: acct.balance for a, acct in self.state.accounts.items()}
        result = execute_transaction(self.state, tx)
        if isinstance(result, Executed):
            after = {a: acct.balance for a, acct in self.state.accounts.items()}
            self._committed.append(
                _CommittedTx(
                    tx_hash=result.receipt.transactionHash,
                    sender=tx.sender,
                    to=tx.to,
                    receipt=result.receipt,
                    trace=result.trace,
                    balances_before=before,
                    balances_after=after,
                )
            )
        return result

    def committed(self) -> list[_CommittedTx]:
        return list(self._committed)


def subscribe_pending(source: TransactionFeed, watch: WatchList) -> Iterator[str]:
    """Yield ids of committed transactions touching a watched address.

    Emission follows chain order (ascending block number); reverted
    transactions left no receipt and are never seen.
    """
    for rec in source.committed():
        if watch.touches(rec.sender, rec.to):
            yield rec.tx_hash


def observe(source: TransactionFeed, tx_id: str, watch: WatchList) -> Observation:
    """Build the metadata observation for one committed transaction."""
    for rec in source.committed():
        if rec.tx_hash == tx_id:
            return Observation(
                tx_id=tx_id,
                gas_used=rec.receipt.gasUsed,
                balance_before_c1=rec.balances_before.get(watch.c1, 0),
                balance_after_c1=rec.balances_after.get(watch.c1, 0),
                balance_before_c2=rec.balances_before.get(watch.c2, 0),
                balance_after_c2=rec.balances_after.get(watch.c2, 0),
                trace=rec.trace,
            )
    raise UnknownTransaction(tx_id)


def avg_call_stack_depth(trace: ExecutionTrace) -> float:
    """Mean depth over the trace's frame-entry records.

    A single-frame transaction scores 1.0; a plain donation (service frame
    plus receiver fallback) scores 1.5; each level of reentrancy pushes the
    mean further up.
    """
    if not trace.frames:
        raise ValueError("trace has no frames")
    return sum(f.depth for f in trace.frames) / len(trace.frames)


OBSERVATION_HEADER = ("tx_id", "gas_used", "bal_diff_c1", "bal_diff_c2", "avg_stack_depth")


def write_observation_log(path: str, observations: list[Observation]) -> None:
    """CSV log of observations: one row per committed transaction."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBSERVATION_HEADER)
        for obs in observations:
            writer.writerow(
                [
                    obs.tx_id,
                    obs.gas_used,
                    obs.bal_diff_c1,
                    obs.bal_diff_c2,
                    f"{obs.avg_stack_depth:.6f}",
                ]
            )
