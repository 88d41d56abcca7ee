"""Miniature deterministic Ethereum-style transaction executor.

The world model is intentionally small: accounts with balances, per-account
integer storage, scripted behaviors, and message calls that carry value and
gas. What it keeps faithful to the real thing is the part that matters for
reentrancy:

* a call with value dispatches the receiver's fallback script before the
  caller's frame has finished,
* every frame journals its own state changes and a failing frame rolls back
  only its own journal; completed outer frames keep theirs,
* calls forward all remaining gas minus a base cost, so deep call chains are
  bounded by the transaction's gas limit,
* a reverted top-level transaction leaves no receipt behind.

Receipts mirror the usual node-client shape (``blockHash`` ..
``transactionIndex``) and are serialized with exactly those field names and
that field order.
"""

from __future__ import annotations

import hashlib
import json
import random
import sys
from dataclasses import dataclass, field
from enum import Enum

from . import behaviors as bhv
from .behaviors import ContractBehavior

Address = str
Wei = int
Gas = int

WEI_PER_ETHER = bhv.ETHER
MAX_CALL_DEPTH = 1024

# frame recursion maps onto Python recursion; keep plenty of headroom
sys.setrecursionlimit(max(sys.getrecursionlimit(), 40_000))


class ChainError(Exception):
    """Base class for invalid uses of the executor."""


class UnknownAddress(ChainError):
    pass


class GasLimitBelowIntrinsic(ChainError):
    pass


class OutOfGas(Exception):
    """Raised by a frame meter when a charge exceeds the frame budget.

    This is a frame outcome, not an executor crash: the interpreter catches
    it, rolls the frame back, and reports failure to the parent.
    """


class _RequireFailed(Exception):
    pass


@dataclass(frozen=True)
class GasSchedule:
    """Abstract instruction costs, loadable from a JSON config file."""

    intrinsic: int = 21_000
    call_base: int = 700
    sstore: int = 100
    arith: int = 5

    def __post_init__(self) -> None:
        for kind in ("intrinsic", "call_base", "sstore", "arith"):
            cost = getattr(self, kind)
            if not isinstance(cost, int) or cost < 0:
                raise ChainError(f"gas cost {kind!r} must be a non-negative int")

    def cost(self, kind: str) -> int:
        try:
            return getattr(self, kind)
        except AttributeError:
            raise ChainError(f"unknown gas kind {kind!r}") from None

    @classmethod
    def from_file(cls, path: str) -> "GasSchedule":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ChainError("gas schedule file must hold a JSON object")
        known = {"intrinsic", "call_base", "sstore", "arith"}
        unknown = set(raw) - known
        if unknown:
            raise ChainError(f"unknown gas kinds in schedule: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict[str, int]:
        return {
            "intrinsic": self.intrinsic,
            "call_base": self.call_base,
            "sstore": self.sstore,
            "arith": self.arith,
        }


class FrameOutcome(str, Enum):
    COMPLETED = "completed"
    REVERTED_FRAME = "reverted"
    OUT_OF_GAS = "out_of_gas"


@dataclass
class CallFrameRecord:
    """One frame entry of an execution trace, recorded in preorder."""

    depth: int
    caller: Address
    callee: Address
    function: str
    value: Wei
    outcome: FrameOutcome = FrameOutcome.COMPLETED


@dataclass(frozen=True)
class ExecutionTrace:
    frames: tuple[CallFrameRecord, ...]
    total_gas_used: Gas


_RECEIPT_FIELDS = (
    "blockHash",
    "blockNumber",
    "contractAddress",
    "cumulativeGasUsed",
    "from",
    "gasUsed",
    "logs",
    "logsBloom",
    "status",
    "to",
    "transactionHash",
    "transactionIndex",
)


@dataclass(frozen=True)
class Receipt:
    """Transaction receipt in the familiar node-client shape.

    Attribute names follow the wire format (camelCase); ``from`` is a Python
    keyword, so the attribute is ``from_`` and the mapping is restored during
    serialization.
    """

    blockHash: str
    blockNumber: int
    contractAddress: str | None
    cumulativeGasUsed: int
    from_: Address
    gasUsed: int
    logs: tuple
    logsBloom: str
    status: str
    to: Address
    transactionHash: str
    transactionIndex: int

    def to_json(self) -> str:
        """Serialize with exactly the canonical field names and order."""
        payload = {}
        for name in _RECEIPT_FIELDS:
            attr = "from_" if name == "from" else name
            value = getattr(self, attr)
            payload[name] = list(value) if name == "logs" else value
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Receipt":
        raw = json.loads(text)
        missing = [name for name in _RECEIPT_FIELDS if name not in raw]
        if missing:
            raise ChainError(f"receipt text missing fields: {missing}")
        kwargs = {}
        for name in _RECEIPT_FIELDS:
            attr = "from_" if name == "from" else name
            value = raw[name]
            kwargs[attr] = tuple(value) if name == "logs" else value
        return cls(**kwargs)


@dataclass(frozen=True)
class Transaction:
    sender: Address
    to: Address
    function: str | None
    value: Wei
    gas_limit: Gas


@dataclass(frozen=True)
class Executed:
    receipt: Receipt
    trace: ExecutionTrace


@dataclass(frozen=True)
class TopLevelReverted:
    reason: str


ExecutionResult = Executed | TopLevelReverted


@dataclass
class Account:
    balance: Wei
    behavior: ContractBehavior | None = None
    storage: dict[str, int] = field(default_factory=dict)


class ChainState:
    """Mutable world state: accounts, block height, committed-tx counter.

    ``chain_id`` salts block and transaction digests so that independently
    generated single-transaction chains still produce unique identifiers.
    """

    def __init__(self, schedule: GasSchedule | None = None, chain_id: int = 0):
        self.schedule = schedule or GasSchedule()
        self.chain_id = chain_id
        self.accounts: dict[Address, Account] = {}
        self.block_number: int = 1
        self.tx_counter: int = 0
        self._streams: dict[Address, random.Random] = {}

    def account(self, address: Address) -> Account:
        try:
            return self.accounts[address]
        except KeyError:
            raise UnknownAddress(address) from None

    def stream(self, address: Address) -> random.Random:
        """Per-account draw stream, lazily seeded from the behavior."""
        if address not in self._streams:
            acct = self.account(address)
            if acct.behavior is None or acct.behavior.rng_seed is None:
                raise ChainError(f"behavior at {address} draws without a seed")
            self._streams[address] = random.Random(acct.behavior.rng_seed)
        return self._streams[address]


def deploy(
    state: ChainState, behavior: ContractBehavior | None, endowment: Wei = 0
) -> Address:
    """Create an account with ``behavior`` and mint its starting balance."""
    if endowment < 0:
        raise ChainError("endowment must be non-negative")
    index = len(state.accounts)
    digest = hashlib.sha256(f"account:{state.chain_id}:{index}".encode()).hexdigest()
    address = "0x" + digest[:40]
    state.accounts[address] = Account(balance=endowment, behavior=behavior)
    return address


def balance_of(state: ChainState, address: Address) -> Wei:
    return state.account(address).balance


class FrameMeter:
    """Gas meter for one frame: charge instruction kinds against a budget."""

    def __init__(self, schedule: GasSchedule, budget: Gas):
        self.schedule = schedule
        self.budget = budget
        self.spent: Gas = 0

    @property
    def remaining(self) -> Gas:
        return self.budget - self.spent

    def charge(self, kind: str, count: int = 1) -> Gas:
        cost = self.schedule.cost(kind) * count
        if self.spent + cost > self.budget:
            raise OutOfGas(kind)
        self.spent += cost
        return self.remaining

    def consume_child(self, gas: Gas) -> None:
        # a completed child's consumption; cannot exceed what was forwarded
        assert self.spent + gas <= self.budget
        self.spent += gas


class _TxContext:
    def __init__(self, state: ChainState):
        self.state = state
        self.frames: list[CallFrameRecord] = []


def _snapshot(state: ChainState) -> dict[Address, tuple[Wei, dict[str, int]]]:
    return {
        addr: (acct.balance, dict(acct.storage))
        for addr, acct in state.accounts.items()
    }


def _restore(
    state: ChainState, snap: dict[Address, tuple[Wei, dict[str, int]]]
) -> None:
    # storage dicts are mutated in place: outer frames hold references
    for addr, (balance, storage) in snap.items():
        acct = state.accounts[addr]
        acct.balance = balance
        acct.storage.clear()
        acct.storage.update(storage)


def _invoke_frame(
    ctx: _TxContext,
    caller: Address,
    callee: Address,
    function: str | None,
    value: Wei,
    budget: Gas,
    depth: int,
) -> tuple[bool, Gas]:
    """Run one call frame; returns (completed, gas consumed by the subtree).

    A failed frame consumes nothing from its parent's point of view: its
    journal is rolled back and its charges are refunded, matching receipts
    that only account for surviving frames.
    """
    if depth > MAX_CALL_DEPTH:
        return False, 0
    state = ctx.state
    record = CallFrameRecord(
        depth=depth,
        caller=caller,
        callee=callee,
        function=function if function is not None else "fallback",
        value=value,
    )
    ctx.frames.append(record)
    snap = _snapshot(state)
    meter = FrameMeter(state.schedule, budget)
    try:
        if value:
            payer = state.account(caller)
            if payer.balance < value:
                # callers check balances first; reaching this means a bug
                raise ChainError("transfer spawned without cover")
            payer.balance -= value
            state.account(callee).balance += value
        acct = state.account(callee)
        if acct.behavior is not None:
            _run_script(ctx, meter, acct.behavior.handler(function), caller, callee, depth)
    except OutOfGas:
        _restore(state, snap)
        record.outcome = FrameOutcome.OUT_OF_GAS
        return False, 0
    except _RequireFailed:
        _restore(state, snap)
        record.outcome = FrameOutcome.REVERTED_FRAME
        return False, 0
    record.outcome = FrameOutcome.COMPLETED
    return True, meter.spent


def _run_script(
    ctx: _TxContext,
    meter: FrameMeter,
    script: tuple,
    caller: Address,
    self_addr: Address,
    depth: int,
) -> None:
    state = ctx.state
    storage = state.account(self_addr).storage
    for instr in script:
        if isinstance(instr, bhv.Work):
            meter.charge("arith", instr.units)
        elif isinstance(instr, bhv.FuzzWork):
            stream = state.stream(self_addr)
            flag = stream.randrange(2)
            meter.charge("sstore")
            storage["d_binary"] = flag
            count = stream.randrange(instr.loop_draw)
            meter.charge("sstore")
            storage["c"] = count
            if flag:
                meter.charge("arith", count)
        elif isinstance(instr, bhv.StartChurn):
            budget = state.stream(self_addr).randrange(instr.max_depth)
            meter.charge("sstore")
            storage[bhv.CHURN_BUDGET] = budget
            if budget > 0:
                _call(ctx, meter, self_addr, self_addr, bhv.CHURN_HANDLER, 0, depth)
        elif isinstance(instr, bhv.ChurnStep):
            meter.charge("arith")
            budget = storage.get(bhv.CHURN_BUDGET, 0)
            if budget > 0:
                meter.charge("sstore")
                storage[bhv.CHURN_BUDGET] = budget - 1
                if budget - 1 > 0:
                    _call(ctx, meter, self_addr, self_addr, bhv.CHURN_HANDLER, 0, depth)
        elif isinstance(instr, bhv.SetCallerFlag):
            meter.charge("sstore")
            storage[f"{instr.prefix}:{caller}"] = 1
        elif isinstance(instr, bhv.IfCallerFlagUnset):
            meter.charge("arith")
            if storage.get(f"{instr.prefix}:{caller}", 0) == 0:
                _run_script(ctx, meter, instr.body, caller, self_addr, depth)
        elif isinstance(instr, bhv.IncrementCounter):
            meter.charge("sstore")
            storage[instr.name] = storage.get(instr.name, 0) + 1
        elif isinstance(instr, bhv.IfCounterBelow):
            meter.charge("arith")
            if instr.limit is None or storage.get(instr.name, 0) < instr.limit:
                _run_script(ctx, meter, instr.body, caller, self_addr, depth)
        elif isinstance(instr, bhv.DonateToCaller):
            amount = instr.amount
            if amount is None:
                amount = state.stream(self_addr).randrange(bhv.AMOUNT_DRAW)
                amount *= bhv.AMOUNT_STEP
                meter.charge("sstore")
                storage["amnt"] = amount
            ok = _value_call(ctx, meter, self_addr, caller, amount, depth)
            if instr.require_success and not ok:
                raise _RequireFailed()
        elif isinstance(instr, bhv.CallCallerFunction):
            ok = _call(ctx, meter, self_addr, caller, instr.function, 0, depth)
            if instr.require_success and not ok:
                raise _RequireFailed()
        else:
            raise ChainError(f"unknown instruction {instr!r}")


def _value_call(
    ctx: _TxContext,
    meter: FrameMeter,
    payer: Address,
    payee: Address,
    amount: Wei,
    depth: int,
) -> bool:
    """Fallback-dispatching call that carries ``amount`` wei."""
    meter.charge("call_base")
    if ctx.state.account(payer).balance < amount:
        return False
    ok, spent = _invoke_frame(
        ctx, payer, payee, None, amount, meter.remaining, depth + 1
    )
    if ok:
        meter.consume_child(spent)
    return ok


def _call(
    ctx: _TxContext,
    meter: FrameMeter,
    caller: Address,
    callee: Address,
    function: str,
    value: Wei,
    depth: int,
) -> bool:
    meter.charge("call_base")
    ok, spent = _invoke_frame(
        ctx, caller, callee, function, value, meter.remaining, depth + 1
    )
    if ok:
        meter.consume_child(spent)
    return ok


def _digest(state: ChainState, *parts: object) -> str:
    text = ":".join(str(p) for p in (state.chain_id,) + parts)
    return "0x" + hashlib.sha256(text.encode()).hexdigest()


def execute_transaction(state: ChainState, tx: Transaction) -> ExecutionResult:
    """Execute one transaction against ``state``.

    On success the state is committed, the block number and committed-tx
    counter advance, and a receipt plus full call trace are returned. When
    the root frame fails, every state change is rolled back (only the block
    number advances) and no receipt exists, so reverted transactions are
    invisible to anything that consumes receipts.
    """
    state.account(tx.sender)
    state.account(tx.to)
    schedule = state.schedule
    if tx.gas_limit < schedule.intrinsic:
        raise GasLimitBelowIntrinsic(
            f"gas limit {tx.gas_limit} below intrinsic {schedule.intrinsic}"
        )
    if tx.value < 0:
        raise ChainError("negative transaction value")
    block = state.block_number
    state.block_number = block + 1
    if tx.value > state.account(tx.sender).balance:
        return TopLevelReverted("insufficient_balance")
    ctx = _TxContext(state)
    ok, spent = _invoke_frame(
        ctx,
        caller=tx.sender,
        callee=tx.to,
        function=tx.function,
        value=tx.value,
        budget=tx.gas_limit - schedule.intrinsic,
        depth=1,
    )
    if not ok:
        root = ctx.frames[0].outcome
        reason = (
            "out_of_gas" if root is FrameOutcome.OUT_OF_GAS else "require_failed"
        )
        return TopLevelReverted(reason)
    gas_used = schedule.intrinsic + spent
    tx_hash = _digest(
        state, "tx", block, state.tx_counter, tx.sender, tx.to,
        tx.function, tx.value, tx.gas_limit,
    )
    receipt = Receipt(
        blockHash=_digest(state, "block", block),
        blockNumber=block,
        contractAddress=None,
        cumulativeGasUsed=gas_used,
        from_=tx.sender,
        gasUsed=gas_used,
        logs=(),
        logsBloom="0x" + "0" * 512,
        status="0x1",
        to=tx.to,
        transactionHash=tx_hash,
        transactionIndex=0,
    )
    state.tx_counter += 1
    trace = ExecutionTrace(frames=tuple(ctx.frames), total_gas_used=gas_used)
    return Executed(receipt=receipt, trace=trace)
