from typing import Iterable, Mapping, NamedTuple, Protocol

from abiam.exceptions import LedgerError
from abiam.schemas import FlowTag

SINKS = ("government", "central-bank", "rest-of-world")


class Account(Protocol):
    id: str
    cash: float


class LedgerEntry(NamedTuple):
    payer: str
    payee: str
    amount: float
    tag: FlowTag


class Ledger:
    """Double-entry record of one step's monetary flows.

    Agents register their account object; every cash change in the
    simulation goes through `post`, so the entries explain every balance
    change between two snapshots.
    """

    def __init__(self):
        self.accounts: dict[str, Account] = {}
        self.entries: list[LedgerEntry] = []

    def open(self, account: Account) -> None:
        if account.id in self.accounts:
            raise LedgerError(f"Account '{account.id}' already exists")
        self.accounts[account.id] = account

    def close(self, account_id: str) -> Account:
        account = self.accounts.pop(account_id, None)
        if account is None:
            raise LedgerError(f"Unknown agent '{account_id}'")
        if account.cash != 0.0:
            raise LedgerError(f"Account '{account_id}' closed with balance {account.cash}")
        return account

    def post(self, payer: str, payee: str, amount: float, tag: FlowTag) -> LedgerEntry:
        if amount < 0:
            raise LedgerError(f"Negative flow {amount} from '{payer}' to '{payee}'")
        if payer == payee:
            raise LedgerError(f"Self-flow on '{payer}' is not allowed")
        for agent_id in (payer, payee):
            if agent_id not in self.accounts:
                raise LedgerError(f"Unknown agent '{agent_id}'")
        amount = float(amount)
        self.accounts[payer].cash -= amount
        self.accounts[payee].cash += amount
        entry = LedgerEntry(payer, payee, amount, FlowTag(tag))
        self.entries.append(entry)
        return entry

    def balances(self) -> dict[str, float]:
        return {agent_id: account.cash for agent_id, account in self.accounts.items()}

    def gross_volume(self) -> float:
        return sum(entry.amount for entry in self.entries)

    def clear(self) -> None:
        self.entries = []


def post_flow(ledger: Ledger, payer: str, payee: str, amount: float, tag: FlowTag) -> Ledger:
    ledger.post(payer, payee, amount, tag)
    return ledger


def net_flows(entries: Iterable[LedgerEntry]) -> dict[str, float]:
    net: dict[str, float] = {}
    for payer, payee, amount, _ in entries:
        net[payer] = net.get(payer, 0.0) - amount
        net[payee] = net.get(payee, 0.0) + amount
    return net


def check_stock_flow(
    ledger: Ledger | Iterable[LedgerEntry],
    before: Mapping[str, float],
    after: Mapping[str, float],
) -> float:
    """Largest gap between an agent's balance change and its ledger entries.

    Agents missing from one of the snapshots count as holding zero there,
    which covers entrants and agents closed during the step.
    """
    entries = ledger.entries if isinstance(ledger, Ledger) else ledger
    net = net_flows(entries)
    residual = 0.0
    for agent_id in set(before) | set(after) | set(net):
        change = after.get(agent_id, 0.0) - before.get(agent_id, 0.0)
        residual = max(residual, abs(change - net.get(agent_id, 0.0)))
    return residual


def split_exact(total: float, weights: list[float]) -> list[float]:
    """Split `total` in proportion to `weights`; the parts sum to `total` exactly.

    The last part takes the remainder. Zero or empty weights split evenly.
    """
    if not weights:
        return []
    weight_sum = sum(weights)
    if weight_sum <= 0:
        weights = [1.0] * len(weights)
        weight_sum = float(len(weights))
    parts = [total * w / weight_sum for w in weights[:-1]]
    parts.append(total - sum(parts))
    if parts[-1] < 0:
        parts[-1] = 0.0
        overshoot = sum(parts) - total
        for i in range(len(parts) - 2, -1, -1):
            cut = min(parts[i], overshoot)
            parts[i] -= cut
            overshoot -= cut
            if overshoot <= 0:
                break
    return parts
