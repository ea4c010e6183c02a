from typing import NamedTuple, Sequence

from pydantic import BaseModel, Field

from abiam.kernel.rng import RngStream


class Buyer(BaseModel):
    id: str
    budget: float = Field(ge=0)
    shortlist: list[str] = Field(default_factory=list)


class Offer(BaseModel):
    id: str
    price: float = Field(gt=0)
    stock: float = Field(ge=0)


class Transaction(NamedTuple):
    buyer: str
    seller: str
    quantity: float
    spending: float


class GoodsMarketOutcome(BaseModel):
    transactions: list[Transaction] = Field(default_factory=list)
    shortlists: dict[str, list[str]] = Field(default_factory=dict)
    unsatisfied: dict[str, float] = Field(default_factory=dict, description="Budget left per buyer")
    turned_away: dict[str, float] = Field(default_factory=dict, description="Demand per seller it could not serve")


def _buy(buyer_id: str, offer: Offer, money: float, trades: list[Transaction]) -> float:
    """Spend up to `money` at `offer`; returns the amount spent."""
    if money <= 0 or offer.stock <= 0:
        return 0.0
    wanted = money / offer.price
    if wanted <= offer.stock:
        quantity, spending = wanted, money
        offer.stock -= wanted
        if offer.stock < 0:
            offer.stock = 0.0
    else:
        quantity = offer.stock
        spending = min(money, quantity * offer.price)
        offer.stock = 0.0
    trades.append(Transaction(buyer_id, offer.id, quantity, spending))
    return spending


def two_round_goods_market(
    buyers: Sequence[Buyer],
    offers: Sequence[Offer],
    rng: RngStream,
    first_round_fraction: float = 0.5,
    churn_price_probability: float = 0.25,
    churn_unsatisfied_probability: float = 0.25,
) -> GoodsMarketOutcome:
    """Buyers spend part of their budget in a first round and the rest in a second.

    In the second round a buyer walks its shortlist and then the other sellers
    until its budget is spent or no supply is left. Afterwards each buyer may
    swap a shortlisted seller for a cheaper one and may drop a seller that
    could not serve it.
    """
    book = {offer.id: offer.model_copy() for offer in offers}
    seller_ids = sorted(book)
    order = rng.shuffled(sorted(buyers, key=lambda b: b.id))
    remaining = {b.id: b.budget for b in order}
    failed: dict[str, set[str]] = {b.id: set() for b in order}
    turned_away = {seller: 0.0 for seller in seller_ids}
    trades: list[Transaction] = []

    if seller_ids:
        for buyer in order:
            first = next((s for s in buyer.shortlist if s in book), None)
            if first is None:
                continue
            money = buyer.budget * first_round_fraction
            spent = _buy(buyer.id, book[first], money, trades)
            if spent < money:
                failed[buyer.id].add(first)
                turned_away[first] += (money - spent) / book[first].price
            remaining[buyer.id] -= spent

        for buyer in order:
            listed = [s for s in buyer.shortlist if s in book]
            others = rng.shuffled([s for s in seller_ids if s not in set(listed)])
            for seller in listed + others:
                money = remaining[buyer.id]
                if money <= 0:
                    break
                spent = _buy(buyer.id, book[seller], money, trades)
                if spent < money and seller in listed:
                    failed[buyer.id].add(seller)
                    turned_away[seller] += (money - spent) / book[seller].price
                remaining[buyer.id] = money - spent
                if remaining[buyer.id] < 0:
                    remaining[buyer.id] = 0.0

    shortlists = {}
    for buyer in order:
        shortlist = [s for s in buyer.shortlist if s in book]
        if rng.random() < churn_price_probability and shortlist and seller_ids:
            slot = rng.integers(0, len(shortlist))
            candidate = seller_ids[rng.integers(0, len(seller_ids))]
            if candidate not in shortlist and book[candidate].price < book[shortlist[slot]].price:
                shortlist[slot] = candidate
        if rng.random() < churn_unsatisfied_probability and failed[buyer.id] and seller_ids:
            dropped = sorted(failed[buyer.id])[0]
            candidate = seller_ids[rng.integers(0, len(seller_ids))]
            if dropped in shortlist and candidate not in shortlist:
                shortlist[shortlist.index(dropped)] = candidate
        shortlists[buyer.id] = shortlist

    return GoodsMarketOutcome(
        transactions=trades,
        shortlists=shortlists,
        unsatisfied={k: v for k, v in remaining.items() if v > 0},
        turned_away={k: v for k, v in turned_away.items() if v > 0},
    )


def capital_goods_market(
    orders: dict[str, float],
    stock: dict[str, float],
    shortlists: dict[str, list[str]],
    satisfaction: float = 0.95,
) -> list[tuple[str, str, float]]:
    """Deliveries (buyer, supplier, units) of machines.

    Each buyer splits its open order equally over the suppliers on its
    shortlist that still have stock, and repeats until the order is filled to
    `satisfaction` or its suppliers are sold out.
    """
    stock = dict(stock)
    deliveries: dict[tuple[str, str], float] = {}
    open_orders = {buyer: units for buyer, units in orders.items() if units > 0}
    for buyer in sorted(open_orders):
        wanted = open_orders[buyer]
        received = 0.0
        # each pass either fills the order or sells out one supplier
        for _ in range(len(shortlists.get(buyer, [])) + 1):
            if wanted - received <= (1.0 - satisfaction) * wanted + 1e-9 * wanted:
                break
            available = [s for s in shortlists.get(buyer, []) if stock.get(s, 0.0) > 1e-12]
            if not available:
                break
            share = (wanted - received) / len(available)
            for supplier in available:
                units = min(share, stock[supplier])
                stock[supplier] -= units
                received += units
                deliveries[(buyer, supplier)] = deliveries.get((buyer, supplier), 0.0) + units
    return [(buyer, supplier, units) for (buyer, supplier), units in deliveries.items() if units > 0]
