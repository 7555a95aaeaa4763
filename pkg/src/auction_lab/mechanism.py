"""Single-item auction mechanisms as (allocation, payment, removal) triples.

Bidders are indexed from 0. Every rule takes the full bid vector; the
allocation picks the winning index, payment and removal return one amount
per bidder. The seller keeps ``sum(payment - removal)``; removed funds are
lost to everyone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import MechanismViolation

Bids = tuple[float, ...]


@dataclass(frozen=True)
class Mechanism:
    name: str
    allocation: Callable[[Bids], int]
    payment: Callable[[Bids], Sequence[float]]
    removal: Callable[[Bids], Sequence[float]]


@dataclass(frozen=True)
class Outcome:
    winner: int
    payments: tuple[float, ...]
    removals: tuple[float, ...]
    seller_utility: float
    bidder_utilities: tuple[float, ...]


@dataclass(frozen=True)
class Coalition:
    """An off-chain agreement between the seller and the bidders in ``members``.

    ``agreed_bids`` lists ``(owner, amount)`` pairs. An owner is a member
    index, or ``None`` for a bid the seller places under a pseudonym. Members
    without a bid have "disappeared" from the auction and pay nothing.
    """

    members: frozenset[int] = field(default_factory=frozenset)
    agreed_bids: tuple[tuple[Optional[int], float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        object.__setattr__(self, "agreed_bids", tuple((o, float(b)) for o, b in self.agreed_bids))
        owners = [o for o, _ in self.agreed_bids if o is not None]
        if len(owners) != len(set(owners)):
            raise ValueError("a member submits at most one agreed bid")
        if not set(owners) <= self.members:
            raise ValueError("agreed bids owned by non-members")
        if any(b < 0 for _, b in self.agreed_bids):
            raise ValueError("bids must be non-negative")


def _winner(bids: Bids) -> int:
    # lowest index among the maximal bids
    best = 0
    for i in range(1, len(bids)):
        if bids[i] > bids[best]:
            best = i
    return best


def _second_price_payments(bids: Bids) -> list[float]:
    w = _winner(bids)
    pay = [0.0] * len(bids)
    if len(bids) > 1:
        pay[w] = max(b for i, b in enumerate(bids) if i != w)
    return pay


def evaluate(mech: Mechanism, bids: Sequence[float], vals: Sequence[float]) -> Outcome:
    """Run ``mech`` on ``bids`` and score every participant against ``vals``.

    Raises :class:`MechanismViolation` if a payment exceeds its bid or a
    removal exceeds its payment on this input.
    """
    bids = tuple(float(b) for b in bids)
    if len(bids) == 0 or len(bids) != len(vals):
        raise ValueError("bids and vals must be non-empty and of equal length")
    if any(b < 0 for b in bids):
        raise ValueError("bids must be non-negative")
    winner = mech.allocation(bids)
    payments = tuple(float(p) for p in mech.payment(bids))
    removals = tuple(float(r) for r in mech.removal(bids))
    _check(mech, bids, winner, payments, removals)
    utilities = tuple(
        (vals[i] if i == winner else 0.0) - payments[i] for i in range(len(bids))
    )
    seller = math.fsum(p - r for p, r in zip(payments, removals))
    return Outcome(winner, payments, removals, seller, utilities)


def _check(mech, bids, winner, payments, removals):
    n = len(bids)
    if not (isinstance(winner, int) and 0 <= winner < n):
        raise MechanismViolation(f"{mech.name}: allocation {winner!r} outside 0..{n - 1}")
    if len(payments) != n or len(removals) != n:
        raise MechanismViolation(f"{mech.name}: rule output length differs from {n} bidders")
    for i in range(n):
        p, r = payments[i], removals[i]
        if p < 0 or p > bids[i]:
            raise MechanismViolation(f"{mech.name}: bidder {i} pays {p} on bid {bids[i]}")
        if r < 0 or r > p:
            raise MechanismViolation(f"{mech.name}: bidder {i} has removal {r} above payment {p}")


def joint_utility(
    mech: Mechanism,
    coalition: Coalition,
    outside_bids: Sequence[float],
    vals: Sequence[float],
) -> float:
    """Seller utility plus the utilities of the coalition members.

    The submitted vector is the agreed bids followed by ``outside_bids``.
    ``vals`` is indexed by bidder, so it must cover every member that owns a
    bid. Seller-owned bids count as a participant of value 0: the seller
    pays itself and only the removed part is lost.
    """
    bids = [b for _, b in coalition.agreed_bids] + [float(b) for b in outside_bids]
    k = len(coalition.agreed_bids)
    pseudo_vals = [vals[o] if o is not None else 0.0 for o, _ in coalition.agreed_bids]
    pseudo_vals += [0.0] * len(outside_bids)
    out = evaluate(mech, bids, pseudo_vals)
    return out.seller_utility + math.fsum(out.bidder_utilities[:k])


# -- named mechanisms ---------------------------------------------------------


def _zeros(bids: Bids) -> list[float]:
    return [0.0] * len(bids)


def second_price() -> Mechanism:
    return Mechanism("SecondPrice", _winner, _second_price_payments, _zeros)


def first_price() -> Mechanism:
    def pay(bids):
        w = _winner(bids)
        out = [0.0] * len(bids)
        out[w] = bids[w]
        return out

    return Mechanism("FirstPrice", _winner, pay, _zeros)


def second_price_partial_removal(fraction: float) -> Mechanism:
    """Second price where ``fraction`` of the winner's payment is removed."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    if fraction == 1.0:
        return second_price_full_removal()

    def removal(bids):
        return [fraction * p for p in _second_price_payments(bids)]

    return Mechanism(f"SecondPricePartialRemoval({fraction:g})", _winner, _second_price_payments, removal)


def second_price_full_removal() -> Mechanism:
    return Mechanism("SecondPriceFullRemoval", _winner, _second_price_payments, _second_price_payments)


def zero_payment() -> Mechanism:
    """Highest bid wins and nobody pays anything."""
    return Mechanism("ZeroPayment", _winner, _zeros, _zeros)


def make_named_mechanism(name: str, fraction: float | None = None) -> Mechanism:
    key = name.replace("_", "").lower()
    if key == "secondprice":
        return second_price()
    if key == "firstprice":
        return first_price()
    if key == "secondpricefullremoval":
        return second_price_full_removal()
    if key == "secondpricepartialremoval":
        if fraction is None:
            raise ValueError("partial removal needs a fraction")
        return second_price_partial_removal(fraction)
    if key == "zeropayment":
        return zero_payment()
    raise ValueError(f"unknown mechanism {name!r}")


def blended_mechanism(
    first_weight: float,
    loser_fraction: float,
    removal_fraction: float,
    name: str | None = None,
) -> Mechanism:
    """A monotone highest-bid mechanism with tunable payment and removal.

    The winner pays ``w * b1 + (1 - w) * b2``; each loser pays
    ``loser_fraction`` of its own bid; ``removal_fraction`` of every payment
    is removed. ``(0, 0, 0)`` is the second-price auction.
    """
    for v in (first_weight, loser_fraction, removal_fraction):
        if not 0.0 <= v <= 1.0:
            raise ValueError("all parameters must lie in [0, 1]")

    def pay(bids):
        w = _winner(bids)
        second = _second_price_payments(bids)[w]
        out = [loser_fraction * b for b in bids]
        # the convex combination can round one ulp above the bid
        out[w] = min(first_weight * bids[w] + (1.0 - first_weight) * second, bids[w])
        return out

    def removal(bids):
        if removal_fraction == 1.0:
            return pay(bids)
        return [removal_fraction * p for p in pay(bids)]

    label = name or f"Blended(w={first_weight:.3g},loser={loser_fraction:.3g},removal={removal_fraction:.3g})"
    return Mechanism(label, _winner, pay, removal)
