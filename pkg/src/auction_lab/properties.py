"""Exhaustive incentive checks for mechanisms on small discrete instances.

All three checks enumerate a finite grid and report witnesses; none of
them proves anything about continuous bids. The coalition check holds
outside bidders to truthful bids.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .mechanism import (
    Coalition,
    Mechanism,
    blended_mechanism,
    evaluate,
    first_price,
    joint_utility,
    second_price,
    second_price_full_removal,
    second_price_partial_removal,
    zero_payment,
)

BIDDER_IC = "BidderIC"
SELLER_IC = "SellerIC"
OCA_PROOF = "OCAProof"

# strict-gain threshold; absorbs float noise in payment arithmetic
GAIN_TOL = 1e-12

MAX_GRID = 8
MAX_BIDDERS = 3
MAX_FAKES = 2
MAX_EXTRA = 2

OUTSIDER_NOTE = "coalition check holds outside bidders to truthful bids"


@dataclass(frozen=True)
class DiscreteInstance:
    bid_grid: tuple[float, ...]
    n: int
    max_fake_bids: int = 2
    max_coalition_extra_bids: int = 2

    def __post_init__(self):
        grid = tuple(float(g) for g in self.bid_grid)
        object.__setattr__(self, "bid_grid", grid)
        if list(grid) != sorted(set(grid)):
            raise ValueError("bid_grid must be strictly increasing")
        if not grid or grid[0] != 0.0:
            raise ValueError("bid_grid must contain 0")
        if len(grid) > MAX_GRID:
            raise ValueError(f"bid_grid has more than {MAX_GRID} points")
        if not 1 <= self.n <= MAX_BIDDERS:
            raise ValueError(f"n must lie in 1..{MAX_BIDDERS}")
        if not 0 <= self.max_fake_bids <= MAX_FAKES:
            raise ValueError(f"max_fake_bids must lie in 0..{MAX_FAKES}")
        if not 0 <= self.max_coalition_extra_bids <= MAX_EXTRA:
            raise ValueError(f"max_coalition_extra_bids must lie in 0..{MAX_EXTRA}")

    def profiles(self) -> Iterable[tuple[float, ...]]:
        return itertools.product(self.bid_grid, repeat=self.n)

    def multisets(self, max_size: int) -> Iterable[tuple[float, ...]]:
        for k in range(max_size + 1):
            yield from itertools.combinations_with_replacement(self.bid_grid, k)


@dataclass(frozen=True)
class Violation:
    """A configuration where a deviation gains ``differential > 0``."""

    property: str
    witness: dict
    differential: float

    def replay(self, mech: Mechanism) -> float:
        """Recompute the gain from the witness alone."""
        w = self.witness
        if self.property == BIDDER_IC:
            vals = w["vals"]
            i = w["bidder"]
            dev = list(vals)
            dev[i] = w["deviation"]
            return evaluate(mech, dev, vals).bidder_utilities[i] - evaluate(mech, vals, vals).bidder_utilities[i]
        if self.property == SELLER_IC:
            return _seller_revenue(mech, w["bids"], w["fakes"]) - _seller_revenue(mech, w["bids"], ())
        if self.property == OCA_PROOF:
            vals = w["vals"]
            members = frozenset(w["members"])
            outside = [vals[j] for j in w["outsiders"]]
            honest = Coalition(members, tuple((i, vals[i]) for i in sorted(members)))
            deviant = Coalition(members, tuple((o, b) for o, b in w["agreed_bids"]))
            return joint_utility(mech, deviant, outside, vals) - joint_utility(mech, honest, outside, vals)
        raise ValueError(f"unknown property {self.property!r}")


def check_bidder_ic(mech: Mechanism, instance: DiscreteInstance, limit: Optional[int] = None) -> list[Violation]:
    """Every valuation profile, every bidder, every grid deviation against truthful others."""
    out: list[Violation] = []
    for vals in instance.profiles():
        truthful = evaluate(mech, vals, vals).bidder_utilities
        for i in range(instance.n):
            for b in instance.bid_grid:
                if b == vals[i]:
                    continue
                dev = list(vals)
                dev[i] = b
                gain = evaluate(mech, dev, vals).bidder_utilities[i] - truthful[i]
                if gain > GAIN_TOL:
                    out.append(Violation(BIDDER_IC, {"vals": list(vals), "bidder": i, "deviation": b}, gain))
                    if limit is not None and len(out) >= limit:
                        return out
    return out


def _seller_revenue(mech: Mechanism, bids: Sequence[float], fakes: Sequence[float]) -> float:
    """Real bidders' payments minus all removals; fakes are appended after the real bids."""
    k = len(bids)
    full = list(bids) + list(fakes)
    out = evaluate(mech, full, [0.0] * len(full))
    real = math.fsum(p - r for p, r in zip(out.payments[:k], out.removals[:k]))
    return real - math.fsum(out.removals[k:])


def check_seller_ic(mech: Mechanism, instance: DiscreteInstance, limit: Optional[int] = None) -> list[Violation]:
    """Every bid profile and every multiset of up to ``max_fake_bids`` fake bids."""
    out: list[Violation] = []
    fake_sets = [f for f in instance.multisets(instance.max_fake_bids) if f]
    for bids in instance.profiles():
        base = _seller_revenue(mech, bids, ())
        for fakes in fake_sets:
            gain = _seller_revenue(mech, bids, fakes) - base
            if gain > GAIN_TOL:
                out.append(Violation(SELLER_IC, {"bids": list(bids), "fakes": list(fakes)}, gain))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def _assign_owners(members: Sequence[int], vals: Sequence[float], bids: Sequence[float], winner: Optional[int]):
    """Give the winning bid to the member who values the item most, the rest in order, extras to the seller."""
    ranked = sorted(members, key=lambda i: (-vals[i], i))
    owners: list[Optional[int]] = [None] * len(bids)
    free = list(ranked)
    if winner is not None and free:
        owners[winner] = free.pop(0)
    for j in range(len(bids)):
        if j != winner and free:
            owners[j] = free.pop(0)
    return tuple(zip(owners, bids))


def check_oca_proof(mech: Mechanism, instance: DiscreteInstance, limit: Optional[int] = None) -> list[Violation]:
    """Every valuation profile, every coalition, every bid list up to ``|S| + extra`` long.

    Coalition bids come before the outsiders' truthful bids, as in
    :func:`joint_utility`; the truthful baseline uses the same layout with
    each member bidding its value.
    """
    out: list[Violation] = []
    n = instance.n
    for vals in instance.profiles():
        for size in range(n + 1):
            for members in itertools.combinations(range(n), size):
                mset = frozenset(members)
                outsiders = [j for j in range(n) if j not in mset]
                outside = [vals[j] for j in outsiders]
                honest = Coalition(mset, tuple((i, vals[i]) for i in members))
                base = joint_utility(mech, honest, outside, vals)
                for agreed in instance.multisets(size + instance.max_coalition_extra_bids):
                    # highest bids first so the designated winner sits in front among equals
                    bids = sorted(agreed, reverse=True)
                    full = bids + outside
                    if not full:
                        continue
                    w = mech.allocation(tuple(full))
                    winner = w if w < len(bids) else None
                    coalition = Coalition(mset, _assign_owners(members, vals, bids, winner))
                    gain = joint_utility(mech, coalition, outside, vals) - base
                    if gain > GAIN_TOL:
                        witness = {
                            "vals": list(vals),
                            "members": list(members),
                            "outsiders": outsiders,
                            "agreed_bids": [[o, b] for o, b in coalition.agreed_bids],
                        }
                        out.append(Violation(OCA_PROOF, witness, gain))
                        if limit is not None and len(out) >= limit:
                            return out
    return out


def max_seller_revenue(mech: Mechanism, instance: DiscreteInstance) -> float:
    """Largest seller utility over truthful bid profiles on the grid."""
    return max(evaluate(mech, b, b).seller_utility for b in instance.profiles())


# -- impossibility experiment -------------------------------------------------------------


@dataclass(frozen=True)
class MechanismRow:
    mechanism: str
    bidder_ic: bool
    seller_ic: bool
    oca_proof: bool
    max_seller_revenue: float
    witnesses: dict = field(default_factory=dict, compare=False)

    @property
    def passes_bidder_ic_and_oca(self) -> bool:
        return self.bidder_ic and self.oca_proof


TABLE_FIELDS = ("mechanism", "bidder_ic", "seller_ic", "oca_proof", "max_seller_revenue")


@dataclass(frozen=True)
class ImpossibilityReport:
    instance: DiscreteInstance
    rows: tuple[MechanismRow, ...]

    @property
    def dichotomy_holds(self) -> bool:
        """No mechanism is bidder-IC and OCA-proof while earning positive revenue on the grid."""
        return not any(r.passes_bidder_ic_and_oca and r.max_seller_revenue > GAIN_TOL for r in self.rows)

    @property
    def counterexamples(self) -> list[MechanismRow]:
        return [r for r in self.rows if r.passes_bidder_ic_and_oca and r.max_seller_revenue > GAIN_TOL]

    def header(self) -> str:
        i = self.instance
        return (
            f"# grid={list(i.bid_grid)} n={i.n} fakes<={i.max_fake_bids} "
            f"extra coalition bids<={i.max_coalition_extra_bids}; {OUTSIDER_NOTE}"
        )

    def to_table(self) -> str:
        width = max([len("mechanism")] + [len(r.mechanism) for r in self.rows])
        lines = [self.header()]
        lines.append(f"{'mechanism':<{width}}  bidderIC  sellerIC  OCAproof  max_revenue")
        for r in self.rows:
            lines.append(
                f"{r.mechanism:<{width}}  {_yn(r.bidder_ic):<8}  {_yn(r.seller_ic):<8}  "
                f"{_yn(r.oca_proof):<8}  {r.max_seller_revenue:.12g}"
            )
        lines.append(f"dichotomy holds: {_yn(self.dichotomy_holds)}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_FIELDS)
        for r in self.rows:
            w.writerow([r.mechanism, int(r.bidder_ic), int(r.seller_ic), int(r.oca_proof), f"{r.max_seller_revenue:.12g}"])
        return buf.getvalue()


def _yn(flag: bool) -> str:
    return "yes" if flag else "no"


def named_family() -> list[Mechanism]:
    return [
        second_price(),
        first_price(),
        second_price_partial_removal(0.5),
        second_price_full_removal(),
        zero_payment(),
    ]


def random_family(count: int, seed: int = 0) -> list[Mechanism]:
    """Blended highest-bid mechanisms with uniformly drawn weights and removal fractions."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        w, loser, removal = (float(x) for x in rng.uniform(0.0, 1.0, size=3))
        out.append(blended_mechanism(w, loser, removal, name=f"Random{k:03d}(w={w:.3f},loser={loser:.3f},removal={removal:.3f})"))
    return out


def classify(mech: Mechanism, instance: DiscreteInstance) -> MechanismRow:
    """Run the three checks, stopping each one at its first violation."""
    found = {
        BIDDER_IC: check_bidder_ic(mech, instance, limit=1),
        SELLER_IC: check_seller_ic(mech, instance, limit=1),
        OCA_PROOF: check_oca_proof(mech, instance, limit=1),
    }
    witnesses = {k: v[0] for k, v in found.items() if v}
    return MechanismRow(
        mech.name,
        not found[BIDDER_IC],
        not found[SELLER_IC],
        not found[OCA_PROOF],
        max_seller_revenue(mech, instance),
        witnesses,
    )


def impossibility_experiment(
    instance: DiscreteInstance,
    mechanisms: Optional[Sequence[Mechanism]] = None,
    random_count: int = 100,
    seed: int = 0,
) -> ImpossibilityReport:
    """Classify the named family plus ``random_count`` random mechanisms."""
    mechs = list(mechanisms) if mechanisms is not None else named_family()
    mechs += random_family(random_count, seed)
    return ImpossibilityReport(instance, tuple(classify(m, instance) for m in mechs))
