"""Random operation sequences against the contract, with invariants checked after every step."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from auction_lab.errors import ProtocolError
from auction_lab.protocol import (
    OPERATION_PHASES,
    TRANSITIONS,
    Auction,
    Ledger,
    Phase,
    ProtocolParams,
    commit_digest,
)

ACCOUNTS = ("b0", "b1", "b2", "b3", "seller")
OPS = ("commit", "reveal", "advance", "top_up", "withdraw", "claim_refund")


@dataclass
class FuzzStats:
    runs: int = 0
    operations: int = 0
    accepted: int = 0
    violations: list = field(default_factory=list)
    phases_seen: set = field(default_factory=set)
    accepted_by_op: dict = field(default_factory=dict)


def _fingerprint(a: Auction):
    led = a.ledger
    return (
        tuple(sorted(led.balances.items())),
        led.escrow,
        led.burned,
        tuple(sorted(led.nfts.items())),
        a.phase,
        a.clock,
        tuple((c.bid, c.refundable, c.claimed) for c in a.commits),
        a.proceeds,
        a.amount_due,
        a.withdrawn,
    )


class Run:
    """One auction driven by a seeded random generator."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        r = self.rng
        self.L = r.choice([0, 1, 7, 1000, 250_000])
        alpha = r.choice([0.0, 0.1, 0.25, 0.5, 0.999])
        c = r.randint(1, 4)
        self.params = ProtocolParams(self.L, alpha, c, c + r.randint(1, 4), c + 5 + r.randint(0, 4))
        balances = {a: r.randint(0, 3_000_000) for a in ACCOUNTS}
        self.ledger = Ledger(balances, {"nft": "seller"})
        self.supply = self.ledger.total_supply()
        self.auction = Auction("seller", self.params, self.ledger)
        self.openings: dict[int, tuple[int, bytes]] = {}
        self.violations: list[str] = []

    def fail(self, msg):
        self.violations.append(msg)

    # -- operations -------------------------------------------------------------------------

    def random_op(self):
        r, a = self.rng, self.auction
        if r.random() < 0.7:
            # mostly pick something the current phase allows, or let time pass
            legal = [o for o in OPS if o != "advance" and a.phase in OPERATION_PHASES[o]]
            op = r.choice(legal) if legal and r.random() < 0.75 else "advance"
        else:
            op = r.choice(OPS)
        who = r.choice(ACCOUNTS)
        if op == "commit":
            bid = r.choice([0, 1, r.randint(0, 2_000_000), r.randint(0, 5_000)])
            nonce = r.randbytes(16)
            deposit = self.L if r.random() < 0.85 else self.L + r.choice([-1, 1])
            idx = len(a.commits)
            return op, (lambda: a.commit(who, commit_digest(bid, nonce), deposit)), {"bid": bid, "nonce": nonce, "idx": idx, "who": who}
        if op == "reveal":
            if not a.commits:
                return op, (lambda: a.reveal(who, 0, 0, bytes(16))), {}
            idx = r.randrange(len(a.commits) + 1)
            opening = self.openings.get(idx)
            if opening is not None and r.random() < 0.8:
                bid, nonce = opening
                owner = a.commits[idx].bidder
                if r.random() < 0.1:
                    nonce = bytes(16)
                return op, (lambda: a.reveal(owner, idx, bid, nonce)), {}
            return op, (lambda: a.reveal(who, idx, r.randint(0, 10), bytes(16))), {}
        if op == "advance":
            ticks = r.choice([0, 1, 1, 2, 3, 5])
            return op, (lambda: a.advance(ticks)), {}
        if op == "top_up":
            account = a.winner if (a.winner and r.random() < 0.8) else who
            amount = a.amount_due + (0 if r.random() < 0.8 else r.choice([-1, 1]))
            return op, (lambda: a.top_up(account, amount)), {}
        if op == "withdraw":
            account = "seller" if r.random() < 0.8 else who
            return op, (lambda: a.withdraw(account)), {}
        if not a.commits:
            return op, (lambda: a.claim_refund(who, 0)), {}
        idx = r.randrange(len(a.commits))
        account = a.commits[idx].bidder if r.random() < 0.85 else who
        return op, (lambda: a.claim_refund(account, idx)), {"idx": idx}

    def step(self, stats: FuzzStats):
        a = self.auction
        op, call, info = self.random_op()
        before = _fingerprint(a)
        phase0, burned0 = a.phase, self.ledger.burned
        unrevealed0 = sum(1 for c in a.commits if c.bid is None)
        refundable0 = [c.refundable for c in a.commits]
        try:
            result = call()
            accepted = True
        except ProtocolError:
            accepted = False
        except ValueError:
            accepted = False
        stats.operations += 1
        if not accepted:
            if _fingerprint(a) != before:
                self.fail(f"rejected {op} changed state")
            return
        stats.accepted += 1
        stats.accepted_by_op[op] = stats.accepted_by_op.get(op, 0) + 1
        if op != "advance" and phase0 not in OPERATION_PHASES[op]:
            self.fail(f"{op} accepted in {phase0}")
        if op == "commit":
            self.openings[info["idx"]] = (info["bid"], info["nonce"])
        if op == "claim_refund":
            idx = info["idx"]
            c = a.commits[idx]
            if result != refundable0[idx]:
                self.fail("refund differs from refundable amount")
            if idx != a.winner_index and result != c.lock:
                self.fail("revealed loser not refunded its full lock")
        if op == "withdraw":
            x = a.proceeds
            if result != x - a.params.fee(x):
                self.fail("seller payout differs from x - g(x)")
            if self.ledger.burned - burned0 != a.params.fee(x):
                self.fail("fee not burned")
        self.check(phase0, burned0, unrevealed0)

    # -- invariants -------------------------------------------------------------------------

    def check(self, phase0: Phase, burned0: int, unrevealed0: int):
        a, led = self.auction, self.ledger
        if led.total_supply() != self.supply:
            self.fail("supply not conserved")
        if led.burned < burned0:
            self.fail("burn sink decreased")
        if led.escrow < 0 or any(v < 0 for v in led.balances.values()):
            self.fail("negative balance or escrow")
        if a.phase is not phase0 and a.phase not in _reachable(phase0):
            self.fail(f"illegal transition {phase0} -> {a.phase}")
        if a.b1 is not None and a.b2 is not None and a.b2 > a.b1:
            self.fail("b2 above b1")
        if phase0 is Phase.REVEAL_OPEN and a.phase is not Phase.REVEAL_OPEN:
            burned = led.burned - burned0
            expected = unrevealed0 * self.L
            if a.phase is Phase.EXPIRED:
                expected += min(a.b2 or 0, self.L)
            if burned != expected:
                self.fail(f"burned {burned} at end of reveal, expected {expected}")
        if a.phase is Phase.SETTLED and not a.void and a.winner is not None:
            if led.nfts["nft"] != a.winner:
                self.fail("settled but winner lacks the item")
            if a.proceeds > a.b1:
                self.fail("winner charged above own bid")

    def finish(self):
        """Drive to a terminal phase and claim everything; escrow must empty out."""
        a = self.auction
        a.advance(a.params.settle_deadline + 1)
        if a.phase is Phase.SETTLED and not a.withdrawn:
            a.withdraw("seller")
        for i, c in enumerate(a.commits):
            if c.bid is not None and c.refundable and not c.claimed:
                a.claim_refund(c.bidder, i)
        if a.phase not in (Phase.SETTLED, Phase.EXPIRED):
            self.fail("did not reach a terminal phase")
        if self.ledger.escrow != 0:
            self.fail(f"escrow left with {self.ledger.escrow}")
        if self.ledger.total_supply() != self.supply:
            self.fail("supply not conserved after clean-up")
        if a.winner is not None and a.phase is Phase.SETTLED:
            w = a.commits[a.winner_index]
            paid = a.proceeds
            if paid != a.b2 or paid > w.bid:
                self.fail("winner outflow differs from b2")


def _reachable(phase: Phase) -> set:
    seen, todo = set(), [phase]
    while todo:
        p = todo.pop()
        for q in TRANSITIONS[p]:
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return seen


def fuzz(runs: int, seed: int = 0, max_ops: int = 30) -> FuzzStats:
    stats = FuzzStats()
    master = random.Random(seed)
    for k in range(runs):
        run = Run(master.getrandbits(64))
        for _ in range(master.randint(1, max_ops)):
            run.step(stats)
            stats.phases_seen.add(run.auction.phase)
        run.finish()
        stats.phases_seen.add(run.auction.phase)
        stats.runs += 1
        if run.violations:
            stats.violations.append((k, run.violations[:3]))
    return stats
