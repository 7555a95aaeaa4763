"""Commit-reveal auction contract running over an integer token ledger.

Amounts are integers of 10**-6 token. Time is a logical tick counter: the
phase only changes inside :meth:`Auction.advance`, which fires every
deadline that has passed.

Lifecycle::

    CommitOpen -> RevealOpen -> AwaitingTopUp -> Settled | Expired
                            \\-> Settled

Funds never leave the system. Locks and top-ups sit in ``Ledger.escrow``
and end up with a bidder, with the seller, or in ``Ledger.burned``.
Every rejected operation raises a :class:`~auction_lab.errors.ProtocolError`
before touching any state.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import asdict, dataclass
from typing import Optional

from .errors import (
    AlreadyClaimed,
    AlreadyWithdrawn,
    BadReveal,
    InsufficientFunds,
    InvalidParams,
    MalformedCommit,
    NothingToClaim,
    NotOwner,
    NotRevealed,
    WrongAccount,
    WrongAmount,
    WrongDeposit,
    WrongPhase,
)

TOKEN_UNIT = 1_000_000
MAX_BID = 2**64 - 1
CONTRACT = "<contract>"


def to_units(amount: float) -> int:
    """Convert a token amount to integer ledger units (round half to even)."""
    return int(round(amount * TOKEN_UNIT))


def commit_digest(bid: int, nonce: bytes) -> bytes:
    """SHA-256 of the 8-byte big-endian bid followed by the 16-byte nonce."""
    if len(nonce) != 16:
        raise ValueError("nonce must be exactly 16 bytes")
    try:
        encoded = bid.to_bytes(8, "big")
    except OverflowError:
        raise ValueError("bid must fit in an unsigned 64-bit integer") from None
    return hashlib.sha256(encoded + nonce).digest()


class Ledger:
    """Token balances plus the contract escrow and the burn sink."""

    def __init__(self, balances: dict[str, int] | None = None, nfts: dict[str, str] | None = None):
        self.balances: dict[str, int] = {}
        for account, amount in (balances or {}).items():
            if not isinstance(amount, int) or amount < 0:
                raise ValueError(f"balance of {account!r} must be a non-negative int")
            self.balances[account] = amount
        self.nfts: dict[str, str] = dict(nfts or {})
        self.escrow = 0
        self.burned = 0

    def balance(self, account: str) -> int:
        return self.balances.get(account, 0)

    def total_supply(self) -> int:
        return sum(self.balances.values()) + self.escrow + self.burned

    def lock(self, account: str, amount: int) -> None:
        have = self.balances.get(account, 0)
        if have < amount:
            raise InsufficientFunds(f"{account} holds {have}, needs {amount}")
        self.balances[account] = have - amount
        self.escrow += amount

    def release(self, account: str, amount: int) -> None:
        self.escrow -= amount
        self.balances[account] = self.balances.get(account, 0) + amount

    def burn(self, amount: int) -> None:
        self.escrow -= amount
        self.burned += amount

    def snapshot(self) -> dict:
        return {
            "balances": dict(sorted(self.balances.items())),
            "escrow": self.escrow,
            "burned": self.burned,
            "nfts": dict(sorted(self.nfts.items())),
        }


class Phase(str, enum.Enum):
    COMMIT_OPEN = "CommitOpen"
    REVEAL_OPEN = "RevealOpen"
    AWAITING_TOP_UP = "AwaitingTopUp"
    SETTLED = "Settled"
    EXPIRED = "Expired"


TRANSITIONS = {
    Phase.COMMIT_OPEN: {Phase.REVEAL_OPEN},
    Phase.REVEAL_OPEN: {Phase.AWAITING_TOP_UP, Phase.SETTLED},
    Phase.AWAITING_TOP_UP: {Phase.SETTLED, Phase.EXPIRED},
    Phase.SETTLED: set(),
    Phase.EXPIRED: set(),
}

# phases in which each state-changing operation may succeed
OPERATION_PHASES = {
    "commit": {Phase.COMMIT_OPEN},
    "reveal": {Phase.REVEAL_OPEN},
    "top_up": {Phase.AWAITING_TOP_UP},
    "withdraw": {Phase.SETTLED},
    "claim_refund": {Phase.SETTLED, Phase.EXPIRED},
}


@dataclass(frozen=True)
class ProtocolParams:
    lock: int
    fee_alpha: float = 0.0
    commit_deadline: int = 10
    reveal_deadline: int = 20
    settle_deadline: int = 30

    def __post_init__(self):
        if not isinstance(self.lock, int) or self.lock < 0:
            raise InvalidParams(f"lock must be a non-negative integer, got {self.lock!r}")
        if not (0.0 <= self.fee_alpha < 1.0) or not math.isfinite(self.fee_alpha):
            raise InvalidParams(f"fee_alpha must lie in [0, 1), got {self.fee_alpha!r}")
        if not 0 < self.commit_deadline < self.reveal_deadline < self.settle_deadline:
            raise InvalidParams("deadlines must be positive and strictly increasing")

    def fee(self, amount: int) -> int:
        """``floor(alpha * amount)``, computed exactly on the binary value of alpha."""
        num, den = float(self.fee_alpha).as_integer_ratio()
        return amount * num // den

    def to_dict(self) -> dict:
        return asdict(self)


class Commit:
    __slots__ = ("bidder", "digest", "lock", "bid", "nonce", "refundable", "claimed")

    def __init__(self, bidder: str, digest: bytes, lock: int):
        self.bidder = bidder
        self.digest = digest
        self.lock = lock
        self.bid: Optional[int] = None
        self.nonce: Optional[bytes] = None
        self.refundable = 0
        self.claimed = False

    @property
    def revealed(self) -> bool:
        return self.bid is not None

    def to_dict(self) -> dict:
        return {
            "bidder": self.bidder,
            "digest": self.digest.hex(),
            "lock": self.lock,
            "bid": self.bid,
            "nonce": self.nonce.hex() if self.nonce is not None else None,
            "refundable": self.refundable,
            "claimed": self.claimed,
        }


class Auction:
    """State of one auction. Mutated in place by its operation methods."""

    def __init__(self, seller: str, params: ProtocolParams, ledger: Ledger, token: str = "nft"):
        if not isinstance(params, ProtocolParams):
            raise InvalidParams("params must be a ProtocolParams")
        if ledger.nfts.get(token) != seller:
            raise NotOwner(f"{seller} does not own {token!r}")
        ledger.nfts[token] = CONTRACT
        self.seller = seller
        self.params = params
        self.ledger = ledger
        self.token = token
        self.phase = Phase.COMMIT_OPEN
        self.clock = 0
        self.commits: list[Commit] = []
        self.winner_index: Optional[int] = None
        self.b1: Optional[int] = None
        self.b2: Optional[int] = None
        self.proceeds = 0
        self.amount_due = 0
        self.withdrawn = False
        self.void = False

    @property
    def winner(self) -> Optional[str]:
        if self.winner_index is None:
            return None
        return self.commits[self.winner_index].bidder

    def _require(self, op: str) -> None:
        if self.phase not in OPERATION_PHASES[op]:
            raise WrongPhase(f"{op} not allowed in {self.phase.value}")

    def _commit_of(self, account: str, index: int) -> Commit:
        if not (isinstance(index, int) and 0 <= index < len(self.commits)):
            raise WrongAccount(f"no commit #{index}")
        c = self.commits[index]
        if c.bidder != account:
            raise WrongAccount(f"commit #{index} belongs to {c.bidder}, not {account}")
        return c

    # -- operations ---------------------------------------------------------

    def commit(self, bidder: str, digest: bytes, deposit: int) -> int:
        """Register a sealed bid with its lock. Returns the commit index."""
        self._require("commit")
        if not isinstance(digest, bytes) or len(digest) != 32:
            raise MalformedCommit("digest must be 32 bytes")
        if type(deposit) is not int or deposit != self.params.lock:
            raise WrongDeposit(f"deposit {deposit} != lock {self.params.lock}")
        self.ledger.lock(bidder, deposit)
        self.commits.append(Commit(bidder, digest, deposit))
        return len(self.commits) - 1

    def reveal(self, bidder: str, index: int, bid: int, nonce: bytes) -> None:
        self._require("reveal")
        c = self._commit_of(bidder, index)
        if c.bid is not None:
            raise BadReveal(f"commit #{index} already revealed")
        if not isinstance(bid, int) or not isinstance(nonce, bytes):
            raise BadReveal("bid must be int and nonce bytes")
        try:
            digest = commit_digest(bid, nonce)
        except ValueError as exc:
            raise BadReveal(str(exc)) from None
        if digest != c.digest:
            raise BadReveal(f"opening does not match commit #{index}")
        c.bid = bid
        c.nonce = nonce

    def advance(self, ticks: int) -> None:
        """Move the clock forward and fire every deadline that has passed."""
        if not isinstance(ticks, int) or ticks < 0:
            raise ValueError("ticks must be a non-negative int")
        self.clock += ticks
        p = self.params
        if self.phase is Phase.COMMIT_OPEN and self.clock >= p.commit_deadline:
            self.phase = Phase.REVEAL_OPEN
        if self.phase is Phase.REVEAL_OPEN and self.clock >= p.reveal_deadline:
            self._end_reveal()
        if self.phase is Phase.AWAITING_TOP_UP and self.clock >= p.settle_deadline:
            self._expire()

    def _end_reveal(self) -> None:
        ledger = self.ledger
        best = second = None
        for i, c in enumerate(self.commits):
            if c.bid is None:
                ledger.burn(c.lock)
                continue
            c.refundable = c.lock
            if best is None or c.bid > self.commits[best].bid:
                best, second = i, best
            elif second is None or c.bid > self.commits[second].bid:
                second = i
        if best is None:
            self.void = True
            ledger.nfts[self.token] = self.seller
            self.phase = Phase.SETTLED
            return
        w = self.commits[best]
        self.winner_index = best
        self.b1 = w.bid
        self.b2 = self.commits[second].bid if second is not None else 0
        lock = w.lock
        earmark = min(self.b2, lock)
        self.proceeds = earmark
        w.refundable = lock - earmark
        if self.b2 > lock:
            self.amount_due = self.b2 - lock
            self.phase = Phase.AWAITING_TOP_UP
        else:
            ledger.nfts[self.token] = w.bidder
            self.phase = Phase.SETTLED

    def _expire(self) -> None:
        self.ledger.burn(self.proceeds)
        self.proceeds = 0
        self.amount_due = 0
        self.ledger.nfts[self.token] = self.seller
        self.phase = Phase.EXPIRED

    def top_up(self, account: str, amount: int) -> None:
        self._require("top_up")
        if account != self.winner:
            raise WrongAccount(f"{account} is not the winner")
        if type(amount) is not int or amount != self.amount_due:
            raise WrongAmount(f"top-up {amount} != amount due {self.amount_due}")
        self.ledger.lock(account, amount)
        self.proceeds += amount
        self.amount_due = 0
        self.ledger.nfts[self.token] = account
        self.phase = Phase.SETTLED

    def withdraw(self, account: str) -> int:
        """Pay the seller ``x - g(x)`` and burn the fee ``g(x)``. Returns the payout."""
        self._require("withdraw")
        if account != self.seller:
            raise WrongAccount(f"{account} is not the seller")
        if self.withdrawn:
            raise AlreadyWithdrawn("seller proceeds already withdrawn")
        x = self.proceeds
        fee = self.params.fee(x)
        self.ledger.burn(fee)
        self.ledger.release(account, x - fee)
        self.withdrawn = True
        return x - fee

    def claim_refund(self, bidder: str, index: int) -> int:
        """Return the refundable part of a revealed commit's lock."""
        self._require("claim_refund")
        c = self._commit_of(bidder, index)
        if c.bid is None:
            raise NotRevealed(f"commit #{index} was never revealed; its lock was removed")
        if c.claimed:
            raise AlreadyClaimed(f"commit #{index} already claimed")
        if index == self.winner_index and self.phase is Phase.EXPIRED:
            raise NothingToClaim("the winner forfeited the lock")
        amount = c.refundable
        if amount == 0:
            raise NothingToClaim(f"commit #{index} has nothing to refund")
        self.ledger.release(bidder, amount)
        c.claimed = True
        c.refundable = 0
        return amount

    # -- inspection ---------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "seller": self.seller,
            "token": self.token,
            "params": self.params.to_dict(),
            "phase": self.phase.value,
            "clock": self.clock,
            "commits": [c.to_dict() for c in self.commits],
            "winner": self.winner,
            "winner_index": self.winner_index,
            "b1": self.b1,
            "b2": self.b2,
            "proceeds": self.proceeds,
            "amount_due": self.amount_due,
            "withdrawn": self.withdrawn,
            "void": self.void,
            "ledger": self.ledger.snapshot(),
            "total_supply": self.ledger.total_supply(),
        }


def create_auction(seller: str, params: ProtocolParams, ledger: Ledger, token: str = "nft") -> Auction:
    """Escrow ``token`` and open the commit phase."""
    return Auction(seller, params, ledger, token)
