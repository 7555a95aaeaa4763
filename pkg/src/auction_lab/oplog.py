"""Line-delimited JSON operation logs for the auction contract.

Each line is ``{"tick": int, "op": str, "account": str | null, "args": {...}}``.
Bytes (digests, nonces) are hex strings. A log opens with a ``genesis``
record that funds the ledger, then ``create_auction``; every following
record is one contract operation. Replaying a log advances the clock to
each record's tick before applying it, so explicit ``advance`` records are
optional.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Optional

from .errors import ProtocolError
from .protocol import Auction, Ledger, ProtocolParams, create_auction


class ReplayError(Exception):
    def __init__(self, line_no: int, record: Any, cause: Exception):
        super().__init__(f"line {line_no}: {type(cause).__name__}: {cause}")
        self.line_no = line_no
        self.record = record
        self.cause = cause


class Session:
    """A ledger plus one auction, recording every successful operation."""

    def __init__(self):
        self.ledger: Optional[Ledger] = None
        self.auction: Optional[Auction] = None
        self.records: list[dict] = []

    @property
    def clock(self) -> int:
        return self.auction.clock if self.auction is not None else 0

    def _record(self, tick, op, account, args):
        self.records.append({"tick": tick, "op": op, "account": account, "args": args})

    def genesis(self, balances: dict[str, int], nfts: dict[str, str]) -> None:
        if self.ledger is not None:
            raise ProtocolError("ledger already created")
        self.ledger = Ledger(balances, nfts)
        self._record(0, "genesis", None, {"balances": dict(balances), "nfts": dict(nfts)})

    def create_auction(self, seller: str, params: ProtocolParams, token: str = "nft") -> Auction:
        if self.ledger is None:
            raise ProtocolError("genesis must come first")
        if self.auction is not None:
            raise ProtocolError("auction already created")
        self.auction = create_auction(seller, params, self.ledger, token)
        self._record(0, "create_auction", seller, {"params": params.to_dict(), "token": token})
        return self.auction

    def _auction(self) -> Auction:
        if self.auction is None:
            raise ProtocolError("no auction has been created")
        return self.auction

    def commit(self, bidder: str, digest: bytes, deposit: int) -> int:
        a = self._auction()
        idx = a.commit(bidder, digest, deposit)
        self._record(a.clock, "commit", bidder, {"digest": digest.hex(), "deposit": deposit})
        return idx

    def advance(self, ticks: int) -> None:
        a = self._auction()
        tick = a.clock
        a.advance(ticks)
        self._record(tick, "advance", None, {"ticks": ticks})

    def reveal(self, bidder: str, index: int, bid: int, nonce: bytes) -> None:
        a = self._auction()
        a.reveal(bidder, index, bid, nonce)
        self._record(a.clock, "reveal", bidder, {"index": index, "bid": bid, "nonce": nonce.hex()})

    def top_up(self, account: str, amount: int) -> None:
        a = self._auction()
        a.top_up(account, amount)
        self._record(a.clock, "top_up", account, {"amount": amount})

    def withdraw(self, account: str) -> int:
        a = self._auction()
        paid = a.withdraw(account)
        self._record(a.clock, "withdraw", account, {})
        return paid

    def claim_refund(self, bidder: str, index: int) -> int:
        a = self._auction()
        amount = a.claim_refund(bidder, index)
        self._record(a.clock, "claim_refund", bidder, {"index": index})
        return amount

    def state(self) -> dict:
        """Deterministic dump of the current ledger and auction state."""
        out: dict[str, Any] = {"ledger": self.ledger.snapshot() if self.ledger else None}
        if self.auction is not None:
            out["auction"] = self.auction.snapshot()
        if self.ledger is not None:
            out["total_supply"] = self.ledger.total_supply()
            out["genesis_supply"] = sum(self.records[0]["args"]["balances"].values())
            out["conserved"] = out["total_supply"] == out["genesis_supply"]
        return out

    def dumps(self) -> str:
        return dumps_records(self.records)


def dumps_records(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def loads_records(text: str) -> list[dict]:
    out = []
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ReplayError(line_no, line, exc) from None
    return out


def apply_record(session: Session, record: dict) -> None:
    """Apply one log record to ``session``."""
    if not isinstance(record, dict) or "op" not in record:
        raise ValueError("record must be an object with an 'op' field")
    op = record["op"]
    account = record.get("account")
    args = record.get("args") or {}
    tick = int(record.get("tick", 0))
    if session.auction is not None and op not in ("genesis", "create_auction", "advance"):
        if tick < session.auction.clock:
            raise ValueError(f"tick {tick} is behind the clock {session.auction.clock}")
        if tick > session.auction.clock:
            session.advance(tick - session.auction.clock)
    if op == "genesis":
        session.genesis({k: int(v) for k, v in args["balances"].items()}, dict(args.get("nfts", {})))
    elif op == "create_auction":
        session.create_auction(account, ProtocolParams(**args["params"]), args.get("token", "nft"))
    elif op == "commit":
        session.commit(account, bytes.fromhex(args["digest"]), args["deposit"])
    elif op == "advance":
        session.advance(args["ticks"])
    elif op == "reveal":
        session.reveal(account, args["index"], args["bid"], bytes.fromhex(args["nonce"]))
    elif op == "top_up":
        session.top_up(account, args["amount"])
    elif op == "withdraw":
        session.withdraw(account)
    elif op == "claim_refund":
        session.claim_refund(account, args["index"])
    else:
        raise ValueError(f"unknown op {op!r}")


def replay(records: Iterable[dict]) -> Session:
    """Rebuild a session from records; raises :class:`ReplayError` on the first rejected one."""
    session = Session()
    for line_no, record in enumerate(records, 1):
        try:
            apply_record(session, record)
        except (ProtocolError, ValueError, KeyError, TypeError) as exc:
            raise ReplayError(line_no, record, exc) from exc
    return session
