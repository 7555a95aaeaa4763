"""Scripted contract sessions shared by the golden-file tests.

``settled_session`` runs every step up to a normal settlement: four
commits, one of them never opened, a top-up by the winner, the seller's
withdrawal and the losers' refunds. ``expired_session`` stops after the
reveal phase: the winner never tops up and forfeits the earmarked lock.
"""

from auction_lab.oplog import Session
from auction_lab.protocol import ProtocolParams, commit_digest

TOKEN = 1_000_000
PARAMS = ProtocolParams(lock=1 * TOKEN, fee_alpha=0.1, commit_deadline=10, reveal_deadline=20, settle_deadline=30)


def nonce(k: int) -> bytes:
    return bytes([k]) * 16


def settled_session() -> Session:
    s = Session()
    s.genesis({"seller": 0, "alice": 10 * TOKEN, "bob": 10 * TOKEN, "carol": 10 * TOKEN, "dave": 5 * TOKEN}, {"punk-42": "seller"})
    s.create_auction("seller", PARAMS, "punk-42")
    bids = {"alice": 5 * TOKEN, "bob": 3 * TOKEN, "carol": TOKEN // 2, "dave": 4 * TOKEN}
    idx = {}
    for k, (who, bid) in enumerate(bids.items()):
        s.advance(1)
        idx[who] = s.commit(who, commit_digest(bid, nonce(k + 1)), PARAMS.lock)
    s.advance(PARAMS.commit_deadline - s.clock)
    for k, who in enumerate(bids):
        if who == "dave":
            continue
        s.reveal(who, idx[who], bids[who], nonce(k + 1))
    s.advance(PARAMS.reveal_deadline - s.clock)
    s.top_up("alice", s.auction.amount_due)
    s.advance(2)
    s.withdraw("seller")
    s.claim_refund("bob", idx["bob"])
    s.claim_refund("carol", idx["carol"])
    return s


def expired_session() -> Session:
    s = Session()
    s.genesis({"seller": 0, "alice": 10 * TOKEN, "bob": 10 * TOKEN}, {"punk-42": "seller"})
    s.create_auction("seller", PARAMS, "punk-42")
    ia = s.commit("alice", commit_digest(5 * TOKEN, nonce(1)), PARAMS.lock)
    ib = s.commit("bob", commit_digest(3 * TOKEN, nonce(2)), PARAMS.lock)
    s.advance(PARAMS.commit_deadline)
    s.reveal("alice", ia, 5 * TOKEN, nonce(1))
    s.reveal("bob", ib, 3 * TOKEN, nonce(2))
    s.advance(PARAMS.settle_deadline - s.clock)
    s.claim_refund("bob", ib)
    return s


def state_dump(session: Session) -> str:
    import json

    return json.dumps(session.state(), indent=2, sort_keys=True) + "\n"
