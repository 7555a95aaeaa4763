"""One auction from commit to settlement, printing the ledger at every step.

Four bidders commit sealed bids with a 1-token lock. Dave never reveals, so
his lock is burned. Alice wins, tops up to the second price and the seller
withdraws the proceeds minus the burned fee.

    python demos/protocol_walkthrough.py
"""

import secrets

from auction_lab import Ledger, ProtocolParams, commit_digest, create_auction
from auction_lab.protocol import TOKEN_UNIT, to_units


def show(label, auction):
    led = auction.ledger
    tokens = {k: v / TOKEN_UNIT for k, v in sorted(led.balances.items())}
    print(f"[t={auction.clock:2d} {auction.phase.value:<13}] {label}")
    print(f"    balances {tokens}")
    print(f"    escrow {led.escrow / TOKEN_UNIT}  burned {led.burned / TOKEN_UNIT}  item -> {led.nfts['punk-42']}")


params = ProtocolParams(lock=to_units(1.0), fee_alpha=0.1, commit_deadline=10, reveal_deadline=20, settle_deadline=30)
ledger = Ledger({"seller": 0, "alice": to_units(10), "bob": to_units(10), "carol": to_units(10), "dave": to_units(5)}, {"punk-42": "seller"})
auction = create_auction("seller", params, ledger, "punk-42")
show("auction created", auction)

bids = {"alice": 5.0, "bob": 3.0, "carol": 0.5, "dave": 4.0}
openings = {}
for who, bid in bids.items():
    nonce = secrets.token_bytes(16)
    units = to_units(bid)
    idx = auction.commit(who, commit_digest(units, nonce), params.lock)
    openings[who] = (idx, units, nonce)
show("four sealed bids committed, one lock each", auction)

auction.advance(params.commit_deadline - auction.clock)
for who, (idx, units, nonce) in openings.items():
    if who != "dave":
        auction.reveal(who, idx, units, nonce)
auction.advance(params.reveal_deadline - auction.clock)
show(f"reveal closed: winner {auction.winner}, B1={auction.b1 / TOKEN_UNIT}, B2={auction.b2 / TOKEN_UNIT}", auction)

due = auction.amount_due
auction.top_up("alice", due)
show(f"alice topped up {due / TOKEN_UNIT} (B2 minus her lock)", auction)
payout = auction.withdraw("seller")
show(f"seller withdrew {payout / TOKEN_UNIT} (fee {params.fee(auction.proceeds) / TOKEN_UNIT} burned)", auction)
for who in ("bob", "carol"):
    idx = openings[who][0]
    auction.claim_refund(who, idx)
show("losers reclaimed their locks; dave's lock stays burned", auction)
print(f"\ntotal supply conserved: {ledger.total_supply() == to_units(35)}")
