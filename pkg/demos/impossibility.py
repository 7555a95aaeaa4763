"""Brute-force incentive checks on a small discrete instance.

Every named mechanism plus a batch of random ones is checked for bidder
incentive compatibility, seller incentive compatibility against fake bids,
and resistance to a coalition of the seller with some bidders. No mechanism
that passes the bidder and coalition checks raises revenue.

    python demos/impossibility.py
"""

from auction_lab import evaluate, make_named_mechanism
from auction_lab.properties import DiscreteInstance, impossibility_experiment

instance = DiscreteInstance(bid_grid=(0, 1, 2, 3), n=3)
report = impossibility_experiment(instance, random_count=40, seed=1)
print(report.to_table())

# the coalition deviation that sinks the burning second-price auction
mech = make_named_mechanism("SecondPriceFullRemoval")
vals = (1, 1)
truthful = evaluate(mech, vals, vals)
colluding = evaluate(mech, (1, 0), vals)
print("second price with every payment burned, values (1, 1):")
print(f"  truthful bids (1, 1): joint seller+bidders utility {sum(truthful.bidder_utilities) + truthful.seller_utility}")
print(f"  coalition bids (1, 0): joint seller+bidders utility {sum(colluding.bidder_utilities) + colluding.seller_utility}")
