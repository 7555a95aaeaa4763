"""Laboratory for a commit-reveal single-item NFT auction.

Modules:

- :mod:`~auction_lab.mechanism` -- (allocation, payment, removal) mechanisms and utilities
- :mod:`~auction_lab.protocol` -- the commit-reveal contract over an integer token ledger
- :mod:`~auction_lab.distributions` -- valuation distributions and order statistics
- :mod:`~auction_lab.params` -- lock amount and fee coefficient
- :mod:`~auction_lab.simulation` -- Monte Carlo seller strategies and fake-bid analysis
- :mod:`~auction_lab.properties` -- brute-force incentive checks
"""

from .distributions import (
    Exponential,
    LogNormal,
    OrderStatistics,
    ShiftedExponential,
    Uniform,
    distribution_from_dict,
    expected_b1,
    expected_b2,
    hazard_ratio_sup,
    sample_valuations,
)
from .errors import (
    AuctionLabError,
    ConfigError,
    DegenerateDistribution,
    GridTooLarge,
    MechanismViolation,
    NumericalFailure,
    ProtocolError,
    UnboundedHazard,
)
from .mechanism import Coalition, Mechanism, evaluate, joint_utility, make_named_mechanism
from .params import break_even_lock, fee_alpha, lock_bound_asymptotic, lock_bound_exact, repeated_auction_check
from .protocol import Auction, Ledger, Phase, ProtocolParams, commit_digest, create_auction
from .simulation import (
    SellerStrategy,
    SimConfig,
    SimReport,
    best_fake_set_search,
    fake_bid_utility_closed_form,
    repeated_auction_utility,
    run,
)

__version__ = "0.1.0"
