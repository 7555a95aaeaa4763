"""Monte Carlo harness: truthful bidders against configurable sellers.

Every replication samples a valuation vector from the stream
``(master_seed, replication)``, plays the full contract on a fresh ledger
and reads utilities off the ledger. Honest bidders bid their value in
integer units. The seller acts through its own account plus pseudonyms
``seller~0``, ``seller~1``, ... that place the fake commits after the
honest bidders, so ties go to the honest bid.

Seller utility is the net change of all seller-controlled balances. The
item has no value to the seller, so winning it back with a fake bid counts
for nothing. Losers never need to claim their lock back for the metrics
here, so that step is skipped to keep replications cheap.
"""

from __future__ import annotations

import csv
from hashlib import sha256
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import jsonschema
import numpy as np

from .distributions import (
    DISTRIBUTION_SCHEMA,
    Distribution,
    OrderStatistics,
    distribution_from_dict,
    random_stream,
)
from .errors import ConfigError, GridTooLarge, NumericalFailure, ProtocolError
from .params import fee_alpha, lock_bound_exact
from .protocol import (
    MAX_BID,
    TOKEN_UNIT,
    Auction,
    Ledger,
    Phase,
    ProtocolParams,
    commit_digest,
    to_units,
)
from .quadrature import DEFAULT_TOL, adaptive_simpson_pieces, power_grid
from .textio import dumps_json, fmt

SELLER = "seller"
Z95 = 1.96
CHUNK = 2048
MAX_FAKE_GRID = 12

HONEST = "honest"
FAKE_BID_SET = "fake_bid_set"
SINGLE_FAKE_BID = "single_fake_bid"
REPEATED_AUCTION = "repeated_auction"
STRATEGY_KINDS = (HONEST, FAKE_BID_SET, SINGLE_FAKE_BID, REPEATED_AUCTION)

REVEAL_BELOW_B1 = "below_b1"
REVEAL_ALL = "all"
REVEAL_NONE = "none"
REVEAL_POLICIES = (REVEAL_BELOW_B1, REVEAL_ALL, REVEAL_NONE)


def _pseudonym(k: int) -> str:
    return f"{SELLER}~{k}"


@dataclass(frozen=True)
class SellerStrategy:
    """How the seller plays.

    ``bids`` holds the fake bids in tokens for ``fake_bid_set``; a
    ``single_fake_bid`` is the same with one bid. ``epsilon`` is the
    undercut of the relisting fake bid for ``repeated_auction``.
    """

    kind: str = HONEST
    bids: tuple[float, ...] = ()
    epsilon: float = 0.0
    reveal_policy: str = REVEAL_BELOW_B1

    def __post_init__(self):
        object.__setattr__(self, "bids", tuple(float(b) for b in self.bids))
        if self.kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy {self.kind!r}")
        if self.reveal_policy not in REVEAL_POLICIES:
            raise ConfigError(f"unknown reveal policy {self.reveal_policy!r}")
        if any(not (b >= 0 and math.isfinite(b)) for b in self.bids):
            raise ConfigError("fake bids must be finite and non-negative")
        if self.kind == SINGLE_FAKE_BID and len(self.bids) != 1:
            raise ConfigError("single_fake_bid takes exactly one bid")
        if self.kind in (HONEST, REPEATED_AUCTION) and self.bids:
            raise ConfigError(f"{self.kind} takes no fake bids")
        if self.kind == REPEATED_AUCTION and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")

    @classmethod
    def honest(cls) -> "SellerStrategy":
        return cls(HONEST)

    @classmethod
    def fake_bid_set(cls, bids: Sequence[float], reveal_policy: str = REVEAL_BELOW_B1) -> "SellerStrategy":
        return cls(FAKE_BID_SET, tuple(bids), reveal_policy=reveal_policy)

    @classmethod
    def single_fake_bid(cls, s: float, reveal_policy: str = REVEAL_BELOW_B1) -> "SellerStrategy":
        return cls(SINGLE_FAKE_BID, (s,), reveal_policy=reveal_policy)

    @classmethod
    def repeated_auction(cls, epsilon: float) -> "SellerStrategy":
        return cls(REPEATED_AUCTION, epsilon=epsilon)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "reveal_policy": self.reveal_policy}
        if self.bids:
            out["bids"] = list(self.bids)
        if self.kind == REPEATED_AUCTION:
            out["epsilon"] = self.epsilon
        return out


_LOCK_SPEC = {"oneOf": [{"type": "number", "minimum": 0}, {"enum": ["exact", "break_even"]}]}

SIM_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "dist": DISTRIBUTION_SCHEMA,
        "n": {"type": "integer", "minimum": 1},
        "params": {
            "type": "object",
            "properties": {
                "lock": _LOCK_SPEC,
                "fee_alpha": {"oneOf": [{"type": "number", "minimum": 0, "exclusiveMaximum": 1}, {"const": "auto"}]},
                "commit_deadline": {"type": "integer"},
                "reveal_deadline": {"type": "integer"},
                "settle_deadline": {"type": "integer"},
            },
            "required": ["lock"],
            "additionalProperties": False,
        },
        "strategy": {
            "type": "object",
            "properties": {
                "kind": {"enum": list(STRATEGY_KINDS)},
                "bids": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "s": {"type": "number", "minimum": 0},
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "reveal_policy": {"enum": list(REVEAL_POLICIES)},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "replications": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
    "required": ["dist", "n", "params", "replications", "master_seed"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class SimConfig:
    dist: Distribution
    n: int
    params: ProtocolParams
    strategy: SellerStrategy = field(default_factory=SellerStrategy)
    replications: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("need at least one honest bidder")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, spec: dict) -> "SimConfig":
        """Build from JSON. Amounts are in tokens; ``"lock": "exact"`` and
        ``"fee_alpha": "auto"`` compute the parameters for ``(dist, n)``."""
        try:
            jsonschema.validate(spec, SIM_CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid simulation config at {path}: {exc.message}") from None
        dist = distribution_from_dict(spec["dist"])
        n = spec["n"]
        p = dict(spec["params"])
        lock = p.pop("lock")
        if lock == "exact":
            lock = lock_bound_exact(dist, n).L_exact
        elif lock == "break_even":
            from .params import break_even_lock

            lock = break_even_lock(dist, n).value
        if not math.isfinite(lock):
            raise ConfigError(f"no finite lock for {dist!r}, n={n}")
        alpha = p.pop("fee_alpha", 0.0)
        if alpha == "auto":
            alpha = fee_alpha(dist, n).alpha
        try:
            params = ProtocolParams(lock=to_units(lock), fee_alpha=float(alpha), **p)
        except ProtocolError as exc:
            raise ConfigError(f"invalid protocol parameters: {exc}") from None
        st = dict(spec.get("strategy", {"kind": HONEST}))
        if "s" in st:
            st["bids"] = [st.pop("s")]
        strategy = SellerStrategy(
            st["kind"], tuple(st.get("bids", ())), st.get("epsilon", 0.0), st.get("reveal_policy", REVEAL_BELOW_B1)
        )
        return cls(dist, n, params, strategy, spec["replications"], spec["master_seed"])

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(spec)

    def to_dict(self) -> dict:
        params = self.params.to_dict()
        params["lock"] = params["lock"] / TOKEN_UNIT
        return {
            "dist": self.dist.to_dict(),
            "n": self.n,
            "params": params,
            "strategy": self.strategy.to_dict(),
            "replications": self.replications,
            "master_seed": self.master_seed,
        }


REPORT_FIELDS = (
    "strategy",
    "n",
    "lock",
    "fee_alpha",
    "replications",
    "master_seed",
    "mean_seller_utility",
    "ci_halfwidth_95",
    "mean_honest_seller_utility",
    "mean_gain_vs_honest",
    "gain_ci_halfwidth_95",
    "mean_winner_utility",
    "winner_ci_halfwidth_95",
    "mean_revenue_ratio",
    "revenue_ratio_ci_halfwidth_95",
    "burn_total_mean",
    "e_b2",
)


@dataclass(frozen=True)
class SimReport:
    """Means and 95% half-widths over the replications. Amounts in tokens.

    ``mean_gain_vs_honest`` pairs each replication with an honest seller on
    the same valuations. Deviations are only checked over the configured
    strategy, not over all strategies.
    """

    strategy: str
    n: int
    lock: float
    fee_alpha: float
    replications: int
    master_seed: int
    mean_seller_utility: float
    ci_halfwidth_95: float
    mean_honest_seller_utility: float
    mean_gain_vs_honest: float
    gain_ci_halfwidth_95: float
    mean_winner_utility: float
    winner_ci_halfwidth_95: float
    mean_revenue_ratio: float
    revenue_ratio_ci_halfwidth_95: float
    burn_total_mean: float
    e_b2: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def csv_row(self) -> list:
        d = self.to_dict()
        return [fmt(d[k]) for k in REPORT_FIELDS]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        w.writerow(self.csv_row())
        return buf.getvalue()


def mean_ci(x: np.ndarray) -> tuple[float, float]:
    """Sample mean and ``1.96 * sd / sqrt(n)``; the half-width is 0 for one sample."""
    x = np.asarray(x, dtype=float)
    m = float(np.mean(x))
    if x.size < 2:
        return m, 0.0
    return m, Z95 * float(np.std(x, ddof=1)) / math.sqrt(x.size)


# -- one protocol execution -------------------------------------------------


@dataclass
class Play:
    """Ledger deltas of one execution, in integer units."""

    seller: int
    winner: Optional[str]
    winner_paid: int
    burned: int
    b1: Optional[int]
    b2: Optional[int]
    bidder_deltas: dict = field(default_factory=dict)


def play_auction(
    params: ProtocolParams,
    bids: Sequence[int],
    fakes: Sequence[int] = (),
    reveal_policy: str = REVEAL_BELOW_B1,
    rng: Optional[np.random.Generator] = None,
    skip_loser_claims: bool = True,
) -> Play:
    """Run one auction: honest ``bids`` as bidders ``b0..``, ``fakes`` as seller pseudonyms.

    Every party follows the protocol to the end: the winner tops up, the
    seller withdraws, and the winner and the pseudonyms claim their refunds.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    L = params.lock
    top = max(list(bids) + list(fakes) + [0])
    balances = {f"b{i}": b + L for i, b in enumerate(bids)}
    for k in range(len(fakes)):
        balances[_pseudonym(k)] = top + L
    balances[SELLER] = 0
    ledger = Ledger(balances, {"nft": SELLER})
    seller_accounts = [SELLER] + [_pseudonym(k) for k in range(len(fakes))]
    seller_start = sum(ledger.balances[a] for a in seller_accounts)

    auction = Auction(SELLER, params, ledger)
    accounts = [f"b{i}" for i in range(len(bids))] + seller_accounts[1:]
    amounts = list(bids) + list(fakes)
    pool = rng.bytes(16 * len(amounts))
    openings = []
    for j, (account, b) in enumerate(zip(accounts, amounts)):
        nonce = pool[16 * j : 16 * j + 16]
        # same encoding as commit_digest; amounts are already valid 64-bit ints
        auction.commit(account, sha256(b.to_bytes(8, "big") + nonce).digest(), L)
        openings.append((account, b, nonce))

    auction.advance(params.commit_deadline - auction.clock)
    b1_honest = max(bids) if len(bids) else -1
    for idx, (account, b, nonce) in enumerate(openings):
        if idx >= len(bids):
            if reveal_policy == REVEAL_NONE or (reveal_policy == REVEAL_BELOW_B1 and b > b1_honest):
                continue
        auction.reveal(account, idx, b, nonce)

    auction.advance(params.reveal_deadline - auction.clock)
    winner = auction.winner
    winner_start = ledger.balances.get(winner, 0) + (L if winner is not None else 0)
    if auction.phase is Phase.AWAITING_TOP_UP:
        auction.top_up(winner, auction.amount_due)
    if auction.phase is Phase.SETTLED and not auction.void:
        auction.withdraw(SELLER)
    for idx, c in enumerate(auction.commits):
        if c.refundable and (c.bidder.startswith(SELLER) or idx == auction.winner_index or not skip_loser_claims):
            auction.claim_refund(c.bidder, idx)
    seller_end = sum(ledger.balances[a] for a in seller_accounts)
    winner_paid = winner_start - ledger.balances.get(winner, 0) if winner is not None else 0
    deltas = {}
    if not skip_loser_claims:
        deltas = {f"b{i}": ledger.balances[f"b{i}"] - b - L for i, b in enumerate(bids)}
    return Play(seller_end - seller_start, winner, winner_paid, ledger.burned, auction.b1, auction.b2, deltas)


def bidder_utility(value: int, play: Play, account: str, paid: int) -> int:
    return (value if play.winner == account else 0) - paid


# -- Monte Carlo driver ----------------------------------------------------------------


def _chunks(total: int, size: int = CHUNK):
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def _parallel_rows(fn, total: int, workers: int) -> np.ndarray:
    """Evaluate ``fn(start, stop) -> array`` over fixed chunks and stack them in order."""
    chunks = _chunks(total)
    if workers <= 1 or len(chunks) == 1:
        parts = [fn(a, b) for a, b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), chunks))
    return np.concatenate(parts, axis=0)


def _units(values: np.ndarray) -> list[int]:
    return [to_units(float(v)) for v in values]


def _replicate(config: SimConfig, index: int) -> tuple[float, float, float, float]:
    """(seller, honest seller, winner, burned) in tokens for one replication."""
    rng = random_stream(config.master_seed, index)
    vals = config.dist.sample(config.n, rng)
    bids = _units(vals)
    params = config.params
    st = config.strategy
    honest_seller = _honest_proceeds(params, bids)

    if st.kind == REPEATED_AUCTION:
        seller, play = _repeated_attack(params, bids, max(1, to_units(st.epsilon)), rng)
        return seller / TOKEN_UNIT, honest_seller / TOKEN_UNIT, 0.0, play.burned / TOKEN_UNIT

    fakes = [to_units(b) for b in st.bids]
    play = play_auction(params, bids, fakes, st.reveal_policy, rng)
    winner_util = 0.0
    if play.winner is not None and not play.winner.startswith(SELLER):
        w = int(play.winner[1:])
        winner_util = (bidder_utility(bids[w], play, play.winner, play.winner_paid)) / TOKEN_UNIT
    return play.seller / TOKEN_UNIT, honest_seller / TOKEN_UNIT, winner_util, play.burned / TOKEN_UNIT


def _honest_proceeds(params: ProtocolParams, bids: Sequence[int]) -> int:
    """Seller payout with no fake bids: ``b2 - g(b2)``."""
    if len(bids) < 2:
        return 0
    b2 = sorted(bids)[-2]
    return b2 - params.fee(b2)


def _first_round(params: ProtocolParams, bids: Sequence[int]) -> Play:
    """Outcome of the buy-back round without running it: the pseudonym pays ``B1`` to
    its own seller, so the seller side loses exactly the fee and nothing else moves."""
    b1 = max(bids)
    fee = params.fee(b1)
    return Play(-fee, _pseudonym(0), b1, fee, MAX_BID, b1)


def _repeated_attack(
    params: ProtocolParams, bids: Sequence[int], eps: int, rng, play_first: bool = False
) -> tuple[int, Play]:
    """Buy the item with an unbeatable fake bid, then relist it with a fake bid ``B1 - eps``.

    Round one is settled by arithmetic unless ``play_first``; the two agree
    (checked in the tests) and skipping the protocol run halves the cost.
    """
    if play_first:
        first = play_auction(params, bids, [MAX_BID], REVEAL_ALL, rng)
    else:
        first = _first_round(params, bids)
    b1 = max(bids)
    second = play_auction(params, bids, [max(b1 - eps, 0)], REVEAL_BELOW_B1, rng)
    burned = Play(0, None, 0, first.burned + second.burned, None, None)
    return first.seller + second.seller, burned


def run(config: SimConfig, workers: int = 1) -> SimReport:
    """Play ``config.replications`` auctions and summarise the utilities.

    The result does not depend on ``workers``: replication ``i`` always uses
    stream ``(master_seed, i)`` and the rows are reduced in index order.
    """
    if not isinstance(config, SimConfig):
        raise ConfigError("run() needs a SimConfig")

    def block(a, b):
        return np.array([_replicate(config, i) for i in range(a, b)], dtype=float).reshape(-1, 4)

    rows = _parallel_rows(block, config.replications, workers)
    seller, honest, winner, burned = rows.T
    e_b2 = OrderStatistics(config.dist, config.n).expected_b2() if config.n >= 2 else 0.0
    m_s, ci_s = mean_ci(seller)
    m_h, _ = mean_ci(honest)
    m_g, ci_g = mean_ci(seller - honest)
    m_w, ci_w = mean_ci(winner)
    ratio = m_s / e_b2 if e_b2 > 0 else math.nan
    ratio_ci = ci_s / e_b2 if e_b2 > 0 else math.nan
    return SimReport(
        strategy=config.strategy.kind,
        n=config.n,
        lock=config.params.lock / TOKEN_UNIT,
        fee_alpha=config.params.fee_alpha,
        replications=config.replications,
        master_seed=config.master_seed,
        mean_seller_utility=m_s,
        ci_halfwidth_95=ci_s,
        mean_honest_seller_utility=m_h,
        mean_gain_vs_honest=m_g,
        gain_ci_halfwidth_95=ci_g,
        mean_winner_utility=m_w,
        winner_ci_halfwidth_95=ci_w,
        mean_revenue_ratio=ratio,
        revenue_ratio_ci_halfwidth_95=ratio_ci,
        burn_total_mean=float(np.mean(burned)),
        e_b2=e_b2,
    )


# -- fake bids in closed form -------------------------------------------------------------


class _LowerIntegral:
    """``K(c) = n int_0^c F^(n-1)``, cached per ``c``."""

    def __init__(self, dist: Distribution, n: int, tol: float):
        self.dist, self.n, self.tol = dist, n, tol
        self._cache: dict[float, float] = {}

    def __call__(self, c: float) -> float:
        if c in self._cache:
            return self._cache[c]
        dist, n = self.dist, self.n
        lo = max(dist.lower, 0.0)
        if n == 1:
            # B2 is 0, so the whole fake bid is gained
            value = max(c, 0.0)
        elif c <= lo:
            value = 0.0
        else:
            cdf = dist.cdf
            try:
                Fc = cdf(c)
                cuts = [x for x in (dist.quantile(Fc * u) for u in power_grid(n)) if lo < x < c]
                value = n * adaptive_simpson_pieces(lambda y: cdf(y) ** (n - 1), [lo, *cuts, c], tol=self.tol / n)
            except NumericalFailure as exc:
                raise NumericalFailure(f"fake-bid integral up to {c!r} for {dist!r}, n={n}: {exc}") from None
        self._cache[c] = value
        return value


def fake_bid_utility_closed_form(
    dist: Distribution,
    n: int,
    L: float,
    S: Sequence[float],
    tol: float = DEFAULT_TOL,
    _K: Optional[_LowerIntegral] = None,
) -> float:
    """Expected gain from fake bids ``S`` against ``n`` truthful bidders.

    ``E max{0, max{s in S: s <= B1} - B2} - L * sum_s F(s)^n``. The first
    term splits on which fake bid is the largest one below ``B1``: for
    sorted ``s_1 < ... < s_k`` it equals
    ``sum_j (F(s_(j+1)) - F(s_j)) * K(s_j)`` with ``F(s_(k+1)) = 1`` and
    ``K(c) = int_0^c (c - y) dPr(B2 <= y, B1 >= c) / Pr(B1 >= c)``, which
    integrates by parts to ``n int_0^c F^(n-1)``. No fee is charged.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if any(not (s >= 0 and math.isfinite(s)) for s in S):
        raise ConfigError("fake bids must be finite and non-negative")
    if not S:
        return 0.0
    K = _K if _K is not None else _LowerIntegral(dist, n, tol)
    cdf = dist.cdf
    pts = sorted(set(float(s) for s in S))
    F = [cdf(s) for s in pts] + [1.0]
    gain = math.fsum((F[j + 1] - F[j]) * K(pts[j]) for j in range(len(pts)))
    cost = L * math.fsum(cdf(s) ** n for s in S)
    return gain - cost


def enumerate_fake_sets(
    dist: Distribution,
    n: int,
    L: float,
    candidate_grid: Sequence[float],
    max_size: int,
    tol: float = DEFAULT_TOL,
) -> dict[tuple[float, ...], float]:
    """Closed-form utility of every non-empty subset of the grid up to ``max_size``."""
    grid = sorted(set(float(g) for g in candidate_grid))
    if len(grid) > MAX_FAKE_GRID:
        raise GridTooLarge(f"candidate grid has {len(grid)} points; at most {MAX_FAKE_GRID} allowed")
    if not 0 <= max_size <= len(grid):
        raise ConfigError("max_size must lie between 0 and the grid size")
    K = _LowerIntegral(dist, n, tol)
    out = {}
    for size in range(1, max_size + 1):
        for subset in itertools.combinations(grid, size):
            out[subset] = fake_bid_utility_closed_form(dist, n, L, subset, tol, K)
    return out


def best_fake_set_search(
    dist: Distribution,
    n: int,
    L: float,
    candidate_grid: Sequence[float],
    max_size: int,
    tol: float = DEFAULT_TOL,
) -> tuple[tuple[float, ...], float]:
    """Exhaustive argmax over non-empty fake-bid sets. Returns ``((), 0.0)`` if ``max_size`` is 0."""
    table = enumerate_fake_sets(dist, n, L, candidate_grid, max_size, tol)
    if not table:
        return (), 0.0
    # first maximum in enumeration order: smaller sets win ties
    best = max(table, key=table.__getitem__)
    return best, table[best]


# -- repeated auction ---------------------------------------------------------------------


@dataclass(frozen=True)
class RepeatedAuctionResult:
    honest_mean: float
    honest_ci: float
    attack_mean: float
    attack_ci: float
    diff_mean: float
    diff_ci: float
    replications: int

    def to_dict(self) -> dict:
        return asdict(self)


def repeated_auction_utility(
    dist: Distribution,
    n: int,
    alpha: float,
    epsilon: float,
    reps: int,
    seed: int,
    lock: float = 0.0,
    workers: int = 1,
) -> RepeatedAuctionResult:
    """Honest seller versus one who buys the item and relists it, same valuations in both rounds.

    Honest proceeds are ``B2 - g(B2)``, which is what an honest run pays out.
    The attack runs two full executions: a fake bid above everyone takes the
    item at price ``B1`` (the fee on it is lost), then a relisting with a
    fake bid ``B1 - epsilon`` sells it at about ``B1``.
    """
    if n < 2:
        raise ConfigError("need at least two bidders")
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    if reps < 1:
        raise ConfigError("reps must be >= 1")
    try:
        params = ProtocolParams(lock=to_units(lock), fee_alpha=float(alpha))
    except ProtocolError as exc:
        raise ConfigError(str(exc)) from None
    config = SimConfig(dist, n, params, SellerStrategy.repeated_auction(epsilon), reps, seed)

    def block(a, b):
        rows = []
        for i in range(a, b):
            s, h, _, _ = _replicate(config, i)
            rows.append((h, s))
        return np.array(rows, dtype=float).reshape(-1, 2)

    rows = _parallel_rows(block, reps, workers)
    honest, attack = rows.T
    h, hci = mean_ci(honest)
    a, aci = mean_ci(attack)
    d, dci = mean_ci(honest - attack)
    return RepeatedAuctionResult(h, hci, a, aci, d, dci, reps)


# -- bidder deviations --------------------------------------------------------------------


DEVIATION_GRID = (0.5, 0.9, 1.1, 2.0)


@dataclass(frozen=True)
class DeviationResult:
    replications: int
    multipliers: tuple[float, ...]
    counterexamples: int
    max_gain: float
    mean_utility_truthful: float
    mean_utility_by_multiplier: tuple[float, ...]
    first_counterexample: Optional[dict] = None

    def to_dict(self) -> dict:
        return asdict(self)


def bidder_deviation_experiment(
    dist: Distribution,
    n: int,
    params: ProtocolParams,
    reps: int,
    seed: int,
    multipliers: Sequence[float] = DEVIATION_GRID,
    workers: int = 1,
) -> DeviationResult:
    """One bidder (rotating over replications) bids ``m * v`` against an honest seller.

    Utilities are compared per replication in integer units, so a deviation
    that helps by even one unit is counted.
    """
    if n < 1 or reps < 1:
        raise ConfigError("need n >= 1 and reps >= 1")
    mults = tuple(float(m) for m in multipliers)

    def one(index):
        rng = random_stream(seed, index)
        vals = dist.sample(n, rng)
        bids = _units(vals)
        i = index % n
        me = f"b{i}"
        base = play_auction(params, bids, (), REVEAL_BELOW_B1, rng, skip_loser_claims=False)
        u0 = _own_utility(bids[i], base, me)
        us = []
        for m in mults:
            dev = list(bids)
            dev[i] = min(to_units(m * float(vals[i])), MAX_BID)
            play = play_auction(params, dev, (), REVEAL_BELOW_B1, rng, skip_loser_claims=False)
            us.append(_own_utility(bids[i], play, me))
        return [u0] + us

    def block(a, b):
        return np.array([one(i) for i in range(a, b)], dtype=np.int64).reshape(-1, len(mults) + 1)

    rows = _parallel_rows(block, reps, workers)
    gains = rows[:, 1:] - rows[:, :1]
    bad = np.argwhere(gains > 0)
    first = None
    if len(bad):
        r, k = (int(x) for x in bad[0])
        first = {"replication": r, "multiplier": mults[k], "gain_units": int(gains[r, k])}
    return DeviationResult(
        replications=reps,
        multipliers=mults,
        counterexamples=int(len(bad)),
        max_gain=float(gains.max()) / TOKEN_UNIT if gains.size else 0.0,
        mean_utility_truthful=float(rows[:, 0].mean()) / TOKEN_UNIT,
        mean_utility_by_multiplier=tuple(float(x) / TOKEN_UNIT for x in rows[:, 1:].mean(axis=0)),
        first_counterexample=first,
    )


def _own_utility(value: int, play: Play, account: str) -> int:
    return bidder_utility(value, play, account, -play.bidder_deltas[account])
