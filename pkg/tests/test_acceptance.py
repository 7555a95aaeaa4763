"""Acceptance criteria 1-10. Each test prints its measurements; the summary prints PASS/FAIL per criterion.

Two criteria fail on purpose: the implementation follows the defining formulas and the
numbers contradict the claimed outcome. See the decisions ledger and the README.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from auction_lab.distributions import (
    Exponential,
    LogNormal,
    ShiftedExponential,
    Uniform,
    expected_b1,
    expected_b2,
    hazard_ratio_sup,
)
from auction_lab.mechanism import make_named_mechanism
from auction_lab.oplog import loads_records, replay
from auction_lab.params import fee_alpha, lock_bound_exact
from auction_lab.properties import DiscreteInstance, impossibility_experiment
from auction_lab.protocol import ProtocolParams, to_units
from auction_lab.simulation import (
    SellerStrategy,
    SimConfig,
    bidder_deviation_experiment,
    enumerate_fake_sets,
    fake_bid_utility_closed_form,
    repeated_auction_utility,
    run,
)

from fuzz import fuzz
from walkthrough import state_dump

U = Uniform(0.0, 1.0)
E1 = Exponential(1.0)
GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.criterion(1, "uniform lock bound equals 1/n")
def test_c1_lock_bound_closed_form(detail):
    t = time.perf_counter()
    errs = {n: abs(lock_bound_exact(U, n).L_exact - 1 / n) for n in (2, 5, 10, 50)}
    elapsed = time.perf_counter() - t
    detail(f"max |L_exact - 1/n| = {max(errs.values()):.3g} over n in {sorted(errs)}; {elapsed:.2f} s")
    assert max(errs.values()) <= 1e-6
    assert elapsed < 5


@pytest.mark.criterion(2, "n * L_exact approaches the hazard-ratio supremum")
def test_c2_large_n_convergence(detail):
    t = time.perf_counter()
    ok = True
    for dist in (U, E1):
        A = hazard_ratio_sup(dist)
        scaled = 200 * lock_bound_exact(dist, 200).L_exact
        rel = abs(scaled - A) / A
        detail(f"{dist!r}: 200 * L_exact = {scaled:.9f}, A = {A:.9f}, relative gap {rel:.2e}")
        ok &= rel <= 0.05
    elapsed = time.perf_counter() - t
    detail(f"{elapsed:.2f} s")
    assert ok and elapsed < 10


@pytest.mark.criterion(3, "fee coefficient closed form and gap bound")
def test_c3_fee(detail):
    worst = max(abs(fee_alpha(U, n).alpha - 2 / (n - 1)) for n in range(2, 51))
    detail(f"max |alpha - 2/(n-1)| over n = 2..50: {worst:.3g}")
    gaps_ok = True
    for dist in (U, E1):
        A = hazard_ratio_sup(dist)
        for n in (2, 5, 10, 50):
            gap = expected_b1(dist, n, 1e-12) - expected_b2(dist, n, 1e-12)
            # for Exp(1) the gap equals A exactly, so allow quadrature noise
            gaps_ok &= gap <= A + 1e-9
            detail(f"{dist!r} n={n}: E[B1]-E[B2] = {gap:.12f} <= A = {A:g}")
    assert worst <= 1e-9 and gaps_ok


@pytest.mark.criterion(4, "no profitable single fake bid at L = lock_bound_exact (closed form and Monte Carlo)")
def test_c4_single_fake_bid(detail):
    t = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 50)
    closed_ok = True
    for n in (2, 10):
        L = lock_bound_exact(U, n).L_exact
        values = [fake_bid_utility_closed_form(U, n, L, [s]) for s in grid]
        k = int(np.argmax(values))
        detail(f"n={n}, L={L:.6f}: max closed-form gain {values[k]:.6g} at s={grid[k]:.4f}")
        closed_ok &= values[k] <= 1e-9
    mc_ok = True
    for n, s in ((2, 0.2), (10, 0.5)):
        L = lock_bound_exact(U, n).L_exact
        # no fee, matching the closed form
        cfg = SimConfig(U, n, ProtocolParams(to_units(L), 0.0), SellerStrategy.single_fake_bid(s), 100_000, 404 + n)
        r = run(cfg)
        exact = fake_bid_utility_closed_form(U, n, to_units(L) / 1e6, [s])
        dev = abs(r.mean_gain_vs_honest - exact)
        detail(
            f"n={n}, s={s}: Monte Carlo gain {r.mean_gain_vs_honest:.6f} +- {r.gain_ci_halfwidth_95:.6f}, "
            f"closed form {exact:.6f}, |diff| = {dev / r.gain_ci_halfwidth_95:.2f} CI"
        )
        mc_ok &= dev <= 3 * r.gain_ci_halfwidth_95
    elapsed = time.perf_counter() - t
    detail(f"closed form <= 1e-9: {closed_ok}; Monte Carlo within 3 CI: {mc_ok}; {elapsed:.1f} s")
    assert mc_ok, "Monte Carlo disagrees with the closed form"
    assert closed_ok, "fake bids stay profitable at L = lock_bound_exact"
    assert elapsed < 120


def _random_configs(count, seed):
    rng = np.random.default_rng(seed)
    families = [
        lambda: U,
        lambda: Uniform(float(rng.uniform(0, 2)), float(rng.uniform(2.5, 4))),
        lambda: Exponential(float(rng.uniform(0.5, 3))),
        lambda: ShiftedExponential(float(rng.uniform(0, 1)), float(rng.uniform(0.5, 2))),
        lambda: LogNormal(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.3, 1.0))),
    ]
    out = []
    for _ in range(count):
        dist = families[int(rng.integers(len(families)))]()
        n = int(rng.integers(1, 11))
        # locks from free up to beyond break-even, scaled to the distribution
        L = float(rng.choice([0.0, rng.uniform(0, 0.2), rng.uniform(0.2, 2.0)])) * dist.mean()
        grid = sorted(dist.quantile(float(u)) for u in rng.uniform(0.02, 0.98, 8))
        out.append((dist, n, L, grid))
    return out


@pytest.mark.criterion(5, "whenever some fake-bid set pays, some single fake bid pays")
def test_c5_singletons_suffice(detail):
    t = time.perf_counter()
    positive = violations = larger = 0
    for dist, n, L, grid in _random_configs(20, 55):
        table = enumerate_fake_sets(dist, n, L, grid, 3)
        best_any = max(table.values())
        larger += len(max(table, key=table.__getitem__)) > 1
        best_single = max(v for k, v in table.items() if len(k) == 1)
        if best_any > 0:
            positive += 1
            violations += best_single <= 0
    elapsed = time.perf_counter() - t
    detail(
        f"20 configurations, {positive} with a profitable set, {violations} without a profitable singleton, "
        f"{larger} where a larger set is best; {elapsed:.1f} s"
    )
    assert violations == 0 and elapsed < 120


@pytest.mark.criterion(6, "repeated auctions do not pay with the fee; they do without it")
def test_c6_repeated_auction(detail):
    t = time.perf_counter()
    ok = True
    for n in (11, 21, 51):
        alpha = fee_alpha(U, n).alpha
        r = repeated_auction_utility(U, n, alpha, 1e-6, 100_000, seed=600 + n)
        passed = r.honest_mean >= r.attack_mean - 2 * r.diff_ci
        ok &= passed
        detail(f"n={n}, alpha={alpha:.4f}: honest {r.honest_mean:.5f}, attack {r.attack_mean:.5f}, diff CI {r.diff_ci:.5f}")
    r0 = repeated_auction_utility(U, 11, 0.0, 1e-6, 100_000, seed=611)
    inverted = r0.attack_mean - r0.honest_mean > 2 * r0.diff_ci
    detail(f"alpha=0, n=11: honest {r0.honest_mean:.5f}, attack {r0.attack_mean:.5f} (attack wins: {inverted})")
    elapsed = time.perf_counter() - t
    detail(f"{elapsed:.1f} s")
    assert ok and inverted


@pytest.mark.criterion(7, "revenue ratio is 1 - alpha(n), which rises to 1")
def test_c7_asymptotic_second_price(detail):
    ns = (5, 11, 21, 51, 101)
    targets, ok = [], True
    for n in ns:
        alpha = 2 / (n - 1)
        cfg = SimConfig(U, n, ProtocolParams(to_units(1 / n), fee_alpha(U, n).alpha), SellerStrategy.honest(), 20_000, 700 + n)
        r = run(cfg)
        dev = abs(r.mean_revenue_ratio - (1 - alpha))
        ok &= dev <= 2 * r.revenue_ratio_ci_halfwidth_95
        targets.append(1 - alpha)
        detail(f"n={n}: ratio {r.mean_revenue_ratio:.5f} +- {r.revenue_ratio_ci_halfwidth_95:.5f}, 1 - alpha = {1 - alpha:.5f}")
    monotone = all(a < b for a, b in zip(targets, targets[1:])) and 1 - targets[-1] < 0.05
    detail(f"1 - alpha(n) increasing towards 1: {monotone}")
    assert ok and monotone


@pytest.mark.criterion(8, "truthful bidding weakly dominates every grid deviation, per replication")
def test_c8_bidder_truthfulness(detail):
    n = 5
    params = ProtocolParams(to_units(1 / n), fee_alpha(U, n).alpha)
    r = bidder_deviation_experiment(U, n, params, 10_000, seed=8)
    detail(f"10000 replications x {len(r.multipliers)} deviations: {r.counterexamples} counterexamples, max gain {r.max_gain:g}")
    assert r.counterexamples == 0


@pytest.mark.criterion(9, "bidder-IC + OCA-proof mechanisms earn nothing; full removal passes both")
def test_c9_impossibility(detail):
    t = time.perf_counter()
    report = impossibility_experiment(DiscreteInstance((0, 1, 2, 3), 3), random_count=100, seed=0)
    elapsed = time.perf_counter() - t
    full = next(r for r in report.rows if r.mechanism == "SecondPriceFullRemoval")
    both = [r.mechanism for r in report.rows if r.passes_bidder_ic_and_oca]
    detail(f"{len(report.rows)} mechanisms in {elapsed:.1f} s; dichotomy holds: {report.dichotomy_holds}")
    detail(f"passing bidder IC and OCA: {both or 'none'}")
    detail(
        f"SecondPriceFullRemoval: bidder IC {full.bidder_ic}, OCA-proof {full.oca_proof}, revenue {full.max_seller_revenue:g}"
    )
    if not full.oca_proof:
        w = full.witnesses["OCAProof"]
        detail(f"coalition witness: {w.witness} gains {w.differential:g}")
    assert report.dichotomy_holds and elapsed < 60
    assert full.bidder_ic and full.oca_proof and full.max_seller_revenue == 0.0


@pytest.mark.criterion(10, "ledger safety under fuzzing and golden replay of the walkthrough")
def test_c10_protocol_safety(detail):
    t = time.perf_counter()
    stats = fuzz(100_000, seed=10)
    elapsed = time.perf_counter() - t
    detail(
        f"{stats.runs} runs, {stats.operations} operations ({stats.accepted} accepted), "
        f"{len(stats.violations)} violations; {elapsed:.1f} s"
    )
    detail(f"accepted by operation: {dict(sorted(stats.accepted_by_op.items()))}")
    golden_ok = True
    for name in ("settled", "expired"):
        session = replay(loads_records((GOLDEN / f"walkthrough_{name}.jsonl").read_text()))
        same = state_dump(session) == (GOLDEN / f"walkthrough_{name}.state.json").read_text()
        golden_ok &= same
        detail(f"golden replay {name}: {'identical' if same else 'DIFFERS'}")
    assert stats.violations == [] and golden_ok
