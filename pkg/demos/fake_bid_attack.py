"""A seller shilling its own auction with one fake bid.

Compares the closed-form expected gain of a fake bid s against a Monte Carlo
run of the full protocol, first at the published lock and then at the
break-even lock.

    python demos/fake_bid_attack.py
"""

from auction_lab import ProtocolParams, SellerStrategy, SimConfig, Uniform, best_fake_set_search
from auction_lab import break_even_lock, fake_bid_utility_closed_form, lock_bound_exact, run
from auction_lab.protocol import to_units

dist, n, reps = Uniform(0.0, 1.0), 2, 10_000
locks = {
    "published bound": lock_bound_exact(dist, n).L_exact,
    "break-even lock": break_even_lock(dist, n).value,
}

for label, L in locks.items():
    print(f"\n{label}: L = {L:.6f} (n = {n}, no fee)")
    print(f"{'s':>5}  {'closed form':>12}  {'simulated':>10}  {'95% CI':>8}")
    for s in (0.1, 0.2, 0.3, 0.45):
        exact = fake_bid_utility_closed_form(dist, n, L, [s])
        cfg = SimConfig(dist, n, ProtocolParams(to_units(L), 0.0), SellerStrategy.single_fake_bid(s), reps, master_seed=11)
        rep = run(cfg)
        print(f"{s:5.2f}  {exact:12.6f}  {rep.mean_gain_vs_honest:10.6f}  {rep.gain_ci_halfwidth_95:8.6f}")
    best, gain = best_fake_set_search(dist, n, L, [round(0.1 * k, 1) for k in range(1, 10)], max_size=2)
    print(f"best set of up to two fakes on a 0.1 grid: {best} with gain {gain:.6f}")
